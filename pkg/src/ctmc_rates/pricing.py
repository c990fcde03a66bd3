"""Analytic pricing of European claims on the chain state at maturity.

Every claim paying phi(J_T) has value vector e^{(T-t)(G-R)} Phi, with R the
diagonal matrix of short rates. Bonds, yields, forward rates, caplets,
floorlets and Arrow-Debreu securities are all special cases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ModelValidationError
from .model import (
    GeneratorMatrix,
    RateMap,
    matrix_exponential,
    simulate_terminal,
)


@dataclass(frozen=True)
class ClaimPayoff:
    """Payoff vector phi over states, paid at the maturity date."""

    values: np.ndarray
    maturity: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ModelValidationError("payoff must be a finite vector")
        if self.maturity < 0:
            raise ModelValidationError("maturity must be >= 0")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PriceVector:
    """Per-state claim values at a valuation time."""

    values: np.ndarray
    valuation_time: float
    maturity: float


@dataclass(frozen=True)
class ArrowDebreuMatrix:
    """entries[i, j] = price in state i of the claim paying 1_{J_T = j}."""

    entries: np.ndarray
    valuation_time: float
    maturity: float

    @property
    def bond_prices(self) -> np.ndarray:
        return self.entries.sum(axis=1)


def discounted_transition(
    G: GeneratorMatrix, r: RateMap, t: float, T: float
) -> np.ndarray:
    """State-price kernel e^{(T-t)(G-R)}."""
    if t > T:
        raise ValueError(f"valuation time {t} is after maturity {T}")
    if G.n != r.n:
        raise ModelValidationError("generator and rate vector sizes differ")
    return matrix_exponential((T - t) * (G.entries - r.diagonal))


def price_claim(
    G: GeneratorMatrix, r: RateMap, payoff: ClaimPayoff, t: float
) -> PriceVector:
    if payoff.values.shape[0] != G.n:
        raise ModelValidationError("payoff length does not match state count")
    if t == payoff.maturity:
        values = payoff.values.copy()
    else:
        values = discounted_transition(G, r, t, payoff.maturity) @ payoff.values
    return PriceVector(values=values, valuation_time=t, maturity=payoff.maturity)


def bond_prices(G: GeneratorMatrix, r: RateMap, t: float, T: float) -> PriceVector:
    return price_claim(G, r, ClaimPayoff(np.ones(G.n), T), t)


def bond_price(G: GeneratorMatrix, r: RateMap, t: float, T: float, i: int) -> float:
    return float(bond_prices(G, r, t, T).values[i])


def zero_yield(G: GeneratorMatrix, r: RateMap, t: float, T: float, i: int) -> float:
    """Continuously compounded yield -log B / (T - t); undefined at t = T."""
    if t >= T:
        raise ValueError(f"yield needs t < T, got t={t}, T={T}")
    return -np.log(bond_price(G, r, t, T, i)) / (T - t)


def forward_rate(
    G: GeneratorMatrix, r: RateMap, t: float, i: int, T: float, Tb: float
) -> float:
    """Simple forward rate locked at t for the accrual period [T, Tb]."""
    if Tb <= T:
        raise ValueError(f"need T < Tb, got T={T}, Tb={Tb}")
    ratio = bond_price(G, r, t, T, i) / bond_price(G, r, t, Tb, i)
    return (ratio - 1.0) / (Tb - T)


def price_forward_rate_option(
    G: GeneratorMatrix,
    r: RateMap,
    t: float,
    T: float,
    Tb: float,
    h: Callable[[float], float],
) -> PriceVector:
    """Value of a claim paying h(forward rate fixed at T for [T, Tb]) at Tb.

    The payment is known at the reset date T, so it is priced as the
    T-maturity claim psi(j) = B(T, j; Tb) * h(F(T, j; T, Tb)).
    """
    if Tb <= T:
        raise ValueError(f"need T < Tb, got T={T}, Tb={Tb}")
    if t > T:
        raise ValueError(f"valuation time {t} is after reset date {T}")
    B_T = bond_prices(G, r, T, Tb).values
    psi = np.array(
        [B_T[j] * h((1.0 / B_T[j] - 1.0) / (Tb - T)) for j in range(G.n)]
    )
    out = price_claim(G, r, ClaimPayoff(psi, T), t)
    return PriceVector(values=out.values, valuation_time=t, maturity=T)


def caplet(
    G: GeneratorMatrix, r: RateMap, t: float, T: float, Tb: float, K: float
) -> PriceVector:
    return price_forward_rate_option(G, r, t, T, Tb, lambda F: max(F - K, 0.0))


def floorlet(
    G: GeneratorMatrix, r: RateMap, t: float, T: float, Tb: float, K: float
) -> PriceVector:
    return price_forward_rate_option(G, r, t, T, Tb, lambda F: max(K - F, 0.0))


def arrow_debreu(
    G: GeneratorMatrix, r: RateMap, t: float, T: float
) -> ArrowDebreuMatrix:
    return ArrowDebreuMatrix(
        entries=discounted_transition(G, r, t, T), valuation_time=t, maturity=T
    )


def mc_price_claim(
    G: GeneratorMatrix,
    r: RateMap,
    payoff: ClaimPayoff,
    initial: int,
    n_paths: int,
    seed: int | np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate of the claim value at t=0 from state `initial`.

    Independent of the matrix-exponential route: simulates chain paths,
    discounts the payoff by the exact pathwise rate integral, and returns
    (mean, standard error).
    """
    T = payoff.maturity
    if T <= 0:
        raise ValueError("Monte Carlo pricing needs maturity > 0")
    states, integ = simulate_terminal(G, r, initial, T, n_paths, seed)
    samples = np.exp(-integ) * payoff.values[states]
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else float("inf")
    return mean, se
