"""Self-financing replication of European claims with bonds and cash.

At each (time, state) the bond positions solve a linear system matching the
portfolio's jump exposure to the claim's jump exposure; the money market
account absorbs the rest. A discrete-rebalancing simulator verifies the hedge
pathwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelValidationError, UnhedgeableBasisError
from .model import ChainPath, GeneratorMatrix, RateMap, matrix_exponential
from .policy import DEFAULT_POLICY, NumericPolicy
from .pricing import ClaimPayoff, arrow_debreu, bond_prices, price_claim


@dataclass(frozen=True)
class BondBasis:
    """Maturities of the traded zero-coupon bonds (n-1 of them in full mode)."""

    maturities: tuple[float, ...]

    def __post_init__(self):
        ms = tuple(float(m) for m in self.maturities)
        if len(set(ms)) != len(ms):
            raise ModelValidationError(f"basis maturities must be distinct: {ms}")
        object.__setattr__(self, "maturities", ms)

    def check_against(self, T: float, n: int, reduced: bool = False) -> None:
        if any(m <= T for m in self.maturities):
            raise ModelValidationError(
                f"every basis maturity must exceed the claim maturity {T}: "
                f"{self.maturities}"
            )
        if not reduced and len(self.maturities) != n - 1:
            raise ModelValidationError(
                f"full replication of an {n}-state model needs {n - 1} bonds, "
                f"got {len(self.maturities)}"
            )


@dataclass(frozen=True)
class ReplicationReport:
    terminal_error: float
    max_tracking_error: float
    step: float
    n_jumps: int
    n_grid_points: int
    initial_state: int
    seed: int | None


def _other_states(n: int, current: int, reachable: tuple[int, ...] | None) -> list[int]:
    if reachable is None:
        return [j for j in range(n) if j != current]
    return list(reachable)


def reachable_states(n: int, current: int, jump_offsets: tuple[int, ...]) -> tuple[int, ...]:
    """States reachable from `current` under a declared jump structure."""
    out = sorted({current + o for o in jump_offsets if 0 <= current + o < n} - {current})
    if not out:
        raise ModelValidationError(
            f"declared jump structure leaves state {current} with no exits"
        )
    return tuple(out)


def hedge_system(
    G: GeneratorMatrix,
    r: RateMap,
    t: float,
    current: int,
    T: float,
    basis: BondBasis,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Bond-difference matrix and Arrow-Debreu-difference vector at (t, current).

    Row i is bond maturity T_i; column j runs over the other states in
    ascending order. dB[i][j] = B(t, j; T_i) - B(t, current; T_i), and
    dA[j] = A(t, j; T, k) - A(t, current; T, k). The positions D match the
    portfolio's jump exposure to the claim's in every reachable state, i.e.
    they satisfy one equation per state: dB.T @ D = dA (see solve_hedge).
    """
    basis.check_against(T, G.n)
    A = arrow_debreu(G, r, t, T).entries
    target = A[:, k]
    E, dA_vec = _difference_system(G, r, t, current, basis, target, reachable=None)
    return E.T, dA_vec


def _difference_system(
    G: GeneratorMatrix,
    r: RateMap,
    t: float,
    current: int,
    basis: BondBasis,
    target_values: np.ndarray,
    reachable: tuple[int, ...] | None,
) -> tuple[np.ndarray, np.ndarray]:
    """One exposure-matching equation per other state, one unknown per bond.

    Returns (E, dA) with E[row j][col i] = B(t, j; T_i) - B(t, current; T_i).
    """
    others = _other_states(G.n, current, reachable)
    B = np.array([bond_prices(G, r, t, Tm).values for Tm in basis.maturities])
    E = np.array([[B[i, j] - B[i, current] for i in range(len(basis.maturities))] for j in others])
    dA = np.array([target_values[j] - target_values[current] for j in others])
    return E, dA


def _check_solvable(E: np.ndarray, policy: NumericPolicy, context: str) -> None:
    # condition number alone misses a uniformly tiny system (e.g. all bonds
    # constant under zero rates), so also reject when every singular value is
    # below the noise floor of O(1) bond prices
    s = np.linalg.svd(E, compute_uv=False)
    smax = s.max(initial=0.0)
    floor = max(smax, 1.0) / policy.condition_limit
    if smax == 0.0 or s.min() <= floor:
        cond = np.inf if s.min() == 0.0 else smax / s.min()
        raise UnhedgeableBasisError(
            f"unhedgeable basis{context}: bond-difference matrix is numerically "
            f"singular (condition estimate {cond:.3e}, largest singular value "
            f"{smax:.3e})"
        )


def solve_hedge(
    dB: np.ndarray,
    dA: np.ndarray,
    policy: NumericPolicy = DEFAULT_POLICY,
    context: str = "",
) -> np.ndarray:
    """Bond positions solving the exposure-matching system from hedge_system.

    dB is laid out (bond x state) as documented there, so the per-state
    equations read dB.T @ D = dA. Raises UnhedgeableBasisError when the
    system is numerically singular.
    """
    dB = np.atleast_2d(np.asarray(dB, dtype=float))
    dA = np.atleast_1d(np.asarray(dA, dtype=float))
    if dB.shape[0] != dB.shape[1] or dB.shape[0] != dA.shape[0]:
        raise ModelValidationError(f"hedge system is not square: {dB.shape}")
    return _solve_exposures(dB.T, dA, policy, context)


def _solve_exposures(
    E: np.ndarray,
    dA: np.ndarray,
    policy: NumericPolicy,
    context: str,
) -> np.ndarray:
    """Solve E @ D = dA; minimum-norm solve when E is not square."""
    if E.size == 0:
        return np.zeros(E.shape[1] if E.ndim == 2 else 0)
    if np.linalg.norm(dA) <= 1e-13:  # zero exposure needs no bonds
        return np.zeros(E.shape[1])
    if E.shape[0] == E.shape[1]:
        _check_solvable(E, policy, context)
        D = np.linalg.solve(E, dA)
    else:
        D, *_ = np.linalg.lstsq(E, dA, rcond=None)
    resid = np.linalg.norm(E @ D - dA)
    if resid > policy.hedge_residual_tol * (1.0 + np.linalg.norm(dA)):
        raise UnhedgeableBasisError(
            f"basis cannot match jump exposures{context}: residual {resid:.3e}"
        )
    return D


class HedgePlan:
    """Replicating positions for a claim as a function of time and state."""

    def __init__(
        self,
        G: GeneratorMatrix,
        r: RateMap,
        T: float,
        basis: BondBasis,
        payoff: ClaimPayoff,
        jump_offsets: tuple[int, ...] | None = None,
        policy: NumericPolicy = DEFAULT_POLICY,
    ):
        basis.check_against(T, G.n, reduced=jump_offsets is not None)
        if payoff.maturity != T:
            raise ModelValidationError("payoff maturity must equal the claim maturity")
        self.G, self.r, self.T = G, r, T
        self.basis = basis
        self.payoff = payoff
        self.jump_offsets = jump_offsets
        self.policy = policy

    def _reachable(self, state: int) -> tuple[int, ...] | None:
        if self.jump_offsets is None:
            return None
        return reachable_states(self.G.n, state, self.jump_offsets)

    def positions(self, t: float, state: int) -> np.ndarray:
        target = price_claim(self.G, self.r, self.payoff, t).values
        dB, dU = _difference_system(
            self.G, self.r, t, state, self.basis, target, self._reachable(state)
        )
        return _solve_exposures(dB, dU, self.policy, f" at (t={t}, state={state})")

    def money_market_residual(self, t: float, state: int) -> float:
        D = self.positions(t, state)
        value = price_claim(self.G, self.r, self.payoff, t).values[state]
        bonds = sum(
            D[i] * bond_prices(self.G, self.r, t, Tm).values[state]
            for i, Tm in enumerate(self.basis.maturities)
        )
        return float(value - bonds)


def hedge_for_payoff(
    G: GeneratorMatrix,
    r: RateMap,
    T: float,
    basis: BondBasis,
    payoff: ClaimPayoff,
    jump_offsets: tuple[int, ...] | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> HedgePlan:
    return HedgePlan(G, r, T, basis, payoff, jump_offsets, policy)


def _backward_values(
    M: np.ndarray, ts: np.ndarray, maturity: float, terminal: np.ndarray
) -> np.ndarray:
    """Price vectors e^{(maturity - t)M} terminal at every grid time.

    Computed by backward recursion with cached one-step propagators, so the
    cost is one small matrix exponential per distinct step length.
    """
    cache: dict[float, np.ndarray] = {}

    def prop(dt: float) -> np.ndarray:
        if dt not in cache:
            cache[dt] = matrix_exponential(dt * M)
        return cache[dt]

    out = np.empty((len(ts), len(terminal)))
    out[-1] = prop(maturity - ts[-1]) @ terminal
    for m in range(len(ts) - 2, -1, -1):
        out[m] = prop(ts[m + 1] - ts[m]) @ out[m + 1]
    return out


def replicate_on_path(
    G: GeneratorMatrix,
    r: RateMap,
    path: ChainPath,
    T: float,
    basis: BondBasis,
    payoff: ClaimPayoff,
    dt: float,
    jump_offsets: tuple[int, ...] | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ReplicationReport:
    """Run the discrete-rebalancing hedge along one realized path.

    Positions are held constant over each grid interval; the grid is the
    uniform dt mesh refined with the path's exact jump times. Bonds are marked
    to model at interval ends and the cash residual accrues at the state's
    short rate, which is the exact solution of the self-financing dynamics on
    a jump-free interval.
    """
    if dt <= 0:
        raise ValueError("rebalance step dt must be positive")
    if path.horizon < T:
        raise ValueError(f"path horizon {path.horizon} shorter than maturity {T}")
    basis.check_against(T, G.n, reduced=jump_offsets is not None)
    if payoff.maturity != T:
        raise ModelValidationError("payoff maturity must equal T")

    n_steps = int(np.ceil(T / dt))
    grid = np.minimum(np.arange(n_steps + 1) * dt, T)
    jumps_in = [tau for tau in path.jump_times if tau < T]
    ts = np.unique(np.concatenate([grid, np.array(jumps_in)])) if jumps_in else np.unique(grid)

    M = G.entries - r.diagonal
    U = _backward_values(M, ts, T, payoff.values)
    Bs = [_backward_values(M, ts, Tm, np.ones(G.n)) for Tm in basis.maturities]

    state = path.state_at(0.0)
    X = float(U[0][state])
    max_track = 0.0
    n_jumps_used = 0
    for m in range(len(ts) - 1):
        t0, t1 = float(ts[m]), float(ts[m + 1])
        reach = (
            None if jump_offsets is None else reachable_states(G.n, state, jump_offsets)
        )
        others = _other_states(G.n, state, reach)
        E = np.array([[Bk[m][j] - Bk[m][state] for Bk in Bs] for j in others])
        dU = np.array([U[m][j] - U[m][state] for j in others])
        D = _solve_exposures(E, dU, policy, f" at (t={t0}, state={state})")

        cash = X - sum(D[i] * Bs[i][m][state] for i in range(len(Bs)))
        new_state = path.state_at(t1)
        if new_state != state:
            n_jumps_used += 1
            if reach is not None and new_state not in reach:
                raise ModelValidationError(
                    f"path jumps {state}->{new_state} at t={t1}, outside the "
                    f"declared jump structure"
                )
        X = float(
            sum(D[i] * Bs[i][m + 1][new_state] for i in range(len(Bs)))
            + cash * np.exp(r.rates[state] * (t1 - t0))
        )
        max_track = max(max_track, abs(X - float(U[m + 1][new_state])))
        state = new_state

    terminal_error = abs(X - float(payoff.values[path.state_at(T)]))
    return ReplicationReport(
        terminal_error=terminal_error,
        max_tracking_error=max_track,
        step=float(dt),
        n_jumps=n_jumps_used,
        n_grid_points=len(ts),
        initial_state=path.initial_state,
        seed=path.seed,
    )
