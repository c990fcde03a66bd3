"""Core CTMC model objects: generator validation, transition kernels and path simulation.

The short rate is r(J_t) for an irreducible finite-state chain J with
generator G. Everything downstream (pricing, hedging, recovery) consumes the
immutable objects defined here.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ModelValidationError
from .policy import DEFAULT_POLICY, NumericPolicy

# identifier recorded in run manifests; all randomness flows through
# numpy.random.default_rng (PCG64)
RNG_ALGORITHM = "numpy-pcg64"


@dataclass(frozen=True)
class StateSpace:
    """Finite state space {0, 1, ..., n-1}, optionally with display labels."""

    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ModelValidationError(f"state count must be >= 1, got {self.n}")
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise ModelValidationError(
                    f"{len(self.labels)} labels for {self.n} states"
                )
            if len(set(self.labels)) != self.n:
                raise ModelValidationError("state labels must be distinct")

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GeneratorMatrix:
    """n x n intensity matrix of the chain under the pricing measure.

    Construction only enforces shape and finiteness; the CTMC sign/row-sum/
    irreducibility invariants are checked by validate_model so that all
    violations can be reported together.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _as_readonly(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ModelValidationError(f"generator must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ModelValidationError("generator entries must be finite")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class RateMap:
    """Per-state short rate r(i) >= 0; exposes the diagonal matrix form."""

    rates: np.ndarray

    def __post_init__(self):
        a = _as_readonly(self.rates)
        if a.ndim != 1:
            raise ModelValidationError("rates must be a vector")
        if not np.all(np.isfinite(a)):
            raise ModelValidationError("rates must be finite")
        object.__setattr__(self, "rates", a)

    @property
    def n(self) -> int:
        return self.rates.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.rates)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        return "valid model" if self.ok else "; ".join(self.violations)


def is_irreducible(G: GeneratorMatrix, policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """Strong connectivity of the graph with an edge i->j iff g_ij > support_eps."""
    if G.n == 1:
        return True
    support = G.entries > policy.support_eps
    np.fill_diagonal(support, False)
    n_comp, _ = connected_components(
        csr_matrix(support), directed=True, connection="strong"
    )
    return n_comp == 1


def validate_model(
    G: GeneratorMatrix,
    r: RateMap,
    S: StateSpace | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ValidationReport:
    """Collect every violated model invariant; an empty report means admissible.

    Dimension mismatches are hard errors (there is no sensible partial report
    for them); everything else is accumulated.
    """
    n = S.n if S is not None else G.n
    if G.n != n:
        raise ModelValidationError(f"generator is {G.n}x{G.n} but n={n}")
    if r.n != n:
        raise ModelValidationError(f"rate vector has length {r.n} but n={n}")

    bad: list[str] = []
    Q = G.entries
    scale = max(1.0, float(np.max(np.abs(Q)))) if Q.size else 1.0
    row_sums = Q.sum(axis=1)
    for i in np.flatnonzero(np.abs(row_sums) > policy.row_sum_tol * scale):
        bad.append(f"generator row {i} sums to {row_sums[i]:.3e}, not 0")
    off = Q - np.diag(np.diag(Q))
    for i, j in zip(*np.nonzero(off < 0)):
        bad.append(f"generator entry ({i},{j}) = {Q[i, j]:.3e} is negative off-diagonal")
    for i in np.flatnonzero(np.diag(Q) > 0):
        bad.append(f"generator diagonal ({i},{i}) = {Q[i, i]:.3e} is positive")
    if not is_irreducible(G, policy):
        bad.append("generator is not irreducible (transition graph not strongly connected)")
    for i in np.flatnonzero(r.rates < 0):
        bad.append(f"rate for state {i} is negative: {r.rates[i]:.3e}")
    return ValidationReport(tuple(bad))


def require_valid_model(
    G: GeneratorMatrix, r: RateMap, policy: NumericPolicy = DEFAULT_POLICY
) -> None:
    report = validate_model(G, r, policy=policy)
    if not report.ok:
        raise ModelValidationError(str(report))


def matrix_exponential(M: np.ndarray) -> np.ndarray:
    """e^M via scipy's scaling-and-squaring Pade implementation."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix exponential of non-finite matrix")
    return expm(M)


def transition_matrix(G: GeneratorMatrix, t: float) -> np.ndarray:
    """P(t) = e^{tG}; stochastic for any admissible generator."""
    if t < 0:
        raise ValueError(f"transition time must be >= 0, got {t}")
    return matrix_exponential(t * G.entries)


def stationary_distribution(G: GeneratorMatrix) -> np.ndarray:
    """Unique invariant distribution of an irreducible generator."""
    n = G.n
    A = np.vstack([G.entries.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


@dataclass(frozen=True)
class ChainPath:
    """A realized trajectory: initial state, jump times and post-jump states."""

    initial_state: int
    jump_times: tuple[float, ...]
    post_jump_states: tuple[int, ...]
    horizon: float
    n_states: int
    seed: int | None = None

    def __post_init__(self):
        if len(self.jump_times) != len(self.post_jump_states):
            raise ValueError("jump_times and post_jump_states must have equal length")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        prev_t = 0.0
        prev_s = self.initial_state
        for t, s in zip(self.jump_times, self.post_jump_states):
            if not (prev_t < t <= self.horizon):
                raise ValueError(f"jump time {t} not increasing within (0, horizon]")
            if s == prev_s:
                raise ValueError(f"jump at t={t} does not change the state")
            if not (0 <= s < self.n_states):
                raise ValueError(f"state {s} outside state space of size {self.n_states}")
            prev_t, prev_s = t, s
        if not (0 <= self.initial_state < self.n_states):
            raise ValueError("initial state outside state space")

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    def state_at(self, t: float) -> int:
        """State J_t (cadlag: at a jump time the post-jump state)."""
        if not (0 <= t <= self.horizon):
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        k = bisect.bisect_right(self.jump_times, t)
        return self.initial_state if k == 0 else self.post_jump_states[k - 1]

    def segments(self, start: float, end: float):
        """Constant-state pieces (t0, t1, state) covering [start, end]."""
        if not (0 <= start <= end <= self.horizon):
            raise ValueError(f"interval [{start}, {end}] outside [0, {self.horizon}]")
        t0 = start
        state = self.state_at(start)
        k = bisect.bisect_right(self.jump_times, start)
        while k < len(self.jump_times) and self.jump_times[k] < end:
            yield (t0, self.jump_times[k], state)
            t0 = self.jump_times[k]
            state = self.post_jump_states[k]
            k += 1
        yield (t0, end, state)


@dataclass(frozen=True)
class IntegratedRate:
    """Exact value of the pathwise rate integral over some window."""

    value: float
    start: float
    end: float


def simulate_path(
    G: GeneratorMatrix,
    initial: int,
    horizon: float,
    seed: int | np.random.Generator,
    r: RateMap | None = None,
) -> ChainPath:
    """Gillespie simulation of one trajectory on [0, horizon].

    Holding time in state i is Exponential(-g_ii); the next state is j with
    probability g_ij / (-g_ii). Deterministic given the seed.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if r is not None:
        require_valid_model(G, r)
    elif not is_irreducible(G):
        raise ModelValidationError("generator is not irreducible")
    n = G.n
    if not (0 <= initial < n):
        raise ValueError(f"initial state {initial} outside state space")
    if isinstance(seed, np.random.Generator):
        rng, seed_out = seed, None
    else:
        rng, seed_out = np.random.default_rng(seed), int(seed)

    Q = G.entries
    jump_times: list[float] = []
    states: list[int] = []
    t, state = 0.0, initial
    while True:
        rate = -Q[state, state]
        if rate <= 0.0:  # n == 1 only; an absorbing state fails validation otherwise
            break
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        probs = np.clip(Q[state], 0.0, None)
        probs[state] = 0.0
        state = int(rng.choice(n, p=probs / probs.sum()))
        jump_times.append(t)
        states.append(state)
    return ChainPath(
        initial_state=initial,
        jump_times=tuple(jump_times),
        post_jump_states=tuple(states),
        horizon=float(horizon),
        n_states=n,
        seed=seed_out,
    )


def integrate_rate(
    path: ChainPath, r: RateMap, start: float = 0.0, end: float | None = None
) -> IntegratedRate:
    """Exact piecewise-constant integral of r(J_s) over [start, end]."""
    if end is None:
        end = path.horizon
    if r.n != path.n_states:
        raise ModelValidationError("rate vector does not match path state space")
    total = 0.0
    for t0, t1, state in path.segments(start, end):
        total += (t1 - t0) * r.rates[state]
    return IntegratedRate(value=total, start=float(start), end=float(end))


def simulate_terminal(
    G: GeneratorMatrix,
    r: RateMap,
    initial: int,
    horizon: float,
    n_paths: int,
    seed: int | np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized simulation of n_paths trajectories.

    Returns (terminal_states, integrated_rates): the state at the horizon and
    the exact value of the pathwise rate integral, per path. Used by the Monte
    Carlo pricing oracle, where per-path ChainPath objects would be too slow.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    require_valid_model(G, r)
    n = G.n
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    states = np.full(n_paths, initial, dtype=np.int64)
    integ = np.zeros(n_paths)
    if n == 1:
        return states, integ + r.rates[0] * horizon

    Q = G.entries
    exit_rate = -np.diag(Q)
    probs = np.clip(Q, 0.0, None)
    np.fill_diagonal(probs, 0.0)
    cum = np.cumsum(probs / probs.sum(axis=1, keepdims=True), axis=1)
    cum[:, -1] = 1.0

    clock = np.zeros(n_paths)
    alive = np.arange(n_paths)
    while alive.size:
        s = states[alive]
        hold = rng.exponential(1.0, alive.size) / exit_rate[s]
        t_new = clock[alive] + hold
        integ[alive] += r.rates[s] * (np.minimum(t_new, horizon) - clock[alive])
        clock[alive] = t_new
        jumping = t_new < horizon
        jump_idx = alive[jumping]
        if jump_idx.size:
            u = rng.random(jump_idx.size)
            states[jump_idx] = (u[:, None] >= cum[states[jump_idx]]).sum(axis=1)
        alive = jump_idx
    return states, integ
