import numpy as np
import pytest

from ctmc_rates import (
    BondBasis,
    ChainPath,
    ClaimPayoff,
    GeneratorMatrix,
    ModelValidationError,
    RateMap,
    UnhedgeableBasisError,
    arrow_debreu,
    bond_prices,
    hedge_for_payoff,
    hedge_system,
    price_claim,
    replicate_on_path,
    simulate_path,
    solve_hedge,
)
from ctmc_rates.replication import _difference_system, _solve_exposures, reachable_states
from ctmc_rates.policy import DEFAULT_POLICY
from ctmc_rates.two_state import closed_form_hedge

from conftest import random_model


def birth_death_model(n=4, up=0.8, down=0.6, rate_step=0.03):
    Q = np.zeros((n, n))
    for i in range(n):
        if i + 1 < n:
            Q[i, i + 1] = up
        if i - 1 >= 0:
            Q[i, i - 1] = down
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return GeneratorMatrix(Q), RateMap(rate_step * np.arange(n))


class TestHedgeSystem:
    def test_two_state_scalar_system(self, two_state_example):
        _, G, r = two_state_example
        dB, dA = hedge_system(G, r, 0.2, 0, 1.0, BondBasis((1.5,)), k=0)
        B = bond_prices(G, r, 0.2, 1.5).values
        A = arrow_debreu(G, r, 0.2, 1.0).entries
        assert dB.shape == (1, 1)
        assert dB[0, 0] == pytest.approx(B[1] - B[0], rel=1e-14)
        assert dA[0] == pytest.approx(A[1, 0] - A[0, 0], rel=1e-14)

    def test_at_maturity_rhs_is_indicator_difference(self, two_state_example):
        _, G, r = two_state_example
        _, dA = hedge_system(G, r, 1.0, 0, 1.0, BondBasis((1.5,)), k=0)
        assert dA[0] == pytest.approx(0.0 - 1.0, abs=1e-12)
        _, dA = hedge_system(G, r, 1.0, 1, 1.0, BondBasis((1.5,)), k=0)
        assert dA[0] == pytest.approx(1.0 - 0.0, abs=1e-12)

    def test_zero_rates_make_system_singular(self):
        G = GeneratorMatrix(np.array([[-1.0, 1.0], [1.0, -1.0]]))
        r0 = RateMap(np.zeros(2))
        dB, dA = hedge_system(G, r0, 0.0, 0, 1.0, BondBasis((1.5,)), k=0)
        assert np.allclose(dB, 0.0, atol=1e-14)
        with pytest.raises(UnhedgeableBasisError):
            solve_hedge(dB, dA)

    def test_column_ordering_ascending_excluding_current(self):
        rng = np.random.default_rng(1)
        G, r = random_model(rng, n_max=4)
        n = G.n
        basis = BondBasis(tuple(2.0 + 0.3 * i for i in range(n - 1)))
        B = [bond_prices(G, r, 0.1, Tm).values for Tm in basis.maturities]
        current = 1
        dB, _ = hedge_system(G, r, 0.1, current, 1.0, basis, k=0)
        others = [j for j in range(n) if j != current]
        for i in range(n - 1):
            for col, j in enumerate(others):
                assert dB[i, col] == pytest.approx(B[i][j] - B[i][current], rel=1e-14)


class TestSolveHedge:
    def test_two_state_matches_closed_form_either_state(self, two_state_example):
        m, G, r = two_state_example
        expected = closed_form_hedge(m, 0.2, 1.0, 1.5, k=0)
        for current in (0, 1):
            dB, dA = hedge_system(G, r, 0.2, current, 1.0, BondBasis((1.5,)), k=0)
            D = solve_hedge(dB, dA)
            assert D[0] == pytest.approx(expected, rel=1e-12)

    def test_zero_rhs_gives_zero_position(self):
        assert solve_hedge(np.array([[2.0]]), np.array([0.0]))[0] == 0.0

    def test_identity_system(self):
        dA = np.array([0.3, -0.2])
        D = solve_hedge(np.eye(2), dA)
        assert np.allclose(D, dA, atol=1e-15)


class TestHedgeForPayoff:
    def test_linearity_over_arrow_debreu_claims(self, two_state_example):
        _, G, r = two_state_example
        basis = BondBasis((1.5,))
        phi = np.array([0.7, -0.4])
        plan = hedge_for_payoff(G, r, 1.0, basis, ClaimPayoff(phi, 1.0))
        per_k = []
        for k in (0, 1):
            dB, dA = hedge_system(G, r, 0.3, 0, 1.0, basis, k)
            per_k.append(solve_hedge(dB, dA))
        expected = phi[0] * per_k[0] + phi[1] * per_k[1]
        assert np.allclose(plan.positions(0.3, 0), expected, atol=1e-12)

    def test_zero_payoff_zero_plan(self, two_state_example):
        _, G, r = two_state_example
        plan = hedge_for_payoff(G, r, 1.0, BondBasis((1.5,)), ClaimPayoff(np.zeros(2), 1.0))
        assert np.allclose(plan.positions(0.2, 1), 0.0, atol=1e-14)
        assert plan.money_market_residual(0.2, 1) == pytest.approx(0.0, abs=1e-14)

    def test_basis_near_claim_maturity_approaches_one_bond(self, two_state_example):
        # hedging the T-bond with a bond maturing just after T: position -> 1
        _, G, r = two_state_example
        payoff = ClaimPayoff(np.ones(2), 1.0)
        for eps, tol in ((1e-2, 2e-2), (1e-3, 2e-3)):
            plan = hedge_for_payoff(G, r, 1.0, BondBasis((1.0 + eps,)), payoff)
            assert plan.positions(0.5, 0)[0] == pytest.approx(1.0, abs=tol)

    def test_residual_consistent_with_claim_value(self, two_state_example):
        _, G, r = two_state_example
        payoff = ClaimPayoff(np.array([1.0, 0.0]), 1.0)
        basis = BondBasis((1.5,))
        plan = hedge_for_payoff(G, r, 1.0, basis, payoff)
        t, i = 0.4, 1
        D = plan.positions(t, i)
        value = D[0] * bond_prices(G, r, t, 1.5).values[i] + plan.money_market_residual(t, i)
        assert value == pytest.approx(price_claim(G, r, payoff, t).values[i], abs=1e-10)

    def test_basis_maturing_before_claim_rejected(self, two_state_example):
        _, G, r = two_state_example
        with pytest.raises(ModelValidationError):
            hedge_for_payoff(G, r, 1.0, BondBasis((0.5,)), ClaimPayoff(np.ones(2), 1.0))


class TestJumpCoverage:
    def test_hedged_jump_matches_claim_jump(self):
        # the solved positions reproduce u(t,j) - u(t,i) across any jump i -> j
        rng = np.random.default_rng(8)
        for _ in range(5):
            G, r = random_model(rng, n_max=4)
            n = G.n
            basis = BondBasis(tuple(2.0 + 0.4 * i for i in range(n - 1)))
            payoff = ClaimPayoff(rng.normal(size=n), 1.0)
            target = price_claim(G, r, payoff, 0.3).values
            i = int(rng.integers(n))
            E, dU = _difference_system(G, r, 0.3, i, basis, target, None)
            D = _solve_exposures(E, dU, DEFAULT_POLICY, "")
            assert np.allclose(E @ D, dU, atol=1e-8)


class TestReplicateOnPath:
    def test_zero_rates_bond_claim_is_exact(self):
        G = GeneratorMatrix(np.array([[-1.0, 1.0], [1.0, -1.0]]))
        r0 = RateMap(np.zeros(2))
        path = simulate_path(G, 0, 2.0, 3)
        rep = replicate_on_path(
            G, r0, path, 1.0, BondBasis((1.5,)), ClaimPayoff(np.ones(2), 1.0), 0.01
        )
        assert rep.terminal_error <= 1e-12
        assert rep.max_tracking_error <= 1e-12

    def test_no_jump_bond_claim_error_first_order(self, two_state_example):
        # discrete rebalancing leaves O(dt) error even without jumps; seed 42
        # holds state 0 past T=1
        _, G, r = two_state_example
        path = simulate_path(G, 0, 2.0, 42, r=r)
        assert path.n_jumps == 0
        payoff = ClaimPayoff(np.ones(2), 1.0)
        basis = BondBasis((1.5,))
        e3 = replicate_on_path(G, r, path, 1.0, basis, payoff, 1e-3).terminal_error
        e4 = replicate_on_path(G, r, path, 1.0, basis, payoff, 1e-4).terminal_error
        assert e3 < 2e-5
        assert e4 < 0.2 * e3

    def test_jumpy_path_error_halves_with_dt(self, two_state_example):
        _, G, r = two_state_example
        payoff = ClaimPayoff(np.array([1.0, 0.0]), 1.0)
        basis = BondBasis((1.5,))
        rng = np.random.default_rng(0)
        path = None
        while path is None or sum(t < 1.0 for t in path.jump_times) < 2:
            path = simulate_path(G, 0, 1.5, rng, r=r)
        e_coarse = replicate_on_path(G, r, path, 1.0, basis, payoff, 1e-3).terminal_error
        e_fine = replicate_on_path(G, r, path, 1.0, basis, payoff, 5e-4).terminal_error
        assert e_fine < 0.75 * e_coarse

    def test_tracking_error_vanishes_with_dt(self):
        rng = np.random.default_rng(12)
        G, r = random_model(rng, n_max=4)
        n = G.n
        basis = BondBasis(tuple(1.6 + 0.3 * i for i in range(n - 1)))
        payoff = ClaimPayoff(rng.normal(size=n), 1.0)
        path = simulate_path(G, 0, 1.8, 99, r=r)
        errs = [
            replicate_on_path(G, r, path, 1.0, basis, payoff, dt).max_tracking_error
            for dt in (4e-3, 1e-3, 2.5e-4)
        ]
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 0.4 * errs[1]

    def test_singular_basis_raises_named_error(self):
        G = GeneratorMatrix(np.array([[-1.0, 1.0], [1.0, -1.0]]))
        r0 = RateMap(np.zeros(2))
        path = simulate_path(G, 0, 2.0, 3)
        with pytest.raises(UnhedgeableBasisError) as exc:
            replicate_on_path(
                G, r0, path, 1.0, BondBasis((1.5,)), ClaimPayoff(np.array([1.0, 0.0]), 1.0), 0.01
            )
        assert "t=" in str(exc.value)


class TestReducedBasis:
    def test_reachable_states_birth_death(self):
        assert reachable_states(4, 0, (-1, 1)) == (1,)
        assert reachable_states(4, 2, (-1, 1)) == (1, 3)

    def test_two_bond_hedge_covers_birth_death_jumps(self):
        G, r = birth_death_model(n=4)
        basis = BondBasis((1.6, 2.1))
        rng = np.random.default_rng(21)
        payoff = ClaimPayoff(rng.normal(size=4), 1.0)
        target = price_claim(G, r, payoff, 0.5).values
        for i in range(4):
            reach = reachable_states(4, i, (-1, 1))
            E, dU = _difference_system(G, r, 0.5, i, basis, target, reach)
            D, *_ = np.linalg.lstsq(E, dU, rcond=None)
            assert np.allclose(E @ D, dU, atol=1e-9)

    def test_replication_with_two_bonds_on_birth_death_paths(self):
        G, r = birth_death_model(n=4)
        basis = BondBasis((1.6, 2.1))
        payoff = ClaimPayoff(np.array([1.0, 0.0, 0.0, 0.0]), 1.0)
        rng = np.random.default_rng(4)
        for _ in range(3):
            path = simulate_path(G, 1, 2.2, rng, r=r)
            rep = replicate_on_path(
                G, r, path, 1.0, basis, payoff, 2.5e-4, jump_offsets=(-1, 1)
            )
            assert rep.terminal_error < 3e-3

    def test_jump_outside_declared_structure_rejected(self):
        rng = np.random.default_rng(2)
        G, r = random_model(rng, n_max=3)
        while G.n != 3:
            G, r = random_model(rng, n_max=3)
        basis = BondBasis((1.6, 2.1))
        payoff = ClaimPayoff(np.zeros(3), 1.0)
        path = ChainPath(0, (0.5,), (2,), 1.5, 3)
        with pytest.raises(ModelValidationError) as exc:
            replicate_on_path(G, r, path, 1.0, basis, payoff, 0.01, jump_offsets=(-1, 1))
        assert "outside the declared jump structure" in str(exc.value)
