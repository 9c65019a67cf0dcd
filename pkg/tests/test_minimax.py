import math

import numpy as np
import pytest
from conftest import make_pmf, random_pmf

from neguess.entropy import relative_ab
from neguess.errors import AlphabetMismatch, DomainError, NonConvergence, NonPositiveQ
from neguess.guessing import GuessingStrategy, iter_strategies, optimal_strategy
from neguess.minimax import (
    SolverConfig,
    SourceFamily,
    require_converged,
    robust_strategy,
    solve_minimax,
    worst_redundancy,
)
from neguess.oracles import grid_minimax
from neguess.pmf import NEParams, Pmf

PAIR = SourceFamily((make_pmf(0.8, 0.2), make_pmf(0.2, 0.8)))
UNIT = NEParams(1.0, 1.0)


class TestFamily:
    def test_requires_members(self):
        with pytest.raises(DomainError):
            SourceFamily(())

    def test_alphabets_must_match(self):
        with pytest.raises(AlphabetMismatch):
            SourceFamily((make_pmf(0.5, 0.5), make_pmf(0.2, 0.3, 0.5)))

    def test_dict_round_trip(self):
        fam = SourceFamily.from_dict(PAIR.to_dict())
        assert len(fam) == 2
        np.testing.assert_array_equal(fam.log_stack(), PAIR.log_stack())


class TestWorstRedundancy:
    def test_matched_singleton(self, rng):
        P = random_pmf(rng, 4)
        fam = SourceFamily((P,))
        assert worst_redundancy(fam, optimal_strategy(P, 2.0), NEParams(2.0, 0.5)) == 0.0

    def test_uniform_family(self, rng):
        fam = SourceFamily((Pmf.uniform(3), Pmf.uniform(3)))
        for G in iter_strategies(3):
            assert abs(worst_redundancy(fam, G, UNIT)) < 1e-14

    def test_symmetric_pair(self):
        G = GuessingStrategy(np.array([1, 2]))
        assert worst_redundancy(PAIR, G, UNIT) == pytest.approx(
            math.log(1.8) - math.log(1.2), rel=1e-13)


class TestSolver:
    def test_singleton(self, rng):
        P = random_pmf(rng, 3)
        res = solve_minimax(SourceFamily((P,)), NEParams(2.0, 1.0))
        assert res.converged
        assert abs(res.c_value) < 1e-8
        np.testing.assert_allclose(res.q_star.probs[0], P.probs, atol=1e-4)

    def test_symmetric_pair(self):
        res = solve_minimax(PAIR, UNIT)
        np.testing.assert_allclose(res.q_star.probs, [[0.5, 0.5]], atol=1e-6)
        expected = relative_ab(make_pmf(0.8, 0.2), Pmf(PAIR.x_labels, np.array([0.5, 0.5])),
                               (0.5, 1.0))
        assert res.c_value == pytest.approx(expected, abs=1e-9)
        assert res.c_value == pytest.approx(grid_minimax(PAIR, UNIT, 1e-4), abs=1e-6)

    def test_matches_dense_grid_on_three_symbols(self, rng):
        fam = SourceFamily((random_pmf(rng, 3), random_pmf(rng, 3)))
        params = NEParams(1.0, 1.0)
        res = solve_minimax(fam, params)
        grid = grid_minimax(fam, params, 1e-3)
        assert abs(res.c_value - grid) <= 1e-3
        assert grid >= res.c_value - 1e-9

    def test_deterministic(self, rng):
        fam = SourceFamily(tuple(random_pmf(rng, 3) for _ in range(3)))
        a = solve_minimax(fam, UNIT, SolverConfig(seed=5))
        b = solve_minimax(fam, UNIT, SolverConfig(seed=5))
        assert a.c_value == b.c_value
        np.testing.assert_array_equal(a.q_star.probs, b.q_star.probs)

    def test_result_invariants(self, rng):
        fam = SourceFamily(tuple(random_pmf(rng, 4) for _ in range(2)))
        res = solve_minimax(fam, NEParams(0.5, 2.0))
        assert res.c_value >= -1e-10 and res.certificate_gap >= 0
        assert set(res.to_dict()) == {"q_star", "c_value", "iterations", "converged",
                                      "certificate_gap"}

    def test_positive_q_required(self):
        with pytest.raises(NonPositiveQ):
            solve_minimax(PAIR, NEParams(-1.0, 1.0))

    def test_iteration_limit(self):
        res = solve_minimax(PAIR, UNIT, SolverConfig(max_iter=2, restarts=0))
        assert not res.converged
        with pytest.raises(NonConvergence) as info:
            require_converged(res)
        assert info.value.result is res

    def test_bad_config(self):
        with pytest.raises(DomainError):
            SolverConfig(tol=0.0)


class TestRobustStrategy:
    def test_singleton(self, rng):
        P = random_pmf(rng, 4)
        G, rep = robust_strategy(SourceFamily((P,)), NEParams(1.0, 2.0))
        assert G == optimal_strategy(P, 1.0)
        assert abs(rep.moment) < 1e-12
        assert not rep.violated

    def test_symmetric_pair(self):
        G, rep = robust_strategy(PAIR, UNIT)
        assert G.ranks.tolist() == [[1, 2]]
        assert rep.exhaustive and rep.strategies_tested == 2
        assert not rep.violated

    def test_three_members_four_symbols(self, rng):
        fam = SourceFamily(tuple(random_pmf(rng, 4) for _ in range(3)))
        _, rep = robust_strategy(fam, UNIT)
        width = math.log(1 + math.log(4))
        C = rep.extras["minimax"].c_value
        assert rep.strategies_tested == 24
        assert rep.moment <= C + width
        assert rep.min_tested_worst >= C - width
        assert not rep.violated
