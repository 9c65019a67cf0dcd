import csv
import io
import json

import numpy as np
import pytest
from conftest import make_pmf, random_joint

from neguess import oracles
from neguess.errors import BudgetExceeded, DimensionTooLarge, InvalidConfig
from neguess.guessing import optimal_strategy, q_moment
from neguess.minimax import SourceFamily
from neguess.pmf import JointPmf, NEParams, Pmf
from neguess.verify import (
    CHECKS,
    MUTATION_TARGETS,
    SweepConfig,
    _Ctx,
    brute_force_optimal,
    grid_minimax,
    mutated,
    run_sweep,
    stream,
)

SMALL = dict(trials=4, alphabet_sizes=(2, 3, 4), y_sizes=(1, 2), q_grid=(-1.0, 0.5, 2.0),
             rho_grid=(0.5, 1.0))


class TestConfig:
    def test_zero_trials_rejected(self):
        with pytest.raises(InvalidConfig):
            SweepConfig(trials=0)

    @pytest.mark.parametrize("field", ["alphabet_sizes", "y_sizes", "q_grid", "rho_grid"])
    def test_empty_grid_rejected(self, field):
        with pytest.raises(InvalidConfig):
            SweepConfig(**{field: ()})

    def test_tolerance_must_be_positive(self):
        with pytest.raises(InvalidConfig):
            SweepConfig(tolerance=0.0)

    def test_unknown_check(self):
        with pytest.raises(InvalidConfig):
            SweepConfig(checks=("nope",))

    def test_json_round_trip(self, tmp_path):
        cfg = SweepConfig(seed=3, checks=("theorem1",), trial_overrides={"theorem1": 2})
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert SweepConfig.load(path) == cfg

    def test_unknown_field_in_json(self):
        with pytest.raises(InvalidConfig):
            SweepConfig.from_dict({"seeed": 1})


class TestBruteForce:
    def test_uniform_returns_lexicographic_first(self):
        G, v = brute_force_optimal(Pmf.uniform(4).as_joint(), NEParams(1.0, 2.0))
        assert G.ranks.tolist() == [[1, 2, 3, 4]]
        assert v == pytest.approx(sum(i**2 for i in range(1, 5)) / 4, rel=1e-14)

    def test_two_symbols(self):
        G, v = brute_force_optimal(make_pmf(0.8, 0.2).as_joint(), NEParams(1.0, 1.0))
        assert G.ranks.tolist() == [[1, 2]]
        assert v == pytest.approx(1.2, rel=1e-14)

    def test_matches_optimal_strategy(self, rng):
        for _ in range(100):
            J = random_joint(rng, 4, 2)
            for q in (-2.0, 0.5, 1.0):
                params = NEParams(q, 1.5)
                G, v = brute_force_optimal(J, params)
                G_opt = optimal_strategy(J, q)
                assert q_moment(G_opt, J, params) == pytest.approx(v, rel=1e-12)
                assert G == G_opt

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            brute_force_optimal(JointPmf.uniform(7, 2), NEParams(1.0, 1.0))


class TestGridMinimax:
    def test_singleton(self):
        P = make_pmf(0.3, 0.7)
        assert abs(grid_minimax(SourceFamily((P,)), NEParams(1.0, 1.0), 0.01)) < 1e-12

    def test_symmetric_pair_minimum_near_uniform(self):
        fam = SourceFamily((make_pmf(0.8, 0.2), make_pmf(0.2, 0.8)))
        _, point = grid_minimax(fam, NEParams(1.0, 1.0), 1e-3, return_point=True)
        np.testing.assert_allclose(point, [[0.5, 0.5]], atol=1e-3)

    def test_dimension_limit(self):
        fam = SourceFamily((Pmf.uniform(5),))
        with pytest.raises(DimensionTooLarge):
            grid_minimax(fam, NEParams(1.0, 1.0), 0.1)

    def test_refinement_never_worse(self, rng):
        fam = SourceFamily(tuple(random_joint(rng, 3, 1) for _ in range(2)))
        params = NEParams(2.0, 0.5)
        assert grid_minimax(fam, params, 0.05, refine=4) <= grid_minimax(fam, params, 0.05)


class TestSweep:
    def test_small_sweep_passes(self):
        report = run_sweep(SweepConfig(**SMALL, checks=tuple(
            c for c in CHECKS if c not in ("mismatch4", "rho0_identity"))))
        assert report.ok, report.to_dict()
        for r in report.results.values():
            assert r.counterexamples == []

    def test_csv_is_deterministic(self):
        cfg = SweepConfig(**SMALL, checks=("theorem1", "theorem3", "mismatch3"))
        assert run_sweep(cfg).csv_text() == run_sweep(cfg).csv_text()

    def test_seed_changes_instances(self):
        a = run_sweep(SweepConfig(**SMALL, checks=("theorem1",), seed=1)).csv_text()
        b = run_sweep(SweepConfig(**SMALL, checks=("theorem1",), seed=2)).csv_text()
        assert a != b

    @pytest.mark.parametrize("n1,n2", [(5, 2), (7, 3), (3, 3), (2, 4)])
    def test_size_walk_covers_every_pair(self, n1, n2):
        pairs = {_Ctx.pick2(range(n1), range(n2), t) for t in range(n1 * n2)}
        assert len(pairs) == n1 * n2

    def test_streams_are_distinct(self):
        draws = {stream(7, c, t).random() for c in ("theorem1", "theorem2") for t in range(5)}
        assert len(draws) == 10

    def test_perturbed_bound_reports_violations(self):
        with mutated("neguess.bounds", "bound_L"):
            report = run_sweep(SweepConfig(**SMALL, checks=("theorem1",)))
        assert report.failures > 0
        assert report.results["theorem1"].counterexamples
        assert run_sweep(SweepConfig(**SMALL, checks=("theorem1",))).ok

    def test_literal_rho0_identity_fails(self):
        report = run_sweep(SweepConfig(**SMALL, checks=("rho0_identity",)))
        assert report.failures == report.results["rho0_identity"].failed > 0
        dump = report.results["rho0_identity"].counterexamples[0]
        assert {"P", "q", "log_moment", "clne_diag"} <= set(dump)

    def test_every_check_has_a_mutation_target(self):
        assert set(MUTATION_TARGETS) == set(CHECKS)

    def test_summary_json(self):
        report = run_sweep(SweepConfig(**SMALL, checks=("divergence",)))
        d = json.loads(json.dumps(report.to_dict()))
        assert d["failures"] == 0 and d["checks"]["divergence"]["passed"] > 0


def test_oracle_moment_against_hand_value():
    J = JointPmf(("a", "b"), ("u",), np.array([[0.8, 0.2]]))
    assert oracles.moment(J, [[1, 2]], 2.0, 1.0) == pytest.approx(18 / 17, rel=1e-15)


def test_csv_rows_carry_values():
    report = run_sweep(SweepConfig(**SMALL, checks=("theorem3",)))
    rows = list(csv.DictReader(io.StringIO(report.csv_text())))
    assert len(rows) == len(report.rows) > 0
    assert {r["theorem_id"] for r in rows} == {"T3_sandwich"}
    assert all(float(r["lower"]) <= float(r["moment"]) <= float(r["upper"]) for r in rows)


def test_rho0_limit_sandwich_at_full_scale():
    cfg = SweepConfig(trials=100, alphabet_sizes=(2, 3, 4, 5), y_sizes=(1,),
                      q_grid=(0.5, 1.0, 2.0), checks=("rho0_limit",))
    report = run_sweep(cfg)
    assert report.ok and report.results["rho0_limit"].passed == 300
