"""Acceptance suite: one test per acceptance criterion, each printing a
single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys

import pytest

from neguess.verify import MUTATION_TARGETS, SweepConfig, mutated, run_sweep

SEED = 20240601
Q_GRID = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
RHO_WIDE = (0.25, 0.5, 1.0, 2.0, 4.0)
RHO_MID = (0.5, 1.0, 2.0)
POS_Q = (0.5, 1.0, 2.0)
SIZES = (2, 3, 4, 5, 6, 7, 8)

# criterion number -> (description, check name, sweep settings)
CRITERIA: dict[int, tuple[str, str, dict]] = {
    1: ("unconditional lower bound, 1000 pmfs", "theorem1",
        dict(trials=1000, alphabet_sizes=SIZES, y_sizes=(1,), q_grid=Q_GRID,
             rho_grid=RHO_WIDE)),
    2: ("conditional lower bound, |Y| in {2,3}", "theorem2",
        dict(trials=1000, alphabet_sizes=SIZES, y_sizes=(2, 3), q_grid=Q_GRID,
             rho_grid=RHO_WIDE)),
    3: ("two-sided sandwich for the optimal strategy", "theorem3",
        dict(trials=1000, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=Q_GRID,
             rho_grid=RHO_WIDE)),
    4: ("escort ordering equals exhaustive optimum", "optimality",
        dict(trials=200, alphabet_sizes=(2, 3, 4, 5, 6), y_sizes=(1, 2), q_grid=Q_GRID,
             rho_grid=RHO_WIDE)),
    5: ("q = 1 reduces to the Renyi-entropy bounds", "q1_reduction",
        dict(trials=200, alphabet_sizes=SIZES, y_sizes=(1,), q_grid=(1.0,),
             rho_grid=RHO_WIDE)),
    6: ("ln L equals rho times LNE / CLNE", "lne_identity",
        dict(trials=500, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=POS_Q,
             rho_grid=RHO_WIDE)),
    7: ("diagonal limits of LNE and CLNE", "diagonal_limits",
        dict(trials=100, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=POS_Q,
             rho_grid=RHO_MID)),
    8: ("E_q[ln G*] equals the diagonal CLNE (literal)", "rho0_identity",
        dict(trials=100, alphabet_sizes=(2, 3, 4, 5), y_sizes=(1,), q_grid=POS_Q,
             rho_grid=RHO_MID)),
    9: ("relative (alpha,beta)-entropies are divergences", "divergence",
        dict(trials=1000, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=(0.5, 2.0),
             rho_grid=RHO_MID)),
    10: ("mismatched-strategy sandwich and strategy pmf", "mismatch_sandwich",
         dict(trials=500, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=POS_Q,
              rho_grid=RHO_MID)),
    11: ("redundancy within ln(1+ln|X|) of q RE", "mismatch3",
         dict(trials=500, alphabet_sizes=SIZES, y_sizes=(1, 2, 3), q_grid=POS_Q,
              rho_grid=RHO_MID)),
    12: ("minimax solver vs grid; robust strategy bounds", "mismatch4",
         dict(trials=50, alphabet_sizes=(2, 3, 4), y_sizes=(1,), q_grid=POS_Q,
              rho_grid=RHO_MID)),
}

MUTATION_TRIALS = 6


def _config(check: str, settings: dict, **over) -> SweepConfig:
    return SweepConfig(seed=SEED, checks=(check,), trial_overrides=(),
                       **{**settings, **over})


def evaluate(number: int) -> tuple[bool, str]:
    if number == 13:
        return _mutation_suite()
    desc, check, settings = CRITERIA[number]
    r = run_sweep(_config(check, settings)).results[check]
    detail = f"{desc}: {r.passed} passed, {r.failed} failed, max violation {r.max_violation:.3g}"
    if r.failed:
        detail += f"; first counterexample {r.counterexamples[0]}"
    return r.failed == 0 and r.passed > 0, detail


def _mutation_suite() -> tuple[bool, str]:
    missed = []
    for number, (_, check, settings) in CRITERIA.items():
        module, name = MUTATION_TARGETS[check]
        trials = 2 if check == "mismatch4" else MUTATION_TRIALS
        with mutated(module, name, 1e-3):
            r = run_sweep(_config(check, settings, trials=trials)).results[check]
        if r.failed == 0:
            missed.append(f"{number}:{module}.{name}")
    detail = f"perturbation by +1e-3 detected by {len(CRITERIA) - len(missed)}/{len(CRITERIA)} checks"
    if missed:
        detail += f"; undetected: {missed}"
    return not missed, detail


def _line(number: int, ok: bool, detail: str) -> str:
    return f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("number", list(CRITERIA) + [13])
def test_criterion(number, capsys):
    ok, detail = evaluate(number)
    with capsys.disabled():
        print("\n" + _line(number, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [(n, *evaluate(n)) for n in list(CRITERIA) + [13]]
    for n, ok, detail in results:
        print(_line(n, ok, detail))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
