"""Round trips between the command line and the library."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from neguess.bounds import check_theorem3, redundancy
from neguess.cli import format_value, main
from neguess.entropy import (
    clne,
    lne_diag,
    relative_ab,
    relative_ab_cond,
    renyi,
    shannon,
)
from neguess.guessing import mismatched_strategy, optimal_strategy, q_moment
from neguess.minimax import SourceFamily, solve_minimax
from neguess.oracles import grid_minimax
from neguess.pmf import NEParams, load_json


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return {
        "u2": write("u2.json", {"probs": [0.5, 0.5]}),
        "p": write("p.json", {"labels": ["a", "b", "c"], "probs": [0.2, 0.5, 0.3]}),
        "q": write("q.json", {"labels": ["a", "b", "c"], "probs": [0.45, 0.35, 0.2]}),
        "j": write("j.json", {"x_labels": ["a", "b"], "y_labels": ["u", "v"],
                              "probs": [[0.4, 0.1], [0.2, 0.3]]}),
        "k": write("k.json", {"x_labels": ["a", "b"], "y_labels": ["u", "v"],
                              "probs": [[0.1, 0.3], [0.35, 0.25]]}),
        "zero": write("zero.json", {"probs": [0.5, 0.0]}),
        "bad": write("bad.json", "not an object"),
        "fam": write("fam.json", {"members": [{"probs": [0.8, 0.2]}, {"probs": [0.2, 0.8]}]}),
        "strategy": write("s.json", {"ranks": [[3, 1, 2]]}),
        "dir": str(tmp_path),
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestFormatting:
    def test_twelve_significant_digits(self):
        assert format_value(math.log(2)) == "0.693147180560"
        assert format_value(12.5) == "12.5000000000"
        assert format_value(0.0) == "0.00000000000"


class TestEntropyCommand:
    def test_shannon_uniform(self, capsys, files):
        code, out, _ = run(capsys, "entropy", "shannon", files["u2"])
        assert code == 0 and out.strip() == "0.693147180560"

    def test_bits(self, capsys, files):
        _, out, _ = run(capsys, "entropy", "shannon", files["u2"], "--bits")
        assert out.strip() == "1.00000000000"

    def test_relab_exact_round_trip(self, capsys, files):
        code, out, _ = run(capsys, "entropy", "relab", files["p"], files["q"],
                           "--alpha", 0.5, "--beta", 2, "--exact")
        lib = relative_ab(load_json(files["p"]), load_json(files["q"]), (0.5, 2.0))
        assert code == 0 and float(out) == lib

    def test_relab_printed_digits(self, capsys, files):
        _, out, _ = run(capsys, "entropy", "relab", files["p"], files["q"],
                        "--alpha", 0.5, "--beta", 2)
        lib = relative_ab(load_json(files["p"]), load_json(files["q"]), (0.5, 2.0))
        assert out.strip() == format_value(lib)

    def test_relab_cond_from_q_rho(self, capsys, files):
        _, out, _ = run(capsys, "entropy", "relab-cond", files["j"], files["k"],
                        "--q", 2, "--rho", 1, "--exact")
        lib = relative_ab_cond(load_json(files["j"]), load_json(files["k"]), (1.0, 2.0))
        assert float(out) == lib

    def test_clne_and_diagonal(self, capsys, files):
        _, out, _ = run(capsys, "entropy", "clne", files["j"], "--alpha", 0.5, "--beta", 2,
                        "--exact")
        assert float(out) == clne(load_json(files["j"]), (0.5, 2.0))
        _, out, _ = run(capsys, "entropy", "lne", files["p"], "--alpha", 2, "--beta", 2,
                        "--exact")
        assert float(out) == lne_diag(load_json(files["p"]), 2.0)

    def test_grid_csv(self, capsys, files):
        code, out, _ = run(capsys, "entropy", "renyi", files["p"],
                           "--grid", "alpha=0.5,2,3", "--exact")
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "alpha,renyi"
        P = load_json(files["p"])
        for line, a in zip(lines[1:], (0.5, 2.0, 3.0)):
            assert float(line.split(",")[1]) == renyi(P, a)

    def test_zero_entry_is_input_error(self, capsys, files):
        code, _, err = run(capsys, "entropy", "shannon", files["zero"])
        assert code == 2 and "NonPositiveWeight" in err

    def test_malformed_and_missing_files(self, capsys, files):
        assert run(capsys, "entropy", "shannon", files["bad"])[0] == 2
        assert run(capsys, "entropy", "shannon", files["dir"] + "/missing.json")[0] == 2

    def test_domain_error_exit_code(self, capsys, files):
        code, _, err = run(capsys, "entropy", "renyi", files["p"], "--alpha", -1)
        assert code == 3 and "NonPositiveOrder" in err
        code, _, err = run(capsys, "entropy", "kl", files["p"], files["u2"])
        assert code == 3 and "AlphabetMismatch" in err

    def test_usage_error(self, capsys, files):
        with pytest.raises(SystemExit) as info:
            main(["entropy", "nonsense", files["p"]])
        assert info.value.code == 2

    def test_shannon_matches_library(self, capsys, files):
        _, out, _ = run(capsys, "entropy", "shannon", files["p"], "--exact")
        assert float(out) == shannon(load_json(files["p"]))


class TestGuessMomentBound:
    def test_guess_decreasing_order(self, capsys, files):
        code, out, _ = run(capsys, "guess", files["p"], "--q", 1)
        assert code == 0
        assert out.strip().splitlines() == ["y,a,b,c", "_,3,1,2"]

    def test_guess_json(self, capsys, files):
        _, out, _ = run(capsys, "guess", files["j"], "--q", 2, "--json")
        d = json.loads(out)
        assert d["ranks"] == optimal_strategy(load_json(files["j"]), 2.0).ranks.tolist()

    def test_moment_round_trip(self, capsys, files):
        _, out, _ = run(capsys, "moment", files["p"], "--q", -1, "--rho", 2, "--exact")
        P = load_json(files["p"])
        assert float(out) == q_moment(optimal_strategy(P, -1.0), P, NEParams(-1.0, 2.0))

    def test_moment_with_strategy_file(self, capsys, files):
        _, out, _ = run(capsys, "moment", files["p"], "--q", 1, "--rho", 1,
                        "--strategy", files["strategy"], "--exact")
        assert float(out) == pytest.approx(0.2 * 3 + 0.5 * 1 + 0.3 * 2, rel=1e-15)

    def test_redundancy_round_trip(self, capsys, files):
        _, out, _ = run(capsys, "redundancy", files["p"], "--q", 1, "--rho", 1,
                        "--reference", files["q"], "--exact")
        P, Q = load_json(files["p"]), load_json(files["q"])
        assert float(out) == redundancy(P, mismatched_strategy(Q, 1.0), NEParams(1.0, 1.0))

    def test_bound_rows(self, capsys, files):
        code, out, _ = run(capsys, "bound", files["j"], "--q", "0.5,2", "--rho", "1")
        lines = out.strip().splitlines()
        assert code == 0 and len(lines) == 3
        header = lines[0].split(",")
        row = dict(zip(header, lines[2].split(",")))
        rep = check_theorem3(load_json(files["j"]), NEParams(2.0, 1.0))
        assert float(row["moment"]) == rep.moment
        assert float(row["upper"]) == rep.upper

    def test_bound_m3(self, capsys, files):
        code, out, _ = run(capsys, "bound", files["p"], "--theorem", "M3_redundancy",
                           "--q", "1", "--rho", "0.5,2", "--strategy", files["strategy"])
        assert code == 0 and out.count("M3_redundancy") == 2


class TestMinimaxVerify:
    def test_minimax_json(self, capsys, files, tmp_path):
        out_path = tmp_path / "res.json"
        code, _, _ = run(capsys, "minimax", files["fam"], "--q", 1, "--rho", 1,
                         "-o", out_path)
        d = json.loads(out_path.read_text())
        assert code == 0 and d["converged"]
        fam = SourceFamily.from_dict(json.loads(Path(files["fam"]).read_text()))
        assert d["c_value"] == solve_minimax(fam, NEParams(1.0, 1.0)).c_value
        assert abs(d["c_value"] - grid_minimax(fam, NEParams(1.0, 1.0), 1e-4)) < 1e-6
        np.testing.assert_allclose(d["q_star"]["probs"], [[0.5, 0.5]], atol=1e-6)

    def test_minimax_nonconvergence(self, capsys, files):
        code, out, err = run(capsys, "minimax", files["fam"], "--q", 1, "--rho", 1,
                             "--max-iter", 2, "--restarts", 0)
        assert code == 5 and "NonConvergence" in err
        assert json.loads(out)["converged"] is False

    def test_minimax_negative_q(self, capsys, files):
        code, _, err = run(capsys, "minimax", files["fam"], "--q", -1, "--rho", 1)
        assert code == 3 and "NonPositiveQ" in err

    def test_verify_passes(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 3, "alphabet_sizes": [2, 3, 4],
                                   "checks": ["theorem1", "theorem3", "lne_identity"]}))
        csv_path, summary = tmp_path / "rows.csv", tmp_path / "summary.json"
        code, out, _ = run(capsys, "verify", cfg, "--csv", csv_path, "--summary", summary,
                           "--quiet")
        assert code == 0 and out.count("PASS") == 3
        assert json.loads(summary.read_text())["failures"] == 0
        assert csv_path.read_text().startswith("theorem_id,q,rho")

    def test_verify_failure_exit_code(self, capsys):
        code, out, _ = run(capsys, "verify", "--trials", 2, "--checks", "rho0_identity",
                           "--quiet")
        assert code == 4 and "FAIL rho0_identity" in out

    def test_verify_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 0}))
        code, _, err = run(capsys, "verify", cfg)
        assert code == 3 and "InvalidConfig" in err
