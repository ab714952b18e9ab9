"""End-to-end checks of the command-line front end and artifact serializer.

Commands run in-process through main(argv) so exit codes and artifacts can be
asserted without subprocess overhead.  A shared session directory carries one
certified construction through construct -> verify -> semigroup.
"""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from jamison import IndexSequence, build_construction
from jamison.cli import main, thread_cap
from jamison.errors import ArtifactCorrupt, ConfigInvalid
from jamison.serialize import (
    decimal_string,
    fraction_from_string,
    load_construction,
    load_sequence,
    save_construction,
    save_sequence,
)


def read_report(out_dir):
    return json.loads((Path(out_dir) / "report.json").read_text())


def strip_timestamp(payload: dict) -> str:
    clean = dict(payload)
    clean.pop("timestamp")
    return json.dumps(clean, sort_keys=True)


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    """Sequence files plus one certified construction built through the CLI."""
    d = tmp_path_factory.mktemp("cli")
    save_sequence(IndexSequence.factorials(6), d / "fact6.json")
    save_sequence(IndexSequence.integers_up_to(100), d / "ints100.json")
    terms = IndexSequence.factorials(6).terms
    save_sequence(
        IndexSequence((1.0,) + tuple(n + 0.5 for n in terms[1:]), "real"),
        d / "half.json",
    )
    rc = main([
        "construct", "--sequence", str(d / "fact6.json"),
        "--levels", "5", "--fibers", "2", "--weights", "linear",
        "--horizon", "6", "--out", str(d / "C.json"),
        "--out-dir", str(d / "construct"),
    ])
    assert rc == 0
    return d


# --- serializer ------------------------------------------------------------------


def test_sequence_save_load_round_trip(tmp_path):
    seq = IndexSequence((1, 3, 7, 20), "integer")
    save_sequence(seq, tmp_path / "s.json")
    back = load_sequence(tmp_path / "s.json")
    assert back.terms == seq.terms and back.kind == "integer"


def test_load_sequence_rejects_junk(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigInvalid):
        load_sequence(tmp_path / "bad.json")
    (tmp_path / "list.json").write_text("[1, 2]")
    with pytest.raises(ConfigInvalid):
        load_sequence(tmp_path / "list.json")


def test_construction_round_trip_tables_identical(workdir):
    cons, fibers = load_construction(workdir / "C.json")
    seq = load_sequence(workdir / "fact6.json")
    rebuilt = build_construction(seq, L=5, K=6, w=tuple(float(l) for l in range(1, 6)))
    assert fibers == 2
    assert cons.gaps == rebuilt.gaps
    assert cons.alphas1 == rebuilt.alphas1
    assert [p.theta for p in cons.lambdas] == [p.theta for p in rebuilt.lambdas]
    assert cons.certified


def test_stored_thetas_have_exact_and_decimal_forms(workdir):
    obj = json.loads((workdir / "C.json").read_text())
    assert len(obj["thetas_decimal"]) == 5
    for exact, dec in zip(obj["thetas"], obj["thetas_decimal"]):
        frac = fraction_from_string(exact)
        # the 30-digit rendering re-parses to the angle within its own rounding
        assert abs(Fraction(dec) - frac) <= Fraction(1, 10**28)


def test_decimal_string_has_thirty_significant_digits():
    text = decimal_string(Fraction(1, 3))
    digits = text.replace("0.", "")
    assert len(digits) == 30
    assert set(digits) == {"3"}


def test_fraction_from_string_rejects_junk():
    with pytest.raises(ConfigInvalid):
        fraction_from_string("1/0")
    with pytest.raises(ConfigInvalid):
        fraction_from_string("elephant")


def test_tampered_gap_table_is_caught(workdir, tmp_path):
    obj = json.loads((workdir / "C.json").read_text())
    obj["gaps"][0] *= 1.0000001
    (tmp_path / "tam.json").write_text(json.dumps(obj))
    with pytest.raises(ArtifactCorrupt):
        load_construction(tmp_path / "tam.json")


def test_tampered_certified_flag_is_caught(workdir, tmp_path):
    obj = json.loads((workdir / "C.json").read_text())
    obj["certified"] = False
    (tmp_path / "tam.json").write_text(json.dumps(obj))
    with pytest.raises(ArtifactCorrupt):
        load_construction(tmp_path / "tam.json")


# --- analyze ---------------------------------------------------------------------


def test_analyze_factorials_reports_vanishing(workdir, tmp_path, capsys):
    rc = main([
        "analyze", "--sequence", str(workdir / "fact6.json"),
        "--horizons", "4,5,6", "--resolution", "1e-5",
        "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["command"] == "analyze"
    assert report["classification"]["verdict"] == "VANISHING"
    lines = (tmp_path / "decay.csv").read_text().splitlines()
    assert lines[0] == "K,epsilon_hat_torus,epsilon_hat_chord,witness_theta"
    assert len(lines) == 4
    assert "VANISHING" in capsys.readouterr().out


def test_analyze_integers_reports_separated(workdir, tmp_path):
    rc = main([
        "analyze", "--sequence", str(workdir / "ints100.json"),
        "--horizons", "10,50,100", "--resolution", "1e-5",
        "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["classification"]["verdict"] == "SEPARATED"
    floors = [r["epsilon_hat_torus"] for r in report["classification"]["reports"]]
    assert all(f >= 0.30 for f in floors)


def test_analyze_bad_horizon_list_is_config_error(workdir, tmp_path, capsys):
    rc = main([
        "analyze", "--sequence", str(workdir / "fact6.json"),
        "--horizons", "4,five,6", "--out-dir", str(tmp_path),
    ])
    assert rc == 1
    assert "config error" in capsys.readouterr().err


# --- construct -------------------------------------------------------------------


def test_construct_writes_certified_artifact(workdir):
    report = read_report(workdir / "construct")
    assert report["status"] == "certified"
    assert report["construction"]["certified"] is True
    assert (workdir / "C.json").exists()


def test_construct_on_integers_exits_infeasible(workdir, tmp_path, capsys):
    rc = main([
        "construct", "--sequence", str(workdir / "ints100.json"),
        "--levels", "5", "--weights", "linear",
        "--out", str(tmp_path / "X.json"), "--out-dir", str(tmp_path),
    ])
    assert rc == 3
    report = read_report(tmp_path)
    assert report["status"] == "infeasible"
    assert report["level"] <= 3
    assert "infeasible" in capsys.readouterr().err
    assert not (tmp_path / "X.json").exists()


def test_construct_weight_file(workdir, tmp_path):
    (tmp_path / "w.json").write_text("[1.0, 2.0, 3.0, 4.0, 5.0]")
    rc = main([
        "construct", "--sequence", str(workdir / "fact6.json"),
        "--levels", "5", "--weights", str(tmp_path / "w.json"),
        "--horizon", "6", "--out", str(tmp_path / "C.json"),
        "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    obj = json.loads((tmp_path / "C.json").read_text())
    assert obj["weights"] == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_construct_bad_weight_file_is_config_error(workdir, tmp_path):
    (tmp_path / "w.json").write_text("{\"w\": 1}")
    rc = main([
        "construct", "--sequence", str(workdir / "fact6.json"),
        "--levels", "5", "--weights", str(tmp_path / "w.json"),
        "--out", str(tmp_path / "C.json"), "--out-dir", str(tmp_path),
    ])
    assert rc == 1


# --- verify ----------------------------------------------------------------------


def test_verify_certified_construction(workdir, tmp_path):
    rc = main([
        "verify", "--construction", str(workdir / "C.json"),
        "--p", "2", "--powers", "6", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["report"]["all_ok"] is True
    lines = (tmp_path / "powers.csv").read_text().splitlines()
    assert lines[0] == "k,n_k,norm_diff,norm_T,analytic_bound"
    assert len(lines) == 7


def test_verify_powers_beyond_horizon_is_config_error(workdir, tmp_path):
    rc = main([
        "verify", "--construction", str(workdir / "C.json"),
        "--powers", "99", "--out-dir", str(tmp_path),
    ])
    assert rc == 1


def test_verify_tampered_artifact_exits_two(workdir, tmp_path, capsys):
    obj = json.loads((workdir / "C.json").read_text())
    obj["alphas_fiber1"][0] *= 1.0000001
    (tmp_path / "tam.json").write_text(json.dumps(obj))
    rc = main([
        "verify", "--construction", str(tmp_path / "tam.json"),
        "--powers", "6", "--out-dir", str(tmp_path),
    ])
    assert rc == 2
    assert "integrity" in capsys.readouterr().err


def test_verify_uncertified_construction_is_config_error(workdir, tmp_path):
    from jamison.construction import ShiftConstruction

    seq = load_sequence(workdir / "fact6.json")
    cons = ShiftConstruction.from_parameters(
        seq,
        [Fraction(1, 23), Fraction(1, 31), Fraction(1, 41)],
        (1.0, 2.0, 3.0),
        horizon=6,
    )
    assert not cons.certified
    save_construction(cons, tmp_path / "U.json")
    rc = main([
        "verify", "--construction", str(tmp_path / "U.json"),
        "--powers", "3", "--out-dir", str(tmp_path),
    ])
    assert rc == 1


# --- semigroup -------------------------------------------------------------------


def test_semigroup_lift_and_bounded(workdir, tmp_path):
    rc = main([
        "semigroup", "--construction", str(workdir / "C.json"),
        "--real-sequence", str(workdir / "half.json"),
        "--powers", "6", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert all(report["checks"].values())
    assert report["lift"]["lattice"]["all_ok"] is True
    assert report["lift"]["spectrum"]["all_ok"] is True
    assert report["bounded"]["all_ok"] is True
    lines = (tmp_path / "generator.csv").read_text().splitlines()
    assert lines[0] == "row,col,re,im"
    dim = report["lift"]["semigroup"]["dim"]
    assert len(lines) == 1 + dim * dim


def test_semigroup_without_real_sequence(workdir, tmp_path):
    rc = main([
        "semigroup", "--construction", str(workdir / "C.json"),
        "--powers", "6", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert "bounded" not in report
    assert "bounded" not in report["checks"]


# --- starnorm --------------------------------------------------------------------


def test_starnorm_bound_mode(workdir, tmp_path):
    rc = main([
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "bound", "--J", "1", "--K", "6", "--seed", "0",
        "--count", "2", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["result"]["all_ok"] is True
    assert report["result"]["max_ratio"] <= 5.0 * (1.0 + 1e-6)
    lines = (tmp_path / "translation.csv").read_text().splitlines()
    assert lines[0] == "sample,k,n_k,shifted_norm,reference_norm,ratio,asserted,ok"
    assert len(lines) == 1 + 4 * 6


def test_starnorm_pairs_mode(workdir, tmp_path):
    rc = main([
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "pairs", "--J", "2", "--K", "5", "--seed", "1",
        "--count", "2", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert all(p["all_ok"] for p in report["result"]["pairs"])
    lines = (tmp_path / "pairs.csv").read_text().splitlines()
    assert lines[0] == "eta,xi,j,value,bound,method,ok"
    assert len(lines) == 1 + 2 * 3


def test_starnorm_field_mode(workdir, tmp_path):
    rc = main([
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "field", "--J", "1", "--K", "5", "--seed", "2",
        "--count", "4", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["result"]["all_ok"] is True
    lines = (tmp_path / "field.csv").read_text().splitlines()
    assert lines[0] == "eta,xi,base,d_metric,star_searched,star_upper,ratio"
    assert len(lines) == 1 + 6  # 4 choose 2 pairs


def test_starnorm_rejects_bad_count(workdir, tmp_path):
    rc = main([
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "field", "--count", "1", "--out-dir", str(tmp_path),
    ])
    assert rc == 1


# --- report ----------------------------------------------------------------------


def test_report_indexes_artifacts(workdir, tmp_path):
    rc = main([
        "verify", "--construction", str(workdir / "C.json"),
        "--p", "1", "--powers", "4", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    (tmp_path / "C.json").write_text((workdir / "C.json").read_text())
    (tmp_path / "broken.json").write_text("{oops")
    rc = main(["report", "--out-dir", str(tmp_path)])
    assert rc == 0
    report = read_report(tmp_path)
    files = {a["file"]: a for a in report["artifacts"]}
    assert files["C.json"]["summary"]["certified"] is True
    assert files["broken.json"]["readable"] is False
    assert "powers.csv" in report["csv_tables"]


def test_report_on_missing_dir_is_config_error(tmp_path):
    rc = main(["report", "--out-dir", str(tmp_path / "nowhere")])
    assert rc == 1


# --- exit codes and determinism ----------------------------------------------------


def test_unknown_flag_exits_one(capsys):
    assert main(["analyze", "--nope"]) == 1
    assert "config error" in capsys.readouterr().err


def test_unknown_command_exits_one():
    assert main(["frobnicate"]) == 1


def test_missing_input_file_exits_one(tmp_path):
    assert main(["analyze", "--sequence", str(tmp_path / "none.json")]) == 1


def test_thread_cap_validation(monkeypatch):
    monkeypatch.delenv("JAMISON_THREADS", raising=False)
    assert thread_cap() == 1
    monkeypatch.setenv("JAMISON_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("JAMISON_THREADS", "zero")
    with pytest.raises(ConfigInvalid):
        thread_cap()
    monkeypatch.setenv("JAMISON_THREADS", "0")
    with pytest.raises(ConfigInvalid):
        thread_cap()


def test_bad_thread_env_fails_any_command(workdir, tmp_path, monkeypatch):
    monkeypatch.setenv("JAMISON_THREADS", "many")
    rc = main([
        "analyze", "--sequence", str(workdir / "fact6.json"),
        "--horizons", "4,5,6", "--out-dir", str(tmp_path),
    ])
    assert rc == 1


def test_reports_deterministic_modulo_timestamp(workdir, tmp_path, monkeypatch):
    args = [
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "pairs", "--J", "1", "--K", "5", "--seed", "7", "--count", "2",
    ]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    monkeypatch.setenv("JAMISON_THREADS", "3")
    assert main(args + ["--out-dir", str(tmp_path / "c")]) == 0
    a = strip_timestamp(read_report(tmp_path / "a"))
    b = strip_timestamp(read_report(tmp_path / "b"))
    c = strip_timestamp(read_report(tmp_path / "c"))
    # out-dir is not part of the payload, so all three agree exactly
    assert a == b == c
    csv_a = (tmp_path / "a" / "pairs.csv").read_text()
    assert csv_a == (tmp_path / "b" / "pairs.csv").read_text()
    assert csv_a == (tmp_path / "c" / "pairs.csv").read_text()


def test_different_seed_changes_samples(workdir, tmp_path):
    base = [
        "starnorm", "--sequence", str(workdir / "fact6.json"),
        "--mode", "pairs", "--J", "1", "--K", "5", "--count", "2",
    ]
    assert main(base + ["--seed", "1", "--out-dir", str(tmp_path / "a")]) == 0
    assert main(base + ["--seed", "2", "--out-dir", str(tmp_path / "b")]) == 0
    a = read_report(tmp_path / "a")["result"]["pairs"]
    b = read_report(tmp_path / "b")["result"]["pairs"]
    assert [p["eta"] for p in a] != [p["eta"] for p in b]
