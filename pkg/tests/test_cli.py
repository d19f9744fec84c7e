import json

import pytest

from acast_mc.cli import main
from acast_mc.hk import TF_FORMULA

from conftest import FIXTURES, tiny_source

TINY = str(FIXTURES / "tiny.mdl")
TINY_PRIME = str(FIXTURES / "tiny_prime.mdl")
REPORT_KEYS = {"model", "formula", "coalition", "acast", "verdicts", "overall", "stats"}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip().startswith("{") else out), err


@pytest.fixture
def hk_files(tmp_path, capsys):
    spec, formula = tmp_path / "hk.mdl", tmp_path / "tf.atl"
    code = main(["gen-hk", "--n", "2", "--d", "1", "--c", "2", "--e1", "2", "--e2", "1",
                 "--out", str(spec), "--formula-out", str(formula)])
    capsys.readouterr()
    assert code == 0
    return spec, formula


def test_check_fails_on_tiny(capsys):
    code, report, err = run(capsys, "check", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> F y")
    assert code == 1
    assert REPORT_KEYS <= set(report)
    assert report["overall"] is False and [v["holds"] for v in report["verdicts"]] == [False, False]
    assert set(report["stats"]) == {"states", "game_nodes", "ms"}
    assert "fails" in err


def test_check_holds_on_tiny(capsys):
    code, report, _ = run(capsys, "check", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> G true", "--json")
    assert code == 0 and report["overall"] is True
    assert report["witness"]["replay"]["holds"]


def test_json_flag_silences_summary(capsys):
    _, _, err = run(capsys, "check", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> G true", "--json")
    assert err == ""


def test_report_is_deterministic(capsys):
    argv = ("check", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> F y", "--json")
    _, one, _ = run(capsys, *argv)
    _, two, _ = run(capsys, *argv)
    one["stats"].pop("ms"), two["stats"].pop("ms")
    assert one == two


def test_check_hk_attack(capsys, hk_files, tmp_path):
    spec, formula = hk_files
    assert formula.read_text().strip() == TF_FORMULA
    witness = tmp_path / "w.json"
    code, report, err = run(capsys, "check", str(spec), "--coalition", "P,At", "--formula", str(formula),
                            "--witness", str(witness))
    assert code == 0 and report["overall"] is True
    assert json.loads(witness.read_text())["replay"]["holds"]
    assert "{At}-cast" in err  # inner coalition is only warned about


def test_strict_check_rejects_hk(capsys, hk_files):
    spec, formula = hk_files
    code, report, _ = run(capsys, "check", str(spec), "--coalition", "P,At", "--formula", str(formula), "--strict")
    assert code == 2 and report["stage"] == "acast"


def test_oracle_tiny_prime(capsys):
    code, report, _ = run(capsys, "oracle", TINY_PRIME, "--coalition", "a,b", "--formula-str", "<<a,b>> F y",
                          "--horizon", "4")
    assert code == 0 and report["overall"] is True and report["horizon"] == 4


def test_oracle_refuses_non_absorbing(capsys):
    code, report, err = run(capsys, "oracle", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> F y",
                            "--horizon", "4")
    assert code == 2
    assert "non-absorbing at horizon" in report["error"] and report["stage"] == "oracle"


def test_oracle_matches_check_on_generated_model(capsys, tmp_path):
    from acast_mc.oracle import gen_random_acast

    rm = gen_random_acast(11)
    path = tmp_path / "r.mdl"
    path.write_text(rm.source)
    B = ",".join(rm.coalition)
    for f in [f"<<{B}>> F p0", f"<<{B}>> X p1"]:
        args = (str(path), "--coalition", B, "--formula-str", f, "--json")
        c1, r1, _ = run(capsys, "check", *args)
        c2, r2, _ = run(capsys, "oracle", *args, "--horizon", str(rm.horizon))
        assert c1 == c2 and r1["verdicts"] == r2["verdicts"]


def test_validate(capsys, tmp_path, hk_files):
    code, report, _ = run(capsys, "validate", TINY, "--coalition", "a,b")
    assert code == 0 and report["clean"]
    broken = tmp_path / "broken.mdl"
    broken.write_text(tiny_source().replace("vis(x, b) := true", "vis(x, b) := false"))
    code, report, _ = run(capsys, "validate", str(broken), "--coalition", "a,b")
    assert code == 1
    assert [v["condition"] for v in report["acast"]["violations"]] == ["dagger"]
    code, _, _ = run(capsys, "validate", str(hk_files[0]), "--coalition", "P,At")
    assert code == 0


def test_lemma1(capsys):
    code, report, _ = run(capsys, "lemma1", TINY, "--coalition", "a,b", "--seeds", "100", "--depth", "4")
    assert code == 0 and report["count"] == 0
    code, report, _ = run(capsys, "lemma1", TINY, "--coalition", "a,b", "--seeds", "3", "--depth", "1")
    assert code == 0


def test_lemma1_on_smallest_hk(capsys, tmp_path):
    path = tmp_path / "hk1.mdl"
    assert main(["gen-hk", "--out", str(path)]) == 0
    code, report, _ = run(capsys, "lemma1", str(path), "--coalition", "P,At", "--seeds", "10", "--depth", "4")
    assert code == 0 and report["count"] == 0


def test_expand_dump(capsys):
    code, out, _ = run(capsys, "expand", TINY)
    assert code == 0
    assert out.splitlines()[0] == "# model tiny: 5 states, 10 transitions"


@pytest.mark.parametrize("text,stage", [
    ("model m agent a { vars { y : bool init maybe; } }", "parse"),
    ("model m agent a { vars { y : bool; } commands { command c : true ~> vis(y, a) := false; } }", "validate"),
])
def test_errors_carry_stage(capsys, tmp_path, text, stage):
    path = tmp_path / "bad.mdl"
    path.write_text(text)
    code, report, err = run(capsys, "check", str(path), "--coalition", "a", "--formula-str", "<<a>> X y")
    assert code == 2 and report["stage"] == stage
    assert err.startswith(f"error [{stage}]")


def test_unknown_proposition(capsys):
    code, report, _ = run(capsys, "check", TINY, "--coalition", "a,b", "--formula-str", "<<a,b>> F nope")
    assert code == 2 and report["stage"] == "formula"


def test_missing_file(capsys):
    code, report, _ = run(capsys, "check", "/nonexistent.mdl", "--coalition", "a", "--formula-str", "p")
    assert code == 2 and report["stage"] == "read"


def test_gen_hk_invalid(capsys):
    code, report, _ = run(capsys, "gen-hk", "--n", "1", "--d", "2")
    assert code == 2 and report["stage"] == "args"
