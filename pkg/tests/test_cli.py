"""Command-line front end: examples, exit codes, formats and determinism."""

import json
import subprocess
import sys

import pytest

from hurwitz_kernel import suites
from hurwitz_kernel.cli import main, run
from hurwitz_kernel.hurwitz import theta


def ok_json(argv):
    code, text = run(argv)
    assert code == 0, text
    return json.loads(text)


def scalars_of(series_json):
    return [row[0] for row in series_json["coeffs"]]


def test_verify_hurwitz_lists_twelve_identities():
    out = ok_json(["verify", "hurwitz", "--level", "6", "--lambda", "1", "--seed", "7"])
    assert out["passed"] and out["seed"] == 7
    assert len(out["checks"]) == 12
    assert all(c["anchor"] for c in out["checks"])
    assert out["rng"]


def test_verify_doldkan_instance():
    out = ok_json(["verify", "doldkan", "--instance", "fi_sharp", "--bound", "3"])
    assert out["passed"]


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "hurwitz", "--lambda", "1/0"],
        ["hurwitz", "mul", "--a", "1,2", "--b", "1,2,3"],
        ["hurwitz", "mul", "--a", "1,x"],
        ["verify", "doldkan", "--bound", "9"],
        ["verify", "doldkan", "--lambda", "1"],
        ["verify", "hurwitz", "--ctx", "quaternions"],
        ["verify", "comonad", "--level", "7"],
        ["interp", "psi", "--a", "1,0,0,1;0,1,0,0", "--ctx", "mat2"],
        ["doldkan", "gamma", "--bound", "7"],
        ["species", "tensor", "--weight", "-1"],
    ],
)
def test_config_errors_exit_two(argv):
    code, text = run(argv)
    assert code == 2
    assert text.startswith("error:")


def test_argparse_errors_exit_two(capsys):
    assert main(["verify", "doldkan", "--instance", "globular"]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_threads_env_validated(monkeypatch):
    monkeypatch.setenv("HURWITZ_KERNEL_THREADS", "zero")
    assert run(["hurwitz", "mul", "--a", "1"])[0] == 2
    monkeypatch.setenv("HURWITZ_KERNEL_THREADS", "0")
    assert run(["verify", "interp", "--level", "2"])[0] == 2


def test_failed_identity_exits_one_with_counterexample(monkeypatch):
    # swap in a wrong transform: theta agrees with gamma only at weight 1
    monkeypatch.setattr(suites, "gamma", lambda a, lam: theta(a))
    code, text = run(["verify", "hurwitz", "--level", "3", "--lambda", "2", "--ctx", "rat", "--trials", "3"])
    assert code == 1
    out = json.loads(text)
    assert not out["passed"]
    bad = [c for c in out["checks"] if not c["passed"]]
    assert bad and all("counterexample" in c for c in bad)
    assert bad[0]["counterexample"]["lam"] == "2"


def test_computation_examples():
    out = ok_json(["hurwitz", "mul", "--a", "0,1,0", "--b", "0,1,0", "--lambda", "1"])
    assert scalars_of(out["product"]) == ["0", "1", "2"]
    out = ok_json(["interp", "phi", "--a", "0,1,0"])
    assert scalars_of(out["values"]) == ["0", "1", "2"]
    out = ok_json(["species", "ranks", "--m", "1,1,1", "--n", "1,1,1", "--weight", "1", "--as-printed"])
    assert out["ranks"] == [1, 3, 9] and out["as_printed"] == [1, 3, 6]
    out = ok_json(["doldkan", "tensor", "--bound", "4", "--presheaf", "trivial:1,1,1,1,1", "--presheaf2", "trivial:1,1,1,1,1"])
    assert out["tensor_ranks"] == [1, 3, 9, 27, 81] and out["matches_engine"]
    out = ok_json(["coalg", "show", "--kind", "C", "--lambda", "2", "--level", "1"])
    assert out["coalgebra"]["counit"] == ["1", "0"]


@pytest.mark.parametrize(
    "argv",
    [
        ["hurwitz", "transform", "--a", "1,2,3", "--kind", "theta_bar"],
        ["hurwitz", "verify", "--a", "1,2,3", "--b", "3,0,1", "--lambda", "-1"],
        ["interp", "check-triangle", "--a", "1,2,3"],
        ["interp", "interpolate", "--a", "4,1,5"],
        ["coalg", "quotient", "--kind", "D", "--level", "3"],
        ["coalg", "convolve", "--kind", "C", "--lambda", "1", "--level", "2", "--a", "1,1,1", "--b", "1,1,1"],
        ["coalg", "show", "--kind", "xi", "--lambda", "3", "--level", "2"],
        ["species", "tensor", "--bound", "3", "--left", "random", "--right", "sign", "--weight", "2"],
        ["species", "transform", "--bound", "3", "--left", "trivial"],
        ["species", "character", "--bound", "3", "--left", "sign", "--sigma", "1,0,2"],
        ["doldkan", "gamma", "--instance", "simplicial", "--bound", "2"],
        ["doldkan", "n", "--instance", "cube", "--bound", "2"],
        ["doldkan", "roundtrip", "--instance", "fo_sharp", "--bound", "3"],
    ],
)
def test_every_verb_runs(argv):
    for fmt in ("json", "csv", "pretty"):
        code, text = run(argv + ["--format", fmt])
        assert code == 0, text
        assert text.strip()


def test_classify_example():
    data = {"labels": ["e", "d'"], "counit": ["1", "3"], "point": 0,
            "comult": [[[0, 0, "1"]], [[0, 0, "42"], [0, 1, "-14"], [1, 0, "-14"], [1, 1, "5"]]]}
    out = ok_json(["coalg", "classify", "--coalgebra", json.dumps(data)])
    assert out["lambda"] == "5"


def test_csv_and_pretty_for_suites():
    code, text = run(["verify", "bridge", "--bound", "2", "--trials", "1", "--format", "csv"])
    assert code == 0
    assert text.splitlines()[0] == "suite,name,passed,trials,failures,anchor"
    code, text = run(["verify", "bridge", "--bound", "2", "--trials", "1", "--format", "pretty"])
    assert code == 0 and text.startswith("suite bridge: PASS")


def test_output_is_byte_identical(monkeypatch):
    argv = ["verify", "species", "--bound", "3", "--weight", "2", "--seed", "11"]
    first = run(argv)
    monkeypatch.setenv("HURWITZ_KERNEL_THREADS", "3")
    second = run(argv)
    assert first == second
    a = run(["doldkan", "tensor", "--bound", "2", "--seed", "4"])
    b = run(["doldkan", "tensor", "--bound", "2", "--seed", "4"])
    assert a == b and a[0] == 0


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "hurwitz_kernel.cli", "verify", "interp", "--level", "3", "--format", "pretty"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("suite interp: PASS")
    proc = subprocess.run(
        [sys.executable, "-m", "hurwitz_kernel.cli", "verify", "hurwitz", "--lambda", "1/0"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 2 and proc.stderr.startswith("error:") and not proc.stdout


@pytest.mark.parametrize("suite", ["hurwitz", "interp", "rota-baxter", "comonad", "coalgebra"])
def test_smallest_level_has_no_vacuous_failures(suite):
    argv = ["verify", suite, "--level", "1"]
    if suite != "coalgebra":
        argv += ["--trials", "2"]
    out = ok_json(argv)
    assert all(c["trials"] > 0 for c in out["checks"])
