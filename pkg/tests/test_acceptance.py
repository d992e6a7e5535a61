"""The eight acceptance criteria, each run once at its stated parameters.

Every criterion prints one ``criterion N: PASS|FAIL`` line; under pytest the
lines are also collected into the terminal summary.  Run this file directly
(``python3 tests/test_acceptance.py``) to get just the eight lines.
"""

import os
import sys
import time

import pytest

from hurwitz_kernel import suites

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = {}


def _workers() -> int:
    return max(1, int(os.environ.get("HURWITZ_KERNEL_THREADS", "1")))


def _criterion_1():
    r = suites.suite_hurwitz(workers=_workers())
    assert r.params["levels"] == list(range(1, 9)) and r.params["trials"] == 200
    assert r.params["lambdas"] == ["0", "1", "2", "-1", "1/2"]
    assert r.params["ctxs"] == ["rat", "mat2", "poly3"]
    return r, "1..8 x {0,1,2,-1,1/2} x {Q, M2, Q[y]/y^3}, 200 pairs each"


def _criterion_2():
    r = suites.suite_interp()
    assert r.params["crt_levels"] == list(range(1, 7))
    return r, "psi multiplicative, phi o psi = theta, phi invertible, CRT at l <= 6"


def _criterion_3():
    r = suites.suite_rota_baxter()
    names = {c.name for c in r.checks}
    assert {"rb_bar_identity", "rb_tilde_identity", "gamma_intertwines", "gamma_transported_operator"} <= names
    return r, "zero, gamma-transported and constraint-solved operators; gamma o Pbar = Ptilde o gamma"


def _criterion_4():
    r = suites.suite_comonad()
    assert max(r.params["levels"]) == 6
    return r, "comonad laws, gamma squares and cofree lifts at truncation <= 6"


def _criterion_5():
    r = suites.suite_coalgebra()
    assert r.params["levels"] == [1, 2, 3, 4, 5] and r.params["bialgebra_bound"] == 8
    assert r.params["normalize_trials"] == 100
    return r, "C(lam)_l, D_l for l <= 5 two ways, bialgebra to degree 8, convolution, xi, 100 normalizations"


def _criterion_6():
    r = suites.suite_species(workers=_workers())
    assert r.params["bounds"] == [0, 1, 2, 3, 4, 5] and r.params["weights"] == [0, 1, 2]
    assert r.params["character_bound"] == 4 and r.params["subset_bound"] == 5
    return r, "tensor ranks bound <= 5, g in {0,1,2}; characters n <= 4; subset coalgebra N <= 5"


def _criterion_7():
    r = suites.suite_doldkan(workers=_workers())
    assert r.params["instances"] == ["fi_sharp@4", "fo_sharp@4", "cube@3", "simplicial@3"]
    assert r.params["chain_bound"] == 5
    return r, "fi_sharp@4, fo_sharp@4, cube@3, simplicial@3; chain counts n <= 5"


def _criterion_8():
    r = suites.suite_bridge()
    assert r.params["bound"] == 4 and r.params["instance"] == "fi_sharp"
    return r, "fi_sharp tensor ranks = weight-1 Hurwitz = [C(1)_l, Q] convolution, bound 4"


CRITERIA = [_criterion_1, _criterion_2, _criterion_3, _criterion_4, _criterion_5, _criterion_6, _criterion_7, _criterion_8]


def evaluate(k: int) -> tuple:
    start = time.perf_counter()
    report, what = CRITERIA[k - 1]()
    elapsed = time.perf_counter() - start
    trials = sum(c.trials for c in report.checks)
    failed = [c.name for c in report.checks if not c.passed]
    status = "PASS" if report.passed else "FAIL"
    line = f"criterion {k}: {status}  [{report.suite}] {len(report.checks)} checks, {trials} trials, {elapsed:.1f}s  ({what})"
    if failed:
        line += f"  failed: {', '.join(failed)}"
    return report, line


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k):
    report, line = evaluate(k)
    ACCEPTANCE_LINES[k] = line
    print(line)
    bad = {c.name: c.counterexample for c in report.checks if not c.passed}
    assert report.passed, bad


if __name__ == "__main__":
    ok = True
    for k in range(1, 9):
        report, line = evaluate(k)
        print(line, flush=True)
        ok = ok and report.passed
    sys.exit(0 if ok else 1)
