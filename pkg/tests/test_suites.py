"""Suite machinery: reports, reduced-parameter runs and worker independence."""

import json

import pytest

from hurwitz_kernel import suites
from hurwitz_kernel.suites import Check, SuiteReport, make_rng


def test_check_records_first_counterexample_lazily():
    c = Check("x", "anchor")
    calls = []
    c.record(True, lambda: calls.append(1))
    assert c.passed and not calls
    c.record(False, lambda: {"k": 1})
    c.record(False, lambda: {"k": 2})
    assert not c.passed and c.failures == 2 and c.counterexample == {"k": 1}
    assert not Check("empty", "a").passed


def test_report_json_shape():
    r = SuiteReport("demo", {"p": 1})
    r.add("a", "first").record(True)
    out = r.to_json()
    assert out["rng"] == suites.RNG_ALGORITHM
    assert out["passed"] and out["checks"][0]["name"] == "a"
    json.dumps(out)


def test_rng_depends_on_seed_and_label():
    assert make_rng(1, "x").random() == make_rng(1, "x").random()
    assert make_rng(1, "x").random() != make_rng(2, "x").random()
    assert make_rng(1, "x").random() != make_rng(1, "y").random()


SMALL = {
    "hurwitz": dict(levels=(1, 3), trials=4),
    "interp": dict(levels=(1, 3), trials=4, crt_levels=(2,)),
    "rota-baxter": dict(levels=(2,), lambdas=("0", "1"), trials=4),
    "comonad": dict(levels=(2, 3), trials=3),
    "coalgebra": dict(levels=(1, 2), bialgebra_bound=4, xi_levels=(2,), normalize_trials=5),
    "species": dict(bounds=(2,), pairs=1, character_bound=2, subset_bound=2),
    "doldkan": dict(instances=("fi_sharp", "simplicial"), bound=2, presheaves=1, chain_bound=2),
    "bridge": dict(bound=2, trials=2),
}


@pytest.mark.parametrize("name", sorted(suites.SUITES))
def test_small_runs_pass_and_are_deterministic(name):
    fn = suites.SUITES[name]
    first = fn(seed=3, **SMALL[name]).to_json()
    assert first["passed"], [c for c in first["checks"] if not c["passed"]]
    assert all(c["trials"] > 0 for c in first["checks"])
    assert len({c["name"] for c in first["checks"]}) == len(first["checks"])
    assert fn(seed=3, **SMALL[name]).to_json() == first


@pytest.mark.parametrize("name", ["hurwitz", "species", "doldkan"])
def test_worker_count_does_not_change_reports(name):
    fn = suites.SUITES[name]
    serial = fn(seed=5, workers=1, **SMALL[name]).to_json()
    pooled = fn(seed=5, workers=2, **SMALL[name]).to_json()
    assert json.dumps(serial, sort_keys=True) == json.dumps(pooled, sort_keys=True)


def test_doldkan_suite_validates_plan():
    with pytest.raises(ValueError):
        suites.suite_doldkan(instances=("globular",))
    with pytest.raises(ValueError):
        suites.suite_doldkan(instances=("fi_sharp",), bound=8)
