import numpy as np

from epidemic_game.verification import SUITES, SuiteResult, run_suites


def test_suite_result_keeps_smallest_counterexample():
    r = SuiteResult("x")
    r.fail((4, 2), {"size": "big"})
    r.fail((2, 9), {"size": "small"})
    r.fail((3, 0), {"size": "mid"})
    assert r.failures == 3 and r.counterexample == {"size": "small"} and not r.passed


def test_all_suites_pass_small():
    res = run_suites(seed=1, cases=6)
    assert [r.name for r in res] == list(SUITES)
    assert all(r.passed for r in res), [r.to_dict() for r in res if not r.passed]


def test_zero_cases_is_vacuous_with_warning():
    res = run_suites(seed=1, cases=0)
    assert all(r.passed and r.cases == 0 and "vacuous" in r.warning for r in res)


def test_fault_injection_caught():
    res = run_suites(seed=42, cases=40, expiry_slack=1, names=["ds_public", "ds_private"])
    for r in res:
        assert not r.passed and r.counterexample is not None


def test_suites_deterministic():
    a = SUITES["truncation"](np.random.default_rng(9), 10).to_dict()
    b = SUITES["truncation"](np.random.default_rng(9), 10).to_dict()
    assert a == b
