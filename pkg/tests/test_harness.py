import pytest

from couniv.harness import (
    ANCHORS, DEFAULT_BOUNDS, SUITES, RunConfig, canonical, cyclic_power_chain, record, run_suite, s5_chain,
)
from couniv.neighborhoods import FiniteTable, validate_chain

SMALL = dict(phi_max_len=2, phi_max_letter=4, cert_members=40, cert_transforms=10, greedy_k_max=200,
             chain_k_max=30, word_max_len=1, word_max_letter=5, cont_samples=10, pw_scenarios=5, open_prefix=10)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(suites=["nope"])
    with pytest.raises(ValueError):
        RunConfig(bounds={"nope": 1})
    with pytest.raises(ValueError):
        RunConfig(max_factors=0)
    assert RunConfig(bounds={"depth": 9}).bound("depth") == 9
    assert RunConfig().bound("depth") == DEFAULT_BOUNDS["depth"]


def test_record_anchor_lookup():
    assert record("certs.square", {}, "PASS")["anchor"] == ANCHORS["certs.square"]
    assert record("pw.openness", {}, "PASS")["anchor"] == ANCHORS["pw.openness"]


def test_chains_satisfy_hypotheses():
    table, chain = s5_chain()
    assert len(validate_chain(FiniteTable(table), chain)) == len(chain)
    assert len(cyclic_power_chain(4)) == 5


def test_every_suite_runs_and_passes():
    report = run_suite(RunConfig(groups=["zp2", "symfin", "finite:s3"], bounds=SMALL))
    checks = {r["check"].split(".")[0] for r in report["records"]}
    assert checks == set(SUITES)
    assert report["summary"]["FAIL"] == 0 and report["summary"]["INCONCLUSIVE"] == 0


def test_seed_changes_sampled_records():
    a = run_suite(RunConfig(suites=["continuity", "pw"], groups=["symfin"], seed=1, bounds=SMALL))
    b = run_suite(RunConfig(suites=["continuity", "pw"], groups=["symfin"], seed=2, bounds=SMALL))
    c = run_suite(RunConfig(suites=["continuity", "pw"], groups=["symfin"], seed=1, bounds=SMALL))
    assert canonical(a) == canonical(c)
    assert canonical(a) != canonical(b)


def test_empty_suite_report():
    report = run_suite(RunConfig(suites=[]))
    assert report["records"] == [] and report["summary"]["FAIL"] == 0
