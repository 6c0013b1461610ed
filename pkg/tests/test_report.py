import json
from pathlib import Path

import pytest

from sdiqrng.finitesize import FiniteSizeParams
from sdiqrng.qstates import OverlapBounds
from sdiqrng.report import CertifyOptions, certify, ensemble_for
from sdiqrng.stats import ConditionalStats

CORPUS = {e["name"]: e for e in json.loads(
    (Path(__file__).parent / "data" / "corpus.json").read_text())}


@pytest.mark.parametrize("name", ["operating-point", "sampled-seed0", "lossy-noisy"])
def test_corpus_values_reproduce(name):
    e = CORPUS[name]
    rep = certify(ConditionalStats(e["probs"]), OverlapBounds(*e["overlaps"]),
                  FiniteSizeParams(e["n_rounds"]), CertifyOptions(dim=e["dim"]))
    for key, value in e["expected"].items():
        assert getattr(rep, key) == pytest.approx(value, abs=1e-6), key


def test_report_fields():
    e = CORPUS["operating-point"]
    opts = CertifyOptions(m=2)
    opts.seesaw.restarts = 1
    rep = certify(ConditionalStats(e["probs"]), OverlapBounds(*e["overlaps"]),
                  FiniteSizeParams(1e7), opts)
    doc = rep.as_dict()
    assert set(doc["checks"]) == {"s_star_ge_hmin", "aep_le_s_star", "eat_le_s_star"}
    assert doc["a_bound"] == pytest.approx(0.65286, abs=1e-5)
    assert doc["diagnostics"]["restarts"] == 1
    assert doc["epsilon_total"] == pytest.approx(5e-8)
    # m = 2 is too coarse to sit above H_min at this point
    assert not rep.ordering_ok()["s_star_ge_hmin"]


def test_qubit_entry_a_bound():
    e = CORPUS["usd-qubit-equiprobable"]
    opts = CertifyOptions(dim=2, m=2)
    opts.seesaw.restarts = 1
    rep = certify(ConditionalStats(e["probs"]), OverlapBounds(*e["overlaps"]),
                  FiniteSizeParams(1e7), opts)
    # (d02^2 + d12^2 - 2 d01 d02 d12) / (1 - d01^2) with d01 = 1/2, d02 = d12 = 1/sqrt 2
    assert rep.a_bound == pytest.approx(2 / 3, abs=1e-12)


def test_ensemble_for_dimensions():
    d = OverlapBounds(0.8, 0.7, 0.7)
    assert ensemble_for(d, 3).dim == 3
    with pytest.raises(ValueError):
        ensemble_for(d, 4)
