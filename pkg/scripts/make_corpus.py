"""Build the regression corpus of statistics tables used by the ordering checks.

Each entry stores a table, the overlap bounds, Eve's dimension, the round
count for finite-size terms and the certified values at generation time.

    python3 scripts/make_corpus.py [--out tests/data/corpus.json]
"""

import argparse
import json
import math
from pathlib import Path

from sdiqrng.finitesize import FiniteSizeParams
from sdiqrng.photonics import DetectorConfig, SourceConfig, event_probabilities, overlaps_from_amplitudes
from sdiqrng.qstates import OverlapBounds, equiprobable_theta, overlaps_of, qubit_ensemble, stats_from_povm, usd_povm
from sdiqrng.report import CertifyOptions, certify
from sdiqrng.simulator import RunConfig, simulate
from sdiqrng.stats import ConditionalStats

ROOT = Path(__file__).resolve().parents[1]


def model_entry(name, src, det, n_rounds=1e7):
    return {"name": name, "probs": event_probabilities(src, det).probs.tolist(),
            "overlaps": list(overlaps_from_amplitudes(src).as_tuple()), "dim": 3,
            "n_rounds": n_rounds}


def sampled_entry(name, cfg, rep=0):
    rec = simulate(cfg)
    stats = rec.stats(rep)
    return {"name": name, "probs": stats.probs.tolist(),
            "overlaps": list(overlaps_from_amplitudes(cfg.src).as_tuple()), "dim": 3,
            "n_rounds": float(cfg.n_rounds)}


def usd_qubit_entry():
    phi = math.acos(0.5)
    ens = qubit_ensemble(phi, equiprobable_theta(phi))
    probs = stats_from_povm(ens, usd_povm(phi).elements)
    return {"name": "usd-qubit-equiprobable", "probs": probs.tolist(),
            "overlaps": list(overlaps_of(ens).as_tuple()), "dim": 2, "n_rounds": 1e7}


def entries():
    det = DetectorConfig()
    out = [model_entry("operating-point", SourceConfig(), det)]
    for a, b in ((0.3, 0.5), (0.5, 0.7), (0.6, 0.8), (0.2, 0.9), (0.4, 1.0)):
        out.append(model_entry(f"model-a{a}-b{b}", SourceConfig(a, b, b), det))
    out.append(model_entry("lossy-noisy", SourceConfig(), DetectorConfig(eta=0.8, p_dc=1e-4)))
    out.append(model_entry("asymmetric-beta", SourceConfig(0.4, 0.6, 0.7), det))
    for seed in (0, 1):
        out.append(sampled_entry(f"sampled-seed{seed}", RunConfig(n_rounds=10**6, seed=seed)))
    out.append(sampled_entry("sampled-jitter", RunConfig(n_rounds=10**6, seed=5, repetitions=2,
                                                         jitter=0.02), rep=1))
    out.append(usd_qubit_entry())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "tests" / "data" / "corpus.json"))
    args = ap.parse_args()
    corpus = []
    for e in entries():
        rep = certify(ConditionalStats(e["probs"]), OverlapBounds(*e["overlaps"]),
                      FiniteSizeParams(e["n_rounds"]), CertifyOptions(dim=e["dim"]))
        e["expected"] = {"hmin": rep.hmin, "s_star": rep.s_star, "aep": rep.aep, "eat": rep.eat}
        print(f"{e['name']:28s} hmin={rep.hmin:.6f} s*={rep.s_star:.6f} "
              f"aep={rep.aep:.6f} eat={rep.eat:.6f}")
        corpus.append(e)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(corpus, indent=1) + "\n")


if __name__ == "__main__":
    main()
