"""Certify the operating point from model probabilities and from sampled runs.

    python3 scripts/operating_point.py [--reps 5] [--n-rounds 1000000]

Prints H_min, S*, and the AEP/EAT rates at N = 1e7 for the noiseless model,
then the mean and 1-sigma spread of the same quantities over seeded
repetitions of the simulated experiment.
"""

import argparse

from sdiqrng.finitesize import FiniteSizeParams
from sdiqrng.photonics import DetectorConfig, SourceConfig, event_probabilities, overlaps_from_amplitudes
from sdiqrng.report import certify
from sdiqrng.simulator import RunConfig, aggregate, simulate

KEYS = ("hmin", "s_star", "aep", "eat", "extractable_per_round")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--n-rounds", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eta", type=float, default=0.94)
    args = ap.parse_args()

    src, det = SourceConfig(0.4, 0.66, 0.66), DetectorConfig(eta=args.eta, p_dc=1e-6)
    overlaps = overlaps_from_amplitudes(src)
    rep = certify(event_probabilities(src, det), overlaps, FiniteSizeParams(1e7))
    print("model probabilities, N = 1e7")
    for k in KEYS:
        print(f"  {k:22s} {getattr(rep, k):.6f}")
    print(f"  {'a_bound':22s} {rep.a_bound:.6f}")

    record = simulate(RunConfig(src, det, args.n_rounds, args.seed, args.reps))
    rows = []
    for i in range(args.reps):
        r = certify(record.stats(i), overlaps, FiniteSizeParams(args.n_rounds))
        rows.append({k: getattr(r, k) for k in KEYS})
    print(f"sampled, N = {args.n_rounds:g} per repetition, {args.reps} repetitions")
    if args.reps > 1:
        for k, (mean, std) in aggregate(rows).items():
            print(f"  {k:22s} {mean:.6f} +- {std:.6f}")
    else:
        for k, v in rows[0].items():
            print(f"  {k:22s} {v:.6f}")


if __name__ == "__main__":
    main()
