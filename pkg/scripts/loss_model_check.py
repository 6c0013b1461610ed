"""Compare the two readings of the detector loss at the operating point.

    python3 scripts/loss_model_check.py

The event model dims each time bin as exp(-eta mu^2).  Applying the
transmission once more (exp(-eta^2 mu^2), i.e. an effective efficiency
eta^2) is the alternative reading.  The script certifies both and prints
them next to the reference values 1.11 (H_min), 1.322 (AEP) and 1.319 (EAT).
"""

from sdiqrng.finitesize import FiniteSizeParams
from sdiqrng.photonics import DetectorConfig, SourceConfig, event_probabilities, overlaps_from_amplitudes
from sdiqrng.report import certify

REFERENCE = {"hmin": 1.11, "aep": 1.322, "eat": 1.319}


def main():
    src = SourceConfig(0.4, 0.66, 0.66)
    overlaps = overlaps_from_amplitudes(src)
    print(f"{'loss model':24s} {'H_min':>8s} {'S*':>8s} {'AEP':>8s} {'EAT':>8s}")
    print(f"{'reference':24s} {REFERENCE['hmin']:8.4f} {'':8s} {REFERENCE['aep']:8.4f} "
          f"{REFERENCE['eat']:8.4f}")
    for name, eta in (("exp(-eta mu^2)", 0.94), ("exp(-eta^2 mu^2)", 0.94**2)):
        det = DetectorConfig(eta=eta, p_dc=1e-6)
        rep = certify(event_probabilities(src, det), overlaps, FiniteSizeParams(1e7))
        print(f"{name:24s} {rep.hmin:8.4f} {rep.s_star:8.4f} {rep.aep:8.4f} {rep.eat:8.4f}")


if __name__ == "__main__":
    main()
