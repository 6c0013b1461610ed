"""Numeric tolerances shared by every module."""

from dataclasses import dataclass


@dataclass
class Tolerances:
    scalar: float = 1e-12       # closed-form identities, overlaps, normalisation
    operator: float = 1e-10     # POVM PSD-ness and completeness
    sdp_psd: float = 1e-9
    sdp_equality: float = 1e-8
    sdp_gap: float = 1e-7


# Mutate attributes (not the binding) to change tolerances globally.
TOL = Tolerances()
