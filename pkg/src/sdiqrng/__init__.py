"""Semi-device-independent randomness certification for a three-state prepare-and-measure QRNG."""

__version__ = "0.1.0"
