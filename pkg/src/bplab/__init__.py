"""Local spectral machinery for Bessel-model averages on GSp(4)."""

__version__ = "0.1.0"
