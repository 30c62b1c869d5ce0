"""Binary ramp secret sharing with certified extractors and stochastic affine erasure codes."""

__version__ = "0.1.0"
