"""Residue recursions on genus-0 spectral covers, with exact and
arbitrary-precision arithmetic, matrix-series reconstruction, and the
equivalence checks tying the two together."""

__version__ = "0.1.0"
