"""Provably optimal decomposition of unitaries into native gate sequences via MIP."""

__version__ = "0.1.0"
