"""Automorphism groups of polarized Jacobians from period matrices."""

__version__ = "0.1.0"
