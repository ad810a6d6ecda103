"""Verification laboratory for information thermodynamics of Maxwell-demon engines."""

__version__ = "0.1.0"
