# encoding: utf-8
"""Acoustic unit discovery from untranscribed speech."""

__all__ = ["AudError", "__version__"]

from pyaud.errors import AudError

__version__ = "0.1.0"
