"""Detect likely lottery-ticket discounting from recorded-prize claims."""

__version__ = "0.1.0"
