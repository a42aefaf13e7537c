"""Deterministic text formatting shared by trace serializers and the CLI."""

from __future__ import annotations


def f17(value) -> str:
    """Float at 17 significant digits; empty string for None."""
    if value is None:
        return ""
    return f"{float(value):.17g}"


def fbool(value) -> str:
    if value is None:
        return ""
    return "true" if value else "false"
