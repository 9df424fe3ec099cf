"""Adapter service exposing models behind the toolkit's JSON wire protocol."""

__version__ = "0.1.0"
