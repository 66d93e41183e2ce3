"""Cascaded relaxation of a driven, dissipative dipolar spin pair."""

__version__ = "0.1.0"
