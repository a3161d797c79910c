"""Constructive one-variable potential theory: atomisation, pole neutralisation, Bergman regularisation."""

__version__ = "0.1.0"
