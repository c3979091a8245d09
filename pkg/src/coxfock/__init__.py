"""Quasi-multiplicative positive maps on finite Coxeter groups and deformed Fock spaces."""

__version__ = "0.1.0"
