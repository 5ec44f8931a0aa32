"""Kneser neighbours, Hecke spectra and Arthur-parameter predictions for
even unimodular lattices over small quadratic fields."""

__version__ = "0.1.0"
