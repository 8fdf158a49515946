"""Computational free probability: free Lévy bases, triplet calculus and random-matrix checks."""

__version__ = "0.1.0"
