"""Angles-only satellite observation association.

Simulates noisy ground-based streak observations of near-GEO satellites,
learns a pairwise same-object classifier with a from-scratch dense network,
and extracts likely three-observation associations with uniform cost search.
"""

__version__ = "0.1.0"
