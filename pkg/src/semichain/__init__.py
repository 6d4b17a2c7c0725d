"""Lattice dynamics constrained by semigroup word problems.

Simulation and exact-analysis toolkit for one-dimensional bistochastic
brickwork dynamics whose allowed moves are the relations of a finitely
presented semigroup: slow-thermalization models built on the
exponential-growth two-generator group, its iterated variant, star- and
chiral-star-Motzkin semigroups, and the pair-flip chain, together with
exhaustive small-system oracles for sectors, areas, and mixing times.
"""

__version__ = "0.1.0"

from .models import MODELS, get_model  # noqa: F401
