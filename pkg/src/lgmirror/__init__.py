"""Affine Landau-Ginzburg mirror toolkit.

Builds affine mirror models from gauged linear sigma model charge data,
solves and classifies their critical loci, extracts vanishing-cycle
intersection matrices by tracking fiberwise branch points, counts SU(2)
character-variety solutions for the associated surface groups, and computes
Hom ranks between spherical objects on nodal degenerate fibers.
"""

__version__ = "0.1.0"
