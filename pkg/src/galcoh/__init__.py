"""Galois cohomology of elliptic-curve torsion modules, computed on explicit matrix groups."""
