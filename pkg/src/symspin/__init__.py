"""Numerical and exact verification toolkit for symplectic spinors.

Modules: fock (Hermite-basis operators), weyl (exact Weyl and Clifford
algebras), forms, osp (osp(1|2) and the decomposition of spinor-valued
forms), curvature, flat (constant-coefficient operators on the flat model),
hodge (Hilbert-module complexes), weights (sp(2n) weights and the
first-order operator classifier) and cli.
"""

__version__ = "0.1.0"
