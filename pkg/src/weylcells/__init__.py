"""Exact verification library for Weyl-group, building, and special-representation combinatorics.

The package is organized in layers:

- ``coxeter``: the finite Weyl group of type A (permutations), word identities.
- ``indexsets``: integer interval boxes and their partition identities.
- ``exactfield``: exact arithmetic in F_q(t) with its t-adic valuation.
- ``cells``: Bruhat cells over the residue field, Iwasawa normal form over K.
- ``building``: lattice classes, pointed cells, and the simplicial building.
- ``spmodel``: integer cell-function model of the special representations.
- ``harmonic``: harmonicity checkers and boundary-measure cochains (rank 1).
- ``cli``: batch verification front end.
"""

__version__ = "0.1.0"
