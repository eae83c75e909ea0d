"""Verifiable local arithmetic for a formal-group tower at p, plus the
finite combinatorics that sits next to it: Coates-Wiles style derivatives,
anticyclotomic character sums, an explicit reciprocity pairing, lattice and
trace-relation bookkeeping, cyclic-group cohomology, and small-characteristic
curve counts.  Everything is computed at tracked finite precision with
independently checkable certificates.
"""

__version__ = "0.1.0"
