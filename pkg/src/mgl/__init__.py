"""Proof-checking and normalization kernel for a mixed graded/linear logic.

The kernel validates sequent-calculus (GS/MS) and natural-deduction (GT/MT)
derivations over a pluggable preordered semiring of grades, eliminates cuts,
translates proofs between the two presentations while preserving the proof
term, and decides a small equational theory on derivations.
"""
from __future__ import annotations

__version__ = "0.1.0"
