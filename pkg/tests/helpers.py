"""Shared derivation fixtures used across the test modules."""
from __future__ import annotations

from mgl.sc_checker import SCDeriv
from mgl.syntax import GAtom


def promotion_sc_deriv() -> SCDeriv:
    """x @ 6 : X ; |- Grd[2] (x,x) : Grd[2](X >< X), with 6 = 2*(1+1 raised to 3).

    Pairs a hypothesis with itself, contracts the two copies (grade 2),
    raises the grade to 3, then promotes under Grd[2].  The raise makes the
    derivation valid only in semirings whose order is not discrete.
    """
    x_ty = GAtom("X")
    pair = SCDeriv("><R", (), (SCDeriv("id_GS", ("x", x_ty)), SCDeriv("id_GS", ("y", x_ty))))
    merged = SCDeriv("cont_GS", (0,), (pair,))
    raised = SCDeriv("sub_GS", ((3,),), (merged,))
    return SCDeriv("Grd_R", (2,), (raised,))


def promotion_sc_deriv_no_sub() -> SCDeriv:
    """Same shape without the grade raise: checks in every semiring, grade 4."""
    x_ty = GAtom("X")
    pair = SCDeriv("><R", (), (SCDeriv("id_GS", ("x", x_ty)), SCDeriv("id_GS", ("y", x_ty))))
    merged = SCDeriv("cont_GS", (0,), (pair,))
    return SCDeriv("Grd_R", (2,), (merged,))
