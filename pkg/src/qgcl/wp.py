"""Weakest-precondition semantics.

The weakest precondition of an observable M under a program with Kraus
family {E_k} is ``sum_k E_k† M E_k``: the adjoint family applied in reverse.
It is dual to forward evaluation, ``tr(wp(M) rho) = tr(M [[P]](rho))`` for
every state, and extends to all operators by linearity.
"""

from __future__ import annotations

from . import linalg
from .errors import ContractError
from .ovf import SuperOperator
from .program import Program
from .registers import Observable
from .semantics import denote


def wp(
    p: Program,
    *,
    tol: float = linalg.DEFAULT_TOL,
    max_dim: int = linalg.MAX_DIM_DEFAULT,
) -> SuperOperator:
    """Predicate transformer of a program as a Kraus family.

    The family consists of the adjoints of the forward channel's operators;
    it satisfies ``sum E E† <= I`` rather than the forward trace bound.
    """
    forward = denote(p, tol=tol, max_dim=max_dim)
    return SuperOperator(forward.layout, tuple(linalg.dagger(e) for e in forward.kraus))


def wp_apply(
    p: Program,
    m: Observable,
    *,
    tol: float = linalg.DEFAULT_TOL,
    max_dim: int = linalg.MAX_DIM_DEFAULT,
) -> Observable:
    """Weakest precondition of an observable with respect to a program."""
    m.validate(tol)
    transformer = wp(p, tol=tol, max_dim=max_dim)
    if not m.layout.same_variables(transformer.layout):
        raise ContractError(
            "observable must be given over exactly the program's quantum variables"
        )
    aligned = m.permuted_to(transformer.layout)
    out = transformer(aligned.matrix)
    result = Observable(out, transformer.layout)
    return result.permuted_to(m.layout)
