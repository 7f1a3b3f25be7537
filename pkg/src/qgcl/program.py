"""Abstract syntax of guarded-command quantum programs.

Programs are immutable trees.  Quantum variables appear as (name, dimension)
pairs so a program is self-contained; classical variables range over the
integers and record measurement outcomes.  ``well_formed`` collects the side
conditions each construct must satisfy; evaluation assumes they hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import Diagnostic, LayoutError, SourceError, Span
from .registers import QVar, RegisterLayout


@dataclass(eq=False)
class Measurement:
    """Complete quantum measurement: integer outcomes to operators M_m with
    sum_m M_m† M_m = I."""

    operators: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        ops = tuple(
            sorted(
                ((int(m), linalg.as_matrix(op)) for m, op in self.operators),
                key=lambda pair: pair[0],
            )
        )
        outcomes = [m for m, _ in ops]
        if len(set(outcomes)) != len(outcomes):
            raise LayoutError(f"duplicate measurement outcomes {outcomes}")
        self.operators = ops

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.operators)

    def operator(self, outcome: int) -> np.ndarray:
        for m, op in self.operators:
            if m == outcome:
                return op
        raise KeyError(outcome)

    @property
    def dim(self) -> int:
        return self.operators[0][1].shape[0]

    def is_complete(self, tol: float = linalg.DEFAULT_TOL) -> bool:
        d = self.dim
        total = sum(linalg.dagger(op) @ op for _, op in self.operators)
        return linalg.max_abs_diff(total, linalg.identity(d)) <= tol

    @staticmethod
    def computational(dim: int) -> "Measurement":
        ops = []
        for m in range(dim):
            k = linalg.basis_ket(dim, m)
            ops.append((m, k @ linalg.dagger(k)))
        return Measurement(tuple(ops))


@dataclass(eq=False)
class GuardBasis:
    """Orthonormal guard states, stored as the columns of a square matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = linalg.as_matrix(self.matrix)

    @property
    def arity(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i : i + 1]

    def is_orthonormal(self, tol: float = linalg.DEFAULT_TOL) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1] and linalg.is_unitary(
            self.matrix, tol
        )

    def is_computational(self, tol: float = 0.0) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1] and bool(
            np.all(self.matrix == linalg.identity(self.dim))
        )

    @staticmethod
    def computational(dim: int) -> "GuardBasis":
        return GuardBasis(linalg.identity(dim))


@dataclass(frozen=True, eq=False)
class Program:
    span: Span | None = field(default=None, repr=False, kw_only=True)


@dataclass(frozen=True, eq=False)
class Abort(Program):
    pass


@dataclass(frozen=True, eq=False)
class Skip(Program):
    pass


@dataclass(frozen=True, eq=False)
class Unitary(Program):
    qvars: tuple[QVar, ...]
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class Measure(Program):
    """Measure ``qvars``, store the outcome in classical ``x``, then run the
    branch selected by the outcome."""

    x: str
    qvars: tuple[QVar, ...]
    measurement: Measurement
    branches: tuple[tuple[int, "Program"], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda kv: kv[0])))

    def branch(self, outcome: int) -> "Program":
        for m, p in self.branches:
            if m == outcome:
                return p
        raise KeyError(outcome)


@dataclass(frozen=True, eq=False)
class Guarded(Program):
    """Quantum guarded command: fresh guard variables, one branch per basis
    state, branch order follows basis-column order."""

    qvars: tuple[QVar, ...]
    basis: GuardBasis
    branches: tuple["Program", ...]


@dataclass(frozen=True, eq=False)
class Seq(Program):
    first: "Program"
    second: "Program"


@dataclass(frozen=True, eq=False)
class Block(Program):
    """Local quantum variables initialised to a density operator."""

    qvars: tuple[QVar, ...]
    init: np.ndarray
    body: "Program"


@dataclass(frozen=True, eq=False)
class ProbChoice(Program):
    weights: tuple[float, ...]
    branches: tuple["Program", ...]


@dataclass(frozen=True, eq=False)
class QChoice(Program):
    """Coin program followed by a guarded command over the coin's variables."""

    coin: "Program"
    basis: GuardBasis
    branches: tuple["Program", ...]


@dataclass(frozen=True, eq=False)
class Name(Program):
    """Program name with a-priori variable sets; no executable semantics."""

    ident: str
    quantum: tuple[QVar, ...] = ()
    classical: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class Mu(Program):
    """Recursion binder; only bounded unrollings are executable."""

    ident: str
    body: "Program"
    quantum: tuple[QVar, ...] = ()
    classical: tuple[str, ...] = ()


def var(p: Program) -> frozenset[str]:
    """Classical variables of a program."""
    if isinstance(p, (Abort, Skip, Unitary)):
        return frozenset()
    if isinstance(p, Measure):
        out = frozenset((p.x,))
        for _, sub in p.branches:
            out |= var(sub)
        return out
    if isinstance(p, (Guarded, ProbChoice)):
        return frozenset().union(*(var(b) for b in p.branches)) if p.branches else frozenset()
    if isinstance(p, Seq):
        return var(p.first) | var(p.second)
    if isinstance(p, Block):
        return var(p.body)
    if isinstance(p, QChoice):
        return var(p.coin) | (
            frozenset().union(*(var(b) for b in p.branches)) if p.branches else frozenset()
        )
    if isinstance(p, (Name, Mu)):
        return frozenset(p.classical)
    raise TypeError(f"unknown program node {type(p).__name__}")


def qvar_layout(p: Program) -> RegisterLayout:
    """Quantum variables of a program as an ordered layout.

    Order is first occurrence in a left-to-right traversal, which fixes the
    tensor-factor order used by the semantics.  A variable used with two
    different dimensions raises :class:`LayoutError`.
    """
    out = RegisterLayout()
    if isinstance(p, (Abort, Skip)):
        return out
    if isinstance(p, Unitary):
        return out.extended(RegisterLayout(p.qvars))
    if isinstance(p, Measure):
        out = out.extended(RegisterLayout(p.qvars))
        for _, sub in p.branches:
            out = out.extended(qvar_layout(sub))
        return out
    if isinstance(p, Guarded):
        out = out.extended(RegisterLayout(p.qvars))
        for b in p.branches:
            out = out.extended(qvar_layout(b))
        return out
    if isinstance(p, Seq):
        return qvar_layout(p.first).extended(qvar_layout(p.second))
    if isinstance(p, Block):
        inner = qvar_layout(p.body)
        RegisterLayout(p.qvars)  # validates the local declarations themselves
        return inner.remove(n for n, _ in p.qvars)
    if isinstance(p, ProbChoice):
        for b in p.branches:
            out = out.extended(qvar_layout(b))
        return out
    if isinstance(p, QChoice):
        out = qvar_layout(p.coin)
        for b in p.branches:
            out = out.extended(qvar_layout(b))
        return out
    if isinstance(p, (Name, Mu)):
        return RegisterLayout(p.quantum)
    raise TypeError(f"unknown program node {type(p).__name__}")


def qvar(p: Program) -> frozenset[str]:
    return frozenset(qvar_layout(p).names)


def desugar_qchoice(p: QChoice) -> Seq:
    """Quantum choice as coin followed by the guarded command."""
    guard_vars = tuple(qvar_layout(p.coin).variables)
    return Seq(p.coin, Guarded(guard_vars, p.basis, p.branches), span=p.span)


def desugar(p: Program) -> Program:
    """Replace every quantum choice by its sequential form."""
    if isinstance(p, (Abort, Skip, Unitary, Name)):
        return p
    if isinstance(p, Measure):
        return Measure(
            p.x,
            p.qvars,
            p.measurement,
            tuple((m, desugar(sub)) for m, sub in p.branches),
            span=p.span,
        )
    if isinstance(p, Guarded):
        return Guarded(p.qvars, p.basis, tuple(desugar(b) for b in p.branches), span=p.span)
    if isinstance(p, Seq):
        return Seq(desugar(p.first), desugar(p.second), span=p.span)
    if isinstance(p, Block):
        return Block(p.qvars, p.init, desugar(p.body), span=p.span)
    if isinstance(p, ProbChoice):
        return ProbChoice(p.weights, tuple(desugar(b) for b in p.branches), span=p.span)
    if isinstance(p, QChoice):
        return desugar(desugar_qchoice(QChoice(desugar(p.coin), p.basis, tuple(desugar(b) for b in p.branches), span=p.span)))
    if isinstance(p, Mu):
        return Mu(p.ident, desugar(p.body), p.quantum, p.classical, span=p.span)
    raise TypeError(f"unknown program node {type(p).__name__}")


def is_core(p: Program) -> bool:
    """True when the program uses only the measurement-and-guard core (quantum
    choice counts: it desugars into the core)."""
    if isinstance(p, (Abort, Skip, Unitary)):
        return True
    if isinstance(p, Measure):
        return all(is_core(sub) for _, sub in p.branches)
    if isinstance(p, Guarded):
        return all(is_core(b) for b in p.branches)
    if isinstance(p, Seq):
        return is_core(p.first) and is_core(p.second)
    if isinstance(p, QChoice):
        return is_core(p.coin) and all(is_core(b) for b in p.branches)
    return False


def ast_equal(a: Program, b: Program) -> bool:
    """Structural equality; matrices compare entrywise, spans are ignored."""
    if type(a) is not type(b):
        return False
    if isinstance(a, (Abort, Skip)):
        return True
    if isinstance(a, Unitary):
        return a.qvars == b.qvars and np.array_equal(a.matrix, b.matrix)
    if isinstance(a, Measure):
        if a.x != b.x or a.qvars != b.qvars:
            return False
        if a.measurement.outcomes != b.measurement.outcomes:
            return False
        for (m, op1), (_, op2) in zip(a.measurement.operators, b.measurement.operators):
            if not np.array_equal(op1, op2):
                return False
        if len(a.branches) != len(b.branches):
            return False
        return all(
            m1 == m2 and ast_equal(p1, p2)
            for (m1, p1), (m2, p2) in zip(a.branches, b.branches)
        )
    if isinstance(a, Guarded):
        return (
            a.qvars == b.qvars
            and np.array_equal(a.basis.matrix, b.basis.matrix)
            and len(a.branches) == len(b.branches)
            and all(ast_equal(x, y) for x, y in zip(a.branches, b.branches))
        )
    if isinstance(a, Seq):
        return ast_equal(a.first, b.first) and ast_equal(a.second, b.second)
    if isinstance(a, Block):
        return (
            a.qvars == b.qvars
            and np.array_equal(a.init, b.init)
            and ast_equal(a.body, b.body)
        )
    if isinstance(a, ProbChoice):
        return (
            a.weights == b.weights
            and len(a.branches) == len(b.branches)
            and all(ast_equal(x, y) for x, y in zip(a.branches, b.branches))
        )
    if isinstance(a, QChoice):
        return (
            ast_equal(a.coin, b.coin)
            and np.array_equal(a.basis.matrix, b.basis.matrix)
            and len(a.branches) == len(b.branches)
            and all(ast_equal(x, y) for x, y in zip(a.branches, b.branches))
        )
    if isinstance(a, Name):
        return a.ident == b.ident and a.quantum == b.quantum and a.classical == b.classical
    if isinstance(a, Mu):
        return (
            a.ident == b.ident
            and a.quantum == b.quantum
            and a.classical == b.classical
            and ast_equal(a.body, b.body)
        )
    raise TypeError(f"unknown program node {type(a).__name__}")


def _diag(code: str, message: str, node: Program) -> Diagnostic:
    return Diagnostic(code, message, node.span)


def well_formed(p: Program, tol: float = linalg.DEFAULT_TOL) -> list[Diagnostic]:
    """All violated side conditions, empty when the program is well-formed."""
    out: list[Diagnostic] = []
    _check_dims_consistent(p, {}, out)
    _well_formed_rec(p, tol, out)
    return out


def check(p: Program, tol: float = linalg.DEFAULT_TOL) -> Program:
    """Raise :class:`SourceError` unless the program is well-formed."""
    diags = well_formed(p, tol)
    if diags:
        raise SourceError(diags)
    return p


def _check_dims_consistent(p: Program, seen: dict[str, int], out: list[Diagnostic]) -> None:
    declared: tuple[QVar, ...] = ()
    if isinstance(p, (Unitary, Measure, Guarded, Block)):
        declared = p.qvars
    elif isinstance(p, (Name, Mu)):
        declared = p.quantum
    for name, d in declared:
        if name in seen and seen[name] != d:
            out.append(
                _diag(
                    "dim-conflict",
                    f"quantum variable {name!r} used with dimensions {seen[name]} and {d}",
                    p,
                )
            )
        seen.setdefault(name, d)
    for child in _children(p):
        _check_dims_consistent(child, seen, out)


def _children(p: Program) -> list[Program]:
    if isinstance(p, Measure):
        return [sub for _, sub in p.branches]
    if isinstance(p, (Guarded, ProbChoice)):
        return list(p.branches)
    if isinstance(p, Seq):
        return [p.first, p.second]
    if isinstance(p, Block):
        return [p.body]
    if isinstance(p, QChoice):
        return [p.coin, *p.branches]
    if isinstance(p, Mu):
        return [p.body]
    return []


def _guard_checks(p: Program, qvars: tuple[QVar, ...], basis: GuardBasis,
                  branches: tuple[Program, ...], tol: float, out: list[Diagnostic]) -> None:
    names = [n for n, _ in qvars]
    if len(set(names)) != len(names):
        out.append(_diag("qvar-duplicate", f"repeated guard variable in {names}", p))
        return
    guard_dim = 1
    for _, d in qvars:
        guard_dim *= d
    if not basis.is_orthonormal(tol):
        out.append(_diag("guard-basis", "guard basis columns are not orthonormal", p))
    if basis.dim != guard_dim:
        out.append(
            _diag(
                "guard-basis",
                f"guard basis dimension {basis.dim} does not match guard space {guard_dim}",
                p,
            )
        )
    if basis.arity != len(branches):
        out.append(
            _diag(
                "guard-arity",
                f"{basis.arity} basis states but {len(branches)} branches",
                p,
            )
        )
    try:
        used = frozenset().union(*(qvar(b) for b in branches)) if branches else frozenset()
    except LayoutError:
        used = frozenset()
    overlap = set(names) & used
    if overlap:
        out.append(
            _diag(
                "guard-var-overlap",
                f"guard variables {sorted(overlap)} also occur in a branch",
                p,
            )
        )


def _well_formed_rec(p: Program, tol: float, out: list[Diagnostic]) -> None:
    if isinstance(p, (Abort, Skip, Name)):
        return
    if isinstance(p, Unitary):
        names = [n for n, _ in p.qvars]
        if not p.qvars:
            out.append(_diag("qvar-empty", "unitary statement needs at least one variable", p))
            return
        if len(set(names)) != len(names):
            out.append(_diag("qvar-duplicate", f"repeated quantum variable in {names}", p))
            return
        dim = RegisterLayout(p.qvars).dim
        if p.matrix.shape != (dim, dim):
            out.append(
                _diag(
                    "unitary-shape",
                    f"matrix shape {p.matrix.shape} does not match variables of dimension {dim}",
                    p,
                )
            )
        elif not linalg.is_unitary(p.matrix, tol):
            out.append(_diag("unitary-nonunitary", "matrix is not unitary within tolerance", p))
        return
    if isinstance(p, Measure):
        names = [n for n, _ in p.qvars]
        if not p.qvars:
            out.append(_diag("qvar-empty", "measurement needs at least one variable", p))
            return
        if len(set(names)) != len(names):
            out.append(_diag("qvar-duplicate", f"repeated quantum variable in {names}", p))
            return
        dim = RegisterLayout(p.qvars).dim
        bad_shape = any(op.shape != (dim, dim) for _, op in p.measurement.operators)
        if bad_shape:
            out.append(
                _diag(
                    "measure-op-shape",
                    f"measurement operators must be {dim}x{dim} for these variables",
                    p,
                )
            )
        elif not p.measurement.is_complete(tol):
            out.append(
                _diag("measure-incomplete", "measurement operators do not sum to the identity", p)
            )
        if p.measurement.outcomes != tuple(m for m, _ in p.branches):
            out.append(
                _diag(
                    "measure-branch-outcomes",
                    "branch outcomes do not match the measurement's outcomes",
                    p,
                )
            )
        captured = [sub for _, sub in p.branches if p.x in var(sub)]
        if captured:
            out.append(
                _diag(
                    "measure-var-capture",
                    f"outcome variable {p.x!r} reused inside a branch",
                    p,
                )
            )
        for _, sub in p.branches:
            _well_formed_rec(sub, tol, out)
        return
    if isinstance(p, Guarded):
        _guard_checks(p, p.qvars, p.basis, p.branches, tol, out)
        for b in p.branches:
            _well_formed_rec(b, tol, out)
        return
    if isinstance(p, Seq):
        shared = var(p.first) & var(p.second)
        if shared:
            out.append(
                _diag(
                    "var-reuse",
                    f"classical variables {sorted(shared)} appear on both sides of ';'",
                    p,
                )
            )
        _well_formed_rec(p.first, tol, out)
        _well_formed_rec(p.second, tol, out)
        return
    if isinstance(p, Block):
        names = [n for n, _ in p.qvars]
        if not p.qvars:
            out.append(_diag("block-locals", "block declares no local variables", p))
        elif len(set(names)) != len(names):
            out.append(_diag("qvar-duplicate", f"repeated local variable in {names}", p))
        else:
            try:
                body_vars = qvar(p.body)
            except LayoutError:
                body_vars = frozenset()
            missing = set(names) - body_vars
            if missing:
                out.append(
                    _diag(
                        "block-locals",
                        f"local variables {sorted(missing)} do not occur in the body",
                        p,
                    )
                )
            dim = RegisterLayout(p.qvars).dim
            init = linalg.as_matrix(p.init)
            if init.shape != (dim, dim):
                out.append(
                    _diag(
                        "block-init",
                        f"initial state shape {init.shape} does not match locals of dimension {dim}",
                        p,
                    )
                )
            elif not (
                linalg.is_hermitian(init, tol)
                and linalg.is_positive(init, tol)
                and float(np.trace(init).real) <= 1 + tol
            ):
                out.append(_diag("block-init", "initial state is not a density operator", p))
        _well_formed_rec(p.body, tol, out)
        return
    if isinstance(p, ProbChoice):
        if len(p.weights) != len(p.branches) or not p.branches:
            out.append(
                _diag(
                    "prob-arity",
                    f"{len(p.weights)} weights for {len(p.branches)} branches",
                    p,
                )
            )
        if any(w < 0 for w in p.weights):
            out.append(_diag("prob-weights", "negative branch probability", p))
        elif sum(p.weights) > 1 + tol:
            out.append(
                _diag("prob-weights", f"branch probabilities sum to {sum(p.weights)} > 1", p)
            )
        for b in p.branches:
            _well_formed_rec(b, tol, out)
        return
    if isinstance(p, QChoice):
        try:
            coin_layout = qvar_layout(p.coin)
        except LayoutError:
            coin_layout = RegisterLayout()
        _guard_checks(p, tuple(coin_layout.variables), p.basis, p.branches, tol, out)
        _well_formed_rec(p.coin, tol, out)
        for b in p.branches:
            _well_formed_rec(b, tol, out)
        return
    if isinstance(p, Mu):
        if not var(p.body) <= frozenset(p.classical):
            out.append(
                _diag("mu-scope", "body uses classical variables outside the declared set", p)
            )
        try:
            body_q = qvar(p.body)
        except LayoutError:
            body_q = frozenset()
        if not body_q <= frozenset(n for n, _ in p.quantum):
            out.append(
                _diag("mu-scope", "body uses quantum variables outside the declared set", p)
            )
        _well_formed_rec(p.body, tol, out)
        return
    raise TypeError(f"unknown program node {type(p).__name__}")
