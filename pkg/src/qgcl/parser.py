"""Concrete syntax for guarded-command quantum programs.

A source file declares quantum variables, named matrices and measurements,
then gives one program.  Sequencing binds loosest and associates to the
right; arms inside braces are separated by ``;`` and the parser tells an arm
boundary from a sequence by one token of lookahead (a statement never starts
with an integer, ``|`` or ``@``).  Matrices appear by declared name or as
inline JSON records in the shared matrix text format.

    qvar q : 2;
    matrix H = {"rows":2,"cols":2,"entries":[[0.707,0],[0.707,0],[0.707,0],[-0.707,0]]};
    measurement M = { 0: P0; 1: P1 };
    use "gates.json";

    measure x <- M[q] { 0: skip; 1: H[q] }
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import linalg, matrixio
from .errors import Diagnostic, QgclError, SourceError, Span
from .program import (
    Abort,
    Block,
    GuardBasis,
    Guarded,
    Measure,
    Measurement,
    ProbChoice,
    Program,
    QChoice,
    QVar,
    Seq,
    Skip,
    Unitary,
    well_formed,
)

KEYWORDS = {
    "abort",
    "skip",
    "measure",
    "guard",
    "basis",
    "begin",
    "local",
    "end",
    "pchoice",
    "qchoice",
    "qvar",
    "matrix",
    "measurement",
    "use",
}

_PUNCT = ["<-", "->", ":=", "[", "]", "{", "}", "(", ")", ";", ":", ",", "|", ">", "@", "="]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, KEYWORD, INT, FLOAT, STRING, PUNCT, EOF
    text: str
    span: Span
    offset: int


def _error(code: str, message: str, span: Span | None) -> SourceError:
    return SourceError([Diagnostic(code, message, span)])


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def push(kind: str, start: int, end: int, span: Span):
        tokens.append(Token(kind, text[start:end], span, start))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise _error("lex", "unterminated string literal", span)
            push("STRING", i, j + 1, span)
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            push("KEYWORD" if word in KEYWORDS else "IDENT", i, j, span)
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == ".")):
            j = i + 1 if ch == "-" else i
            while j < n and text[j].isdigit():
                j += 1
            is_float = False
            if j < n and text[j] == ".":
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            push("FLOAT" if is_float else "INT", i, j, span)
            col += j - i
            i = j
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched is None:
            raise _error("lex", f"unexpected character {ch!r}", span)
        push("PUNCT", i, i + len(matched), span)
        col += len(matched)
        i += len(matched)
    tokens.append(Token("EOF", "", Span(line, col), n))
    return tokens


def _scan_balanced_json(text: str, start: int, span: Span):
    """Extract one JSON object starting at ``text[start] == '{'``."""
    depth = 0
    i = start
    in_string = False
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                raw = text[start : i + 1]
                try:
                    return json.loads(raw), i + 1
                except json.JSONDecodeError as exc:
                    raise _error("syntax", f"malformed inline matrix: {exc}", span) from exc
        i += 1
    raise _error("syntax", "unterminated inline matrix", span)


@dataclass
class Definitions:
    """Declared quantum variables and named matrices/measurements."""

    qvars: dict[str, int]
    matrices: dict[str, np.ndarray]
    measurements: dict[str, Measurement]


class Parser:
    def __init__(self, text: str, *, base_dir: str = ".", tol: float = linalg.DEFAULT_TOL):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.base_dir = base_dir
        self.tol = tol
        self.defs = Definitions({}, {}, {})

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        idx = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise _error("syntax", f"expected {want!r}, found {tok.text or tok.kind!r}", tok.span)
        return self.advance()

    # -- declarations ------------------------------------------------------

    def parse_source(self) -> Program:
        while self.at("KEYWORD", "qvar") or self.at("KEYWORD", "matrix") or self.at(
            "KEYWORD", "measurement"
        ) or self.at("KEYWORD", "use"):
            self._declaration()
        body = self.parse_program()
        self.expect("EOF")
        return body

    def _declaration(self) -> None:
        tok = self.advance()
        if tok.text == "qvar":
            name = self.expect("IDENT")
            self.expect("PUNCT", ":")
            dim_tok = self.expect("INT")
            dim = int(dim_tok.text)
            if dim < 2:
                raise _error("declaration", f"dimension of {name.text!r} must be at least 2", dim_tok.span)
            if name.text in self.defs.qvars:
                raise _error("declaration", f"quantum variable {name.text!r} declared twice", name.span)
            self.defs.qvars[name.text] = dim
        elif tok.text == "matrix":
            name = self.expect("IDENT")
            self.expect("PUNCT", "=")
            self.defs.matrices[name.text] = self._matrix_ref()
        elif tok.text == "measurement":
            name = self.expect("IDENT")
            self.expect("PUNCT", "=")
            self.defs.measurements[name.text] = self._measurement_literal()
        else:  # use
            path_tok = self.expect("STRING")
            rel = path_tok.text[1:-1]
            path = rel if os.path.isabs(rel) else os.path.join(self.base_dir, rel)
            try:
                loaded = matrixio.load_definitions(path)
            except (OSError, ValueError, QgclError) as exc:
                raise _error("use", f"cannot load definitions from {rel!r}: {exc}", path_tok.span)
            self.defs.matrices.update(loaded)
        self.expect("PUNCT", ";")

    def _matrix_ref(self) -> np.ndarray:
        tok = self.peek()
        if tok.kind == "IDENT":
            self.advance()
            if tok.text not in self.defs.matrices:
                raise _error("unknown-name", f"matrix {tok.text!r} is not declared", tok.span)
            return self.defs.matrices[tok.text]
        if self.at("PUNCT", "{"):
            record, end = _scan_balanced_json(self.text, tok.offset, tok.span)
            while self.peek().kind != "EOF" and self.peek().offset < end:
                self.advance()
            try:
                return matrixio.matrix_from_record(record)
            except Exception as exc:
                raise _error("syntax", f"bad inline matrix: {exc}", tok.span)
        raise _error("syntax", f"expected a matrix name or inline matrix, found {tok.text!r}", tok.span)

    def _measurement_literal(self) -> Measurement:
        self.expect("PUNCT", "{")
        pairs = []
        while True:
            outcome = int(self.expect("INT").text)
            self.expect("PUNCT", ":")
            pairs.append((outcome, self._matrix_ref()))
            if self.at("PUNCT", ";"):
                self.advance()
                continue
            break
        self.expect("PUNCT", "}")
        return Measurement(tuple(pairs))

    def _measurement_ref(self) -> Measurement:
        tok = self.peek()
        if tok.kind == "IDENT":
            self.advance()
            if tok.text not in self.defs.measurements:
                raise _error("unknown-name", f"measurement {tok.text!r} is not declared", tok.span)
            return self.defs.measurements[tok.text]
        if self.at("PUNCT", "{"):
            return self._measurement_literal()
        raise _error("syntax", f"expected a measurement, found {tok.text!r}", tok.span)

    def _qvar_list(self) -> tuple[QVar, ...]:
        out = []
        while True:
            name = self.expect("IDENT")
            if name.text not in self.defs.qvars:
                raise _error(
                    "undeclared-variable", f"quantum variable {name.text!r} is not declared", name.span
                )
            out.append((name.text, self.defs.qvars[name.text]))
            if self.at("PUNCT", ","):
                self.advance()
                continue
            return tuple(out)

    # -- programs ----------------------------------------------------------

    def _starts_statement(self, tok: Token) -> bool:
        if tok.kind == "IDENT":
            return True
        if tok.kind == "PUNCT" and tok.text in ("(", "{"):
            return True
        if tok.kind == "KEYWORD" and tok.text in (
            "abort",
            "skip",
            "measure",
            "guard",
            "begin",
            "pchoice",
            "qchoice",
        ):
            return True
        return False

    def parse_program(self) -> Program:
        first = self.parse_statement()
        if self.at("PUNCT", ";") and self._starts_statement(self.peek(1)):
            span = self.peek().span
            self.advance()
            rest = self.parse_program()
            return Seq(first, rest, span=span)
        return first

    def parse_statement(self) -> Program:
        tok = self.peek()
        if self.at("KEYWORD", "abort"):
            self.advance()
            return Abort(span=tok.span)
        if self.at("KEYWORD", "skip"):
            self.advance()
            return Skip(span=tok.span)
        if self.at("PUNCT", "("):
            self.advance()
            inner = self.parse_program()
            self.expect("PUNCT", ")")
            return inner
        if self.at("KEYWORD", "measure"):
            return self._measure_statement()
        if self.at("KEYWORD", "guard"):
            return self._guard_statement()
        if self.at("KEYWORD", "begin"):
            return self._block_statement()
        if self.at("KEYWORD", "pchoice"):
            return self._pchoice_statement()
        if self.at("KEYWORD", "qchoice"):
            return self._qchoice_statement()
        if tok.kind == "IDENT" or self.at("PUNCT", "{"):
            matrix = self._matrix_ref()
            self.expect("PUNCT", "[")
            qvars = self._qvar_list()
            self.expect("PUNCT", "]")
            return Unitary(qvars, matrix, span=tok.span)
        raise _error("syntax", f"expected a statement, found {tok.text or tok.kind!r}", tok.span)

    def _measure_statement(self) -> Program:
        start = self.expect("KEYWORD", "measure")
        xvar = self.expect("IDENT")
        self.expect("PUNCT", "<-")
        measurement = self._measurement_ref()
        self.expect("PUNCT", "[")
        qvars = self._qvar_list()
        self.expect("PUNCT", "]")
        self.expect("PUNCT", "{")
        branches = []
        while True:
            outcome = int(self.expect("INT").text)
            self.expect("PUNCT", ":")
            branches.append((outcome, self.parse_program()))
            if self.at("PUNCT", ";"):
                self.advance()
                continue
            break
        self.expect("PUNCT", "}")
        seen = [m for m, _ in branches]
        if len(set(seen)) != len(seen):
            raise _error("syntax", f"duplicate measurement arm {seen}", start.span)
        return Measure(xvar.text, qvars, measurement, tuple(branches), span=start.span)

    def _guard_arms(self, arity: int, span: Span) -> tuple[Program, ...]:
        self.expect("PUNCT", "{")
        arms: dict[int, Program] = {}
        while True:
            self.expect("PUNCT", "|")
            idx_tok = self.expect("INT")
            idx = int(idx_tok.text)
            self.expect("PUNCT", ">")
            self.expect("PUNCT", "->")
            if idx in arms:
                raise _error("syntax", f"duplicate guard arm |{idx}>", idx_tok.span)
            arms[idx] = self.parse_program()
            if self.at("PUNCT", ";"):
                self.advance()
                continue
            break
        self.expect("PUNCT", "}")
        if sorted(arms) != list(range(arity)):
            raise _error(
                "guard-arms",
                f"guard arms must enumerate |0>..|{arity - 1}| exactly, got {sorted(arms)}",
                span,
            )
        return tuple(arms[i] for i in range(arity))

    def _guard_statement(self) -> Program:
        start = self.expect("KEYWORD", "guard")
        qvars = self._qvar_list()
        dim = 1
        for _, d in qvars:
            dim *= d
        if self.at("KEYWORD", "basis"):
            self.advance()
            basis = GuardBasis(self._matrix_ref())
        else:
            basis = GuardBasis.computational(dim)
        arity = basis.arity if basis.dim == dim else dim
        branches = self._guard_arms(arity, start.span)
        return Guarded(qvars, basis, branches, span=start.span)

    def _block_statement(self) -> Program:
        start = self.expect("KEYWORD", "begin")
        self.expect("KEYWORD", "local")
        qvars = self._qvar_list()
        self.expect("PUNCT", ":=")
        dim = 1
        for _, d in qvars:
            dim *= d
        if self.at("PUNCT", "|"):
            self.advance()
            idx_tok = self.expect("INT")
            self.expect("PUNCT", ">")
            idx = int(idx_tok.text)
            if not 0 <= idx < dim:
                raise _error(
                    "syntax", f"ket |{idx}> out of range for locals of dimension {dim}", idx_tok.span
                )
            ket = linalg.basis_ket(dim, idx)
            init = ket @ linalg.dagger(ket)
        else:
            init = self._matrix_ref()
        self.expect("PUNCT", ";")
        body = self.parse_program()
        self.expect("KEYWORD", "end")
        return Block(qvars, init, body, span=start.span)

    def _pchoice_statement(self) -> Program:
        start = self.expect("KEYWORD", "pchoice")
        self.expect("PUNCT", "{")
        branches = []
        weights = []
        while True:
            branches.append(self.parse_program())
            self.expect("PUNCT", "@")
            num = self.peek()
            if num.kind not in ("INT", "FLOAT"):
                raise _error("syntax", f"expected a probability, found {num.text!r}", num.span)
            self.advance()
            weights.append(float(num.text))
            if self.at("PUNCT", ";"):
                self.advance()
                continue
            break
        self.expect("PUNCT", "}")
        return ProbChoice(tuple(weights), tuple(branches), span=start.span)

    def _qchoice_statement(self) -> Program:
        start = self.expect("KEYWORD", "qchoice")
        coin = self.parse_statement()
        from .program import qvar_layout

        dim = qvar_layout(coin).dim
        if self.at("KEYWORD", "basis"):
            self.advance()
            basis = GuardBasis(self._matrix_ref())
        else:
            basis = GuardBasis.computational(dim)
        arity = basis.arity if basis.dim == dim else dim
        branches = self._guard_arms(arity, start.span)
        return QChoice(coin, basis, branches, span=start.span)


def parse_source(
    text: str,
    *,
    base_dir: str = ".",
    tol: float = linalg.DEFAULT_TOL,
) -> Program:
    """Parse and well-formedness-check one source text.

    Raises :class:`SourceError` carrying located diagnostics on any lexical,
    syntactic or well-formedness problem.
    """
    try:
        program = Parser(text, base_dir=base_dir, tol=tol).parse_source()
    except SourceError:
        raise
    except QgclError as exc:  # malformed construction, e.g. duplicate outcomes
        raise SourceError([Diagnostic("syntax", str(exc), None)]) from exc
    diagnostics = well_formed(program, tol)
    if diagnostics:
        raise SourceError(diagnostics)
    return program


def parse_file(path: str, *, tol: float = linalg.DEFAULT_TOL) -> Program:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_source(text, base_dir=os.path.dirname(os.path.abspath(path)), tol=tol)


def check_source(text: str, *, base_dir: str = ".", tol: float = linalg.DEFAULT_TOL) -> list[Diagnostic]:
    """All diagnostics of a source text; empty when it is well-formed."""
    try:
        parse_source(text, base_dir=base_dir, tol=tol)
    except SourceError as exc:
        return exc.diagnostics
    return []
