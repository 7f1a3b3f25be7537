import json

import numpy as np
import pytest

from qgcl import linalg as la
from qgcl.errors import SourceError
from qgcl.matrixio import matrix_to_record
from qgcl.parser import check_source, parse_file, parse_source
from qgcl.printer import print_program
from qgcl.program import (
    Block,
    Guarded,
    Measurement,
    ProbChoice,
    QChoice,
    Seq,
    Skip,
    Unitary,
    ast_equal,
)
from qgcl.semantics import denote

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = la.identity(2)


def lit(m) -> str:
    return json.dumps(matrix_to_record(np.asarray(m, dtype=complex)))


PRELUDE = "\n".join(
    [
        "qvar q : 2;",
        "qvar c : 2;",
        "qvar r : 3;",
        f"matrix H = {lit(H)};",
        f"matrix X = {lit(X)};",
        f"matrix I = {lit(I2)};",
        f"measurement M0 = {{ 0: {lit(np.diag([1.0, 0.0]))}; 1: {lit(np.diag([0.0, 1.0]))} }};",
        "",
    ]
)


def parse(body: str):
    return parse_source(PRELUDE + body)


class TestParsing:
    def test_skip(self):
        assert isinstance(parse("skip"), Skip)

    def test_sequencing_is_right_associative(self):
        p = parse("H[q]; X[q]; skip")
        assert isinstance(p, Seq)
        assert isinstance(p.second, Seq)

    def test_guard_builds_the_controlled_not(self):
        p = parse("guard c { |0> -> I[q]; |1> -> X[q] }")
        assert isinstance(p, Guarded)
        channel = denote(p)
        # control-first layout: |0><0| (x) I + |1><1| (x) X
        cnot = la.tensor(np.diag([1.0, 0.0]), I2) + la.tensor(np.diag([0.0, 1.0]), X)
        assert channel.layout.names == ("c", "q")
        assert len(channel.kraus) == 1
        assert la.max_abs_diff(channel.kraus[0], cnot) < 1e-12

    def test_qchoice_single_walker_step(self):
        src = PRELUDE + "qchoice H[c] { |0> -> X[q]; |1> -> I[q] }"
        p = parse_source(src)
        assert isinstance(p, QChoice)
        channel = denote(p)
        step = (la.tensor(np.diag([1.0, 0.0]), X) + la.tensor(np.diag([0.0, 1.0]), I2)) @ la.tensor(H, I2)
        assert len(channel.kraus) == 1
        assert la.max_abs_diff(channel.kraus[0], step) < 1e-12

    def test_measure_with_named_measurement(self):
        p = parse("measure x <- M0[q] { 0: skip; 1: X[q] }")
        assert p.x == "x"
        assert p.measurement.outcomes == (0, 1)

    def test_block_with_ket_init(self):
        p = parse("begin local c := |1>; guard c { |0> -> I[q]; |1> -> X[q] } end")
        assert isinstance(p, Block)
        assert la.max_abs_diff(p.init, np.diag([0.0, 1.0])) == 0

    def test_pchoice_weights(self):
        p = parse("pchoice { H[q] @ 0.25; X[q] @ 0.5 }")
        assert isinstance(p, ProbChoice)
        assert p.weights == (0.25, 0.5)

    def test_parenthesised_seq_coin(self):
        p = parse("qchoice (H[c]; X[c]) { |0> -> I[q]; |1> -> X[q] }")
        assert isinstance(p, QChoice)
        assert isinstance(p.coin, Seq)

    def test_inline_matrix_statement(self):
        p = parse(f"{lit(X)}[q]")
        assert isinstance(p, Unitary)
        assert la.max_abs_diff(p.matrix, X) == 0

    def test_guard_with_named_basis(self):
        p = parse("guard c basis H { |0> -> I[q]; |1> -> X[q] }")
        assert la.max_abs_diff(p.basis.matrix, H) == 0

    def test_use_loads_definitions(self, tmp_path):
        defs = {"Y": matrix_to_record(np.array([[0, -1j], [1j, 0]]))}
        path = tmp_path / "gates.json"
        path.write_text(json.dumps(defs))
        src = f'qvar q : 2;\nuse "gates.json";\nY[q]'
        program = parse_source(src, base_dir=str(tmp_path))
        assert isinstance(program, Unitary)
        source_file = tmp_path / "prog.qgcl"
        source_file.write_text(src)
        assert ast_equal(parse_file(str(source_file)), program)

    def test_scientific_notation_in_matrix_entries(self):
        m = parse('{"rows":1,"cols":1,"entries":[[1e0,0.0]]}[q]'.replace('"rows":1,"cols":1', '"rows":2,"cols":2').replace(
            '"entries":[[1e0,0.0]]',
            '"entries":[[1e0,0.0],[0.0,0.0],[0.0,0.0],[-1.0e0,0.0]]',
        ))
        assert la.max_abs_diff(m.matrix, np.diag([1.0, -1.0])) == 0


class TestDiagnostics:
    def test_syntax_error_carries_position(self):
        with pytest.raises(SourceError) as exc:
            parse_source("qvar q : 2;\nskip skip")
        d = exc.value.diagnostics[0]
        assert d.code == "syntax"
        assert d.span is not None and d.span.line == 2

    NEGATIVE = [
        ("qvar q : 2;\n$", "lex"),
        ("qvar q : 2;\nskip skip", "syntax"),
        (PRELUDE + "H[w]", "undeclared-variable"),
        (PRELUDE + "W[q]", "unknown-name"),
        (
            PRELUDE + f"measure x <- {{ 0: {lit(np.diag([1.0, 0.0]))} }}[q] {{ 0: skip }}",
            "measure-incomplete",
        ),
        (PRELUDE + "measure x <- M0[q] { 0: skip; 1: skip }; measure x <- M0[q] { 0: skip; 1: skip }", "var-reuse"),
        (PRELUDE + "guard c { |0> -> I[c]; |1> -> X[q] }", "guard-var-overlap"),
        (PRELUDE + "guard c { |0> -> I[q] }", "guard-arms"),
        (PRELUDE + f"begin local c := {lit(np.diag([2.0, 0.0]))}; guard c {{ |0> -> I[q]; |1> -> X[q] }} end", "block-init"),
        (PRELUDE + "pchoice { H[q] @ 0.8; X[q] @ 0.9 }", "prob-weights"),
        (PRELUDE + f"guard c basis {lit(np.array([[1.0, 1.0], [0.0, 0.0]]))} {{ |0> -> I[q]; |1> -> X[q] }}", "guard-basis"),
        (PRELUDE + f"{lit(np.diag([1.0, 0.5]))}[q]", "unitary-nonunitary"),
        (
            PRELUDE
            + f"measure x <- {{ 0: {lit(np.diag([1.0, 0.0]))}; 0: {lit(np.diag([0.0, 1.0]))} }}[q] {{ 0: skip }}",
            "syntax",
        ),
        ('qvar q : 2;\nuse "no-such-defs.json";\nskip', "use"),
    ]

    @pytest.mark.parametrize("src,code", NEGATIVE, ids=[c for _, c in NEGATIVE])
    def test_negative_corpus(self, src, code):
        diagnostics = check_source(src)
        assert diagnostics, f"expected a diagnostic of class {code}"
        assert code in {d.code for d in diagnostics}


class TestRoundTrip:
    def test_print_parse_on_fifty_programs(self):
        from conftest import corpus

        for p in corpus(50):
            text = print_program(p)
            again = parse_source(text)
            assert ast_equal(p, again), text

    def test_print_uses_declared_names(self):
        p = parse("qchoice H[c] { |0> -> I[q]; |1> -> X[q] }")
        text = print_program(p, matrices={"H": H, "X": X, "I": I2})
        assert "matrix H =" in text and "H[c]" in text
        assert ast_equal(parse_source(text), p)

    def test_print_inlines_unknown_matrices(self):
        p = parse("H[q]")
        text = print_program(p)
        assert '"entries"' in text
        assert ast_equal(parse_source(text), p)

    def test_print_named_measurement(self):
        p = parse("measure x <- M0[q] { 0: skip; 1: X[q] }")
        m0 = Measurement(((0, np.diag([1.0, 0.0])), (1, np.diag([0.0, 1.0]))))
        text = print_program(p, measurements={"M0": m0})
        assert "measurement M0 =" in text and "<- M0[q]" in text
        assert ast_equal(parse_source(text), p)

    def test_printed_ket_init_round_trips(self):
        p = parse("begin local c := |0>; guard c { |0> -> I[q]; |1> -> X[q] } end")
        text = print_program(p)
        assert ":= |0>" in text
        assert ast_equal(parse_source(text), p)

    def test_guard_basis_rendered_by_name_when_declared(self):
        p = parse("guard c basis H { |0> -> I[q]; |1> -> X[q] }")
        named = print_program(p, matrices={"H": H})
        assert "basis H {" in named
        assert ast_equal(parse_source(named), p)
        inline = print_program(p)
        assert "basis {" in inline
        assert ast_equal(parse_source(inline), p)


class TestTwoWalkersSharingCoins:
    """A step of two walkers whose coins are entangled by a shared unitary:
    an entangling gate on both coins, then one quantum choice per walker."""

    SRC = "\n".join(
        [
            "qvar q1 : 4;",
            "qvar q2 : 4;",
            "qvar c1 : 2;",
            "qvar c2 : 2;",
            f"matrix H = {lit(H)};",
            f"matrix U = {lit(np.kron(H, H) @ np.diag([1, 1, 1, -1]))};",
            f"matrix TL = {lit(np.roll(np.eye(4), -1, axis=0))};",
            f"matrix TR = {lit(np.roll(np.eye(4), 1, axis=0))};",
            "",
            "U[c1, c2];",
            "qchoice H[c1] { |0> -> TL[q1]; |1> -> TR[q1] };",
            "qchoice H[c2] { |0> -> TL[q2]; |1> -> TR[q2] }",
        ]
    )

    def test_parses_and_desugars_to_guarded_steps(self):
        from qgcl.program import desugar, well_formed

        p = parse_source(self.SRC)
        assert isinstance(p, Seq) and isinstance(p.first, Unitary)
        step1 = p.second.first
        assert isinstance(step1, QChoice) and step1.coin.qvars == (("c1", 2),)
        lowered = desugar(p)
        assert well_formed(lowered) == []
        step1_low = lowered.second.first
        assert isinstance(step1_low, Seq) and isinstance(step1_low.second, Guarded)
        assert step1_low.second.qvars == (("c1", 2),)

    def test_step_channel_is_unitary_conjugation(self):
        p = parse_source(self.SRC)
        channel = denote(p)
        assert len(channel.kraus) == 1
        assert la.is_unitary(channel.kraus[0], 1e-9)
