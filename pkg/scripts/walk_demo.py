#!/usr/bin/env python3
"""Evolve the coined walk on an n-cycle and print position distributions.

The step program is built once as a quantum choice (Hadamard coin, shift
guarded by the coin) and applied repeatedly to the walker density operator.

Usage: python scripts/walk_demo.py [--size 8] [--steps 6]
"""

import argparse

import numpy as np

from qgcl.linalg import basis_ket, dagger
from qgcl.program import GuardBasis, QChoice, Unitary
from qgcl.registers import DensityMatrix, RegisterLayout
from qgcl.semantics import apply_program

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def step_program(size: int) -> QChoice:
    right = np.roll(np.eye(size), 1, axis=0).astype(complex)
    left = np.roll(np.eye(size), -1, axis=0).astype(complex)
    return QChoice(
        Unitary((("c", 2),), HADAMARD),
        GuardBasis.computational(2),
        (Unitary((("v", size),), right), Unitary((("v", size),), left)),
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=8, help="cycle length")
    parser.add_argument("--steps", type=int, default=6)
    args = parser.parse_args()

    layout = RegisterLayout.of(("v", args.size), ("c", 2))
    start = np.kron(
        basis_ket(args.size, 0) @ dagger(basis_ket(args.size, 0)),
        np.full((2, 2), 0.5, dtype=complex),
    )
    state = DensityMatrix(start, layout)
    step = step_program(args.size)

    print(f"coined walk on the {args.size}-cycle, walker at 0, coin |+>")
    for t in range(args.steps + 1):
        marginal = np.zeros(args.size)
        for v in range(args.size):
            for c in range(2):
                idx = v * 2 + c
                marginal[v] += state.matrix[idx, idx].real
        bars = "  ".join(f"{p:.3f}" for p in marginal)
        print(f"t={t}: {bars}")
        if t < args.steps:
            state = apply_program(step, state)


if __name__ == "__main__":
    main()
