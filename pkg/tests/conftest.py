"""Shared corpus builders for the syntax and acceptance suites."""

from qgcl.program import Block, ProbChoice, qvar_layout, well_formed
from qgcl.sampling import ProgramSampler, random_density, rng


def corpus_program(seed: int):
    """Random program exercising every construct with concrete syntax."""
    gen = rng(seed)
    sampler = ProgramSampler(gen, (("q", 2),), (("g0", 2), ("g1", 3)))
    p = sampler.program(int(gen.integers(0, 3)))
    roll = gen.uniform()
    if roll < 0.2:
        locals_ = tuple((n, d) for n, d in qvar_layout(p).variables)[:1]
        if locals_:
            dim = locals_[0][1]
            p = Block(locals_, random_density(gen, dim), p)
    elif roll < 0.4:
        q = sampler.program(1)
        p = ProbChoice((0.25, 0.5), (p, q))
    return p


def corpus(count: int = 50):
    """The first ``count`` well-formed corpus programs, deterministically."""
    out = []
    seed = 0
    while len(out) < count:
        p = corpus_program(seed)
        seed += 1
        if not well_formed(p):
            out.append(p)
    return out
