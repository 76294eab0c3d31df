"""Shared corpus of solved functions, cached once per session."""

from __future__ import annotations

import pytest

from advspan import (
    build_witness_sdp,
    canonical_from_gram,
    extract_certificate,
    load_function,
    solve_sdp,
)
from advspan.boolfun import BooleanFunction
from advspan.spectral import build_input_graph, build_program_graph, jordan_decompose


def two_bit_dependent_tables() -> list[str]:
    """The ten 2-ary tables that are non-constant and depend on both inputs."""
    out = []
    for code in range(16):
        table = tuple((code >> (3 - s)) & 1 for s in range(4))
        f = BooleanFunction(2, table)
        if not f.is_constant and f.depends_on(1) and f.depends_on(2):
            out.append(f.name())
    return out


def corpus_specs() -> list[str]:
    """12 functions with n <= 2 (up to triviality) plus the three n = 3 anchors."""
    return ["01", "10"] + two_bit_dependent_tables() + ["PARITY:3", "OR:3", "MAJ:3"]


class SolvedFunction:
    def __init__(self, spec: str):
        self.spec = spec
        self.f = load_function(spec)
        self.sdp = build_witness_sdp(self.f)
        self.solution = solve_sdp(self.sdp)
        self.certificate = extract_certificate(self.solution, self.f)
        self.program = canonical_from_gram(self.f, self.solution)
        self.graph = build_program_graph(self.program)
        self._input_graphs: dict[int, object] = {}
        self._jordans: dict[int, object] = {}

    def input_graph(self, s: int):
        if s not in self._input_graphs:
            self._input_graphs[s] = build_input_graph(self.graph, self.program, s)
        return self._input_graphs[s]

    def jordan(self, s: int):
        if s not in self._jordans:
            self._jordans[s] = jordan_decompose(self.graph.delta, self.graph.pi_projector(s))
        return self._jordans[s]


@pytest.fixture(scope="session")
def solved():
    """Memoized access to fully solved functions: solved('PARITY:2')."""
    cache: dict[str, SolvedFunction] = {}

    def get(spec: str) -> SolvedFunction:
        if spec not in cache:
            cache[spec] = SolvedFunction(spec)
        return cache[spec]

    return get


@pytest.fixture(scope="session")
def corpus(solved):
    """All corpus functions, solved."""
    return [solved(spec) for spec in corpus_specs()]
