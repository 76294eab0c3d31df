import numpy as np
import pytest

from advspan.advsdp import SdpSolution, build_witness_sdp
from advspan.boolfun import load_function
from advspan.errors import GramFailureError
from advspan.spanprog import (
    CanonicalSpanProgram,
    SpanProgram,
    canonical_from_gram,
    evaluate,
    program_witness_size,
    witness_size_input,
)


def parity_example_program():
    """The two-row parity program from the worked example: t = [1,1],
    columns I_{1,0}, I_{1,1}, I_{2,0}, I_{2,1}."""
    return SpanProgram(
        n=2,
        block_sizes=((1, 1), (1, 1)),
        matrix=np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]),
        target=np.array([1.0, 1.0]),
    )


def or2_example_program():
    """A = [1 1] over I_{1,1} and I_{2,1}, t = [1]."""
    return SpanProgram(
        n=2,
        block_sizes=((0, 1), (0, 1)),
        matrix=np.array([[1.0, 1.0]]),
        target=np.array([1.0]),
    )


def test_parity_program_true_branch():
    ev = evaluate(parity_example_program(), 0b01)
    assert ev.value is True
    assert ev.witness_size == pytest.approx(2.0, abs=1e-9)  # witness z = [1, 1]
    assert ev.residual <= 1e-7


def test_parity_program_false_branch():
    ev = evaluate(parity_example_program(), 0b00)
    assert ev.value is False
    assert np.allclose(np.abs(ev.witness), [0.0, 1.0], atol=1e-9)  # y = [0, 1]
    assert ev.witness_size == pytest.approx(2.0, abs=1e-9)


def test_parity_program_witness_sizes():
    p = parity_example_program()
    assert witness_size_input(p, 0b01) == pytest.approx(2.0, abs=1e-9)
    assert witness_size_input(p, 0b00) == pytest.approx(2.0, abs=1e-9)
    assert program_witness_size(p) == pytest.approx(2.0, abs=1e-9)


def test_or2_program():
    p = or2_example_program()
    ev00 = evaluate(p, 0b00)
    assert ev00.value is False
    assert np.allclose(ev00.witness, [1.0])
    assert ev00.witness_size == pytest.approx(2.0, abs=1e-9)  # ||y^T A||^2
    ev11 = evaluate(p, 0b11)
    assert ev11.value is True
    assert ev11.witness_size == pytest.approx(0.5, abs=1e-9)  # z = [1/2, 1/2]
    assert program_witness_size(p) == pytest.approx(2.0, abs=1e-9)


def test_single_literal_program():
    p = SpanProgram(
        n=1, block_sizes=((0, 1),), matrix=np.array([[1.0]]), target=np.array([1.0])
    )
    assert program_witness_size(p) == pytest.approx(1.0, abs=1e-9)
    assert evaluate(p, 0).value is False
    assert evaluate(p, 1).value is True


def test_exactly_one_branch_on_the_example_programs():
    for p, f in ((parity_example_program(), load_function("PARITY:2")),
                 (or2_example_program(), load_function("OR:2"))):
        for s in f.inputs:
            assert evaluate(p, s).value is (f.value(s) == 1)


def parity_example_gram_solution():
    """The all-ones Gram matrix: every v_{s,j} is the same unit scalar, which
    is feasible and optimal for parity with m = 1."""
    f = load_function("PARITY:2")
    sdp = build_witness_sdp(f)
    return SdpSolution(
        sdp=sdp,
        x=np.ones((8, 8)),
        xi=2.0,
        alpha=np.full(4, 0.5),
        beta=np.full(4, 0.25),
        residuals={},
    )


def test_canonical_from_all_ones_gram_has_m_1():
    f = load_function("PARITY:2")
    prog = canonical_from_gram(f, parity_example_gram_solution())
    assert prog.m == 1
    assert prog.witness_size == pytest.approx(2.0)
    # zero blocks on agreeing literals, vectors elsewhere
    for r, w in enumerate(f.f0):
        for j in (1, 2):
            agree = prog.witness_program().column_range(j, f.bit(w, j))
            assert np.all(prog.matrix[r, agree] == 0.0)
    for w in f.f0:
        for x in f.f1:
            assert prog.pair_sum(w, x) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(prog.target, np.ones(2) / (3 * np.sqrt(2.0)))


def test_canonical_pair_sums_across_corpus(corpus):
    for bundle in corpus:
        f, prog = bundle.f, bundle.program
        for w in f.f0:
            for x in f.f1:
                assert abs(prog.pair_sum(w, x) - 1.0) <= 1e-6


def test_canonical_witness_size_matches_adv(corpus):
    for bundle in corpus:
        prog = bundle.program
        wsize = program_witness_size(prog.witness_program())
        assert abs(wsize - bundle.solution.xi) <= 1e-3 * bundle.solution.xi


def test_canonical_evaluates_like_f(corpus):
    for bundle in corpus:
        p = bundle.program.witness_program()
        for s in bundle.f.inputs:
            assert evaluate(p, s).value is (bundle.f.value(s) == 1)


def test_canonical_witnesses_are_attained_by_stored_vectors(corpus):
    """The stored vectors realize valid witnesses of size sum_j ||v_{s,j}||^2
    (the canonical accounting); the true minimum can only be smaller."""
    for bundle in corpus:
        f, prog = bundle.f, bundle.program
        p = prog.witness_program()
        n, m = f.n, prog.m
        for s in f.inputs:
            stored = prog.stored_witness_size(s)
            assert stored == pytest.approx(prog.witness_size, rel=1e-9)  # tight padding
            if f.value(s) == 1:
                z = np.zeros(2 * n * m)
                for j in range(1, n + 1):
                    z[p.column_range(j, f.bit(s, j))] = prog.vectors[s, j - 1]
                residual = np.linalg.norm(prog.matrix @ z - np.ones(len(f.f0)))
                assert residual <= 1e-6
                assert z @ z == pytest.approx(stored, rel=1e-9)
            else:
                y = np.zeros(len(f.f0))
                y[f.f0.index(s)] = 1.0
                mask = p.selection_mask(s)
                assert np.linalg.norm(y @ prog.matrix[:, mask]) <= 1e-12
                pulled = y @ prog.matrix
                assert pulled @ pulled == pytest.approx(stored, rel=1e-9)
            assert witness_size_input(p, s) <= stored + 1e-4


def test_canonical_target_normalization(corpus):
    for bundle in corpus:
        prog = bundle.program
        expected = np.ones(len(bundle.f.f0)) / (3.0 * np.sqrt(prog.witness_size))
        assert np.allclose(prog.target, expected, atol=1e-12)


def test_canonical_json_roundtrip(solved):
    prog = solved("PARITY:2").program
    clone = CanonicalSpanProgram.from_json(prog.to_json())
    assert clone.m == prog.m
    assert clone.f == prog.f
    assert np.allclose(clone.matrix, prog.matrix)
    assert np.allclose(clone.vectors, prog.vectors)
    assert np.allclose(clone.target, prog.target)
    assert program_witness_size(clone.witness_program()) == pytest.approx(
        program_witness_size(prog.witness_program())
    )


def test_canonical_rejects_infeasible_gram():
    f = load_function("PARITY:2")
    sdp = build_witness_sdp(f)
    broken = SdpSolution(
        sdp=sdp,
        x=np.eye(8),  # PSD but violates every pair constraint
        xi=2.0,
        alpha=np.zeros(4),
        beta=np.full(4, 0.25),
        residuals={},
    )
    with pytest.raises(GramFailureError):
        canonical_from_gram(f, broken)


def or_n_example_program(n):
    """The 1 x n all-ones program for OR_n from the worked example."""
    return SpanProgram(
        n=n,
        block_sizes=tuple((0, 1) for _ in range(n)),
        matrix=np.ones((1, n)),
        target=np.array([1.0]),
    )


@pytest.mark.parametrize("n", [2, 3, 4])
def test_or_n_example_witness_size_is_n(n):
    """Direct computation on the all-ones OR_n program: the all-zero input
    with witness y = [1] pulls back to ||y^T A||^2 = n (not n^2)."""
    p = or_n_example_program(n)
    ev = evaluate(p, 0)
    assert ev.value is False
    assert np.allclose(ev.witness, [1.0])
    assert ev.witness_size == pytest.approx(float(n), abs=1e-9)
    assert program_witness_size(p) == pytest.approx(float(n), abs=1e-9)
