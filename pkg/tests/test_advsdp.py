import itertools

import numpy as np
import pytest

from advspan.advsdp import adversary_ratio, build_witness_sdp, solve_sdp
from advspan.boolfun import load_function
from advspan.errors import (
    ConstantFunctionError,
    NoConvergenceError,
    PatternViolationError,
    ZeroMatrixError,
)


def test_build_dimensions_parity2():
    sdp = build_witness_sdp(load_function("PARITY:2"))
    assert sdp.side == 8
    assert len(sdp.pairs) == 4  # |F0| * |F1| = 2 * 2
    assert sdp.constraints.shape[0] == 4 + 4  # equalities + one row bound per input


def test_build_dimensions_or2_and_identity():
    or2 = build_witness_sdp(load_function("OR:2"))
    assert or2.side == 8
    assert len(or2.pairs) == 3  # |F0| = 1, |F1| = 3
    ident = build_witness_sdp(load_function("01"))  # AND:1 = identity on one bit
    assert ident.side == 2
    assert len(ident.pairs) == 1


def test_build_rejects_constant():
    with pytest.raises(ConstantFunctionError):
        build_witness_sdp(load_function("0000"))


def test_solve_rejects_too_small_tol(solved):
    with pytest.raises(ValueError):
        solve_sdp(solved("PARITY:2").sdp, tol=1e-12)


def test_parity2_value(solved):
    assert solved("PARITY:2").solution.xi == pytest.approx(2.0, abs=1e-4)


def identity_rank_one_oracle():
    """Brute force over rank-one X for the 1-bit identity: X = v v^T with
    v = (a, 1/a) forced by the pair constraint; minimize max(a^2, 1/a^2)."""
    grid = np.linspace(0.5, 2.0, 300001)
    return float(np.maximum(grid**2, grid**-2).min())


def test_identity_value_against_rank_one_oracle(solved):
    xi = solved("01").solution.xi
    assert xi == pytest.approx(identity_rank_one_oracle(), abs=1e-4)
    assert xi == pytest.approx(1.0, abs=1e-4)


def or2_dual_grid_oracle():
    """Max adversary ratio over the two-parameter family Gamma[00,01] =
    Gamma[00,10] = a, Gamma[00,11] = b (the symmetric family for OR_2)."""
    f = load_function("OR:2")
    best = 0.0
    for a, b in itertools.product(np.linspace(0.0, 1.0, 101), repeat=2):
        if a == 0.0 and b == 0.0:
            continue
        g = np.zeros((4, 4))
        g[0b00, 0b01] = g[0b01, 0b00] = a
        g[0b00, 0b10] = g[0b10, 0b00] = a
        g[0b00, 0b11] = g[0b11, 0b00] = b
        denom = 0.0
        for i in (1, 2):
            mask = np.array(
                [[float(f.bit(x, i) != f.bit(y, i)) for y in range(4)] for x in range(4)]
            )
            denom = max(denom, np.linalg.norm(g * mask, 2))
        best = max(best, np.linalg.norm(g, 2) / denom)
    return best


def test_or2_value_against_grid_oracle(solved):
    oracle = or2_dual_grid_oracle()
    assert oracle == pytest.approx(np.sqrt(2.0), abs=1e-3)
    assert solved("OR:2").solution.xi == pytest.approx(np.sqrt(2.0), abs=1e-3)


def parity_symmetric_family_oracle(n):
    """Grid search over Gamma weighted by Hamming distance (odd distances
    only), an independent lower-bound oracle for ADV(PARITY:n)."""
    dim = 2**n
    dist = np.array([[bin(x ^ y).count("1") for y in range(dim)] for x in range(dim)])
    layers = [np.where(dist == d, 1.0, 0.0) for d in range(1, n + 1, 2)]
    weights_grid = (
        np.linspace(-2, 2, 161) if len(layers) > 1 else np.array([0.0])
    )
    best = 0.0
    for w in weights_grid:
        g = layers[0] + (w * layers[1] if len(layers) > 1 else 0.0)
        denom = 0.0
        for i in range(n):
            mask = np.array(
                [[float(((x >> i) & 1) != ((y >> i) & 1)) for y in range(dim)] for x in range(dim)]
            )
            denom = max(denom, np.linalg.norm(g * mask, 2))
        best = max(best, np.linalg.norm(g, 2) / denom)
    return best


@pytest.mark.parametrize("n", [1, 2, 3])
def test_parity_adv_matches_symmetric_oracle(solved, n):
    oracle = parity_symmetric_family_oracle(n)
    assert oracle == pytest.approx(float(n), abs=1e-2)
    xi = solved(f"PARITY:{n}").solution.xi
    assert xi == pytest.approx(float(n), abs=1e-2)
    assert oracle <= xi + 1e-4  # the family max is a lower bound on the SDP value


def test_solution_residual_invariants(corpus):
    for bundle in corpus:
        sol = bundle.solution
        res = sol.residuals
        assert res["primal_equality"] <= 1e-6
        assert res["min_eigenvalue"] >= -1e-7
        assert res["row_sum_violation"] <= 1e-6
        assert abs(res["beta_sum"] - 1.0) <= 1e-6
        for s in bundle.f.inputs:
            assert sol.row_sum(s) <= sol.xi + 1e-6


def test_certificate_values(solved):
    parity = solved("PARITY:2")
    assert parity.certificate.value == pytest.approx(2.0, abs=1e-3)
    or2 = solved("OR:2")  # exercises the dropped-beta path (input 11 has slack)
    assert or2.certificate.value == pytest.approx(np.sqrt(2.0), abs=1e-3)


def test_certificate_zero_pattern_is_exact(corpus):
    for bundle in corpus:
        f, gamma = bundle.f, bundle.certificate.gamma
        for x in f.inputs:
            for y in f.inputs:
                if f.value(x) == f.value(y):
                    assert gamma[x, y] == 0.0


def test_strong_duality_across_corpus(corpus):
    for bundle in corpus:
        xi = bundle.solution.xi
        assert abs(xi - bundle.certificate.value) <= 1e-3 * xi


def test_adversary_ratio_identity_function():
    f = load_function("01")
    gamma = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert adversary_ratio(gamma, f) == pytest.approx(1.0)


def test_adversary_ratio_invariances(solved):
    bundle = solved("PARITY:2")
    gamma = bundle.certificate.gamma
    base = adversary_ratio(gamma, bundle.f)
    for c in (0.5, 3.0, 1e4):
        assert adversary_ratio(c * gamma, bundle.f) == pytest.approx(base, rel=1e-9)
    assert adversary_ratio(-gamma, bundle.f) == pytest.approx(base, rel=1e-9)


def test_adversary_ratio_errors():
    f = load_function("PARITY:2")
    with pytest.raises(ZeroMatrixError):
        adversary_ratio(np.zeros((4, 4)), f)
    bad = np.zeros((4, 4))
    bad[0, 3] = bad[3, 0] = 1.0  # f(00) = f(11) = 0
    with pytest.raises(PatternViolationError):
        adversary_ratio(bad, f)


def test_solver_is_deterministic():
    sdp = build_witness_sdp(load_function("OR:2"))
    a = solve_sdp(sdp)
    b = solve_sdp(sdp)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.xi == b.xi
    assert a.alpha.tobytes() == b.alpha.tobytes()


def test_no_convergence_reports_residuals():
    sdp = build_witness_sdp(load_function("PARITY:2"))
    with pytest.raises(NoConvergenceError) as err:
        solve_sdp(sdp, max_iterations=3)
    assert "consensus_primal" in err.value.residuals


def test_pair_constraints_touch_only_differing_coordinates():
    sdp = build_witness_sdp(load_function("MAJ:3"))
    side = sdp.side
    for p, (w, x) in enumerate(sdp.pairs):
        support = np.flatnonzero(sdp.constraints[p, : side * side])
        for flat in support:
            r, c = divmod(flat, side)
            a, b = sorted((r, c))
            s1, j1 = divmod(a, sdp.n)
            s2, j2 = divmod(b, sdp.n)
            assert {s1, s2} == {w, x}
            assert j1 == j2
            assert sdp.f.bit(w, j1 + 1) != sdp.f.bit(x, j1 + 1)


def test_certificate_beta_alignment_reported(corpus):
    """The duality chain treats sqrt(beta) as a top eigenvector of Gamma;
    observed alignments are reported here, not asserted to equal one."""
    values = {b.spec: b.certificate.beta_alignment for b in corpus}
    for spec, val in values.items():
        assert -1.0 - 1e-9 <= val <= 1.0 + 1e-9
    print("beta alignment <beta|Gamma|beta> / ||Gamma|| by function:", values)
