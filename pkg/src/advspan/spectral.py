"""Bipartite graphs of a canonical span program, the two-reflection unitary,
its Jordan decomposition, and the spectral-gap profiles.

Index layouts (fixed throughout):
  program graph space:  F0 | mu0 | I      with |I| = 2 n m
  input graph space:    F0 | I' | mu0 | I with I' a copy of I
The vector |0> is the mu0 indicator in whichever space applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DecompositionFailureError,
    NoNullWitnessError,
    WitnessViolationError,
    WrongBranchError,
)
from .matkernel import eig_hermitian, nullspace_projector, require_hermitian
from .spanprog import CanonicalSpanProgram

JORDAN_CLASSIFY_TOL = 1e-9


@dataclass(frozen=True)
class ProgramGraph:
    """Input-independent graph of the program: B_G = [t A] and its adjacency."""

    n: int
    m: int
    num_false: int
    b_g: np.ndarray
    a_g: np.ndarray
    delta: np.ndarray

    @property
    def dim(self) -> int:
        return self.num_false + 1 + 2 * self.n * self.m

    @property
    def mu0_index(self) -> int:
        return self.num_false

    def mu0_vector(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[self.mu0_index] = 1.0
        return e

    def column_mask(self, s: int) -> np.ndarray:
        """Mask over I of the columns agreeing with s (kept by Pi(s))."""
        mask = np.zeros(2 * self.n * self.m, dtype=bool)
        for j in range(1, self.n + 1):
            b = (s >> (self.n - j)) & 1
            start = ((j - 1) * 2 + b) * self.m
            mask[start : start + self.m] = True
        return mask

    def pi_projector(self, s: int) -> np.ndarray:
        """Pi_s on F0 | mu0 | I: diagonal, zero exactly on the (j, not s_j, k) entries."""
        diag = np.ones(self.dim)
        diag[self.num_false + 1 :] = self.column_mask(s).astype(float)
        return np.diag(diag)


def build_program_graph(p: CanonicalSpanProgram) -> ProgramGraph:
    nf0 = len(p.f.f0)
    ni = 2 * p.f.n * p.m
    b_g = np.zeros((nf0, 1 + ni))
    b_g[:, 0] = p.target
    b_g[:, 1:] = p.matrix
    dim = nf0 + 1 + ni
    a_g = np.zeros((dim, dim))
    a_g[:nf0, nf0:] = b_g
    a_g[nf0:, :nf0] = b_g.T
    delta = nullspace_projector(a_g)
    return ProgramGraph(n=p.f.n, m=p.m, num_false=nf0, b_g=b_g, a_g=a_g, delta=delta)


@dataclass(frozen=True)
class InputGraph:
    """Graphs G(s)/G'(s) for one input: true/false biadjacency and adjacency."""

    s: int
    value: int
    b_true: np.ndarray
    b_false: np.ndarray
    a_gs: np.ndarray
    pi_s: np.ndarray
    num_false: int

    @property
    def dim(self) -> int:
        return self.a_gs.shape[0]

    @property
    def mu0_index(self) -> int:
        # row order F0 | I' | mu0 | I
        return self.b_true.shape[0]

    def mu0_vector(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[self.mu0_index] = 1.0
        return e


def build_input_graph(g: ProgramGraph, p: CanonicalSpanProgram, s: int) -> InputGraph:
    ni = 2 * p.f.n * p.m
    nf0 = g.num_false
    mask = g.column_mask(s)
    pibar = np.diag(1.0 - mask.astype(float))
    b_true = np.zeros((nf0 + ni, 1 + ni))
    b_true[:nf0] = g.b_g
    b_true[nf0:, 1:] = pibar
    b_false = np.zeros((nf0 + ni, ni))
    b_false[:nf0] = p.matrix
    b_false[nf0:] = pibar
    dim = nf0 + ni + 1 + ni
    a_gs = np.zeros((dim, dim))
    a_gs[: nf0 + ni, nf0 + ni :] = b_true
    a_gs[nf0 + ni :, : nf0 + ni] = b_true.T
    return InputGraph(
        s=s,
        value=p.f.value(s),
        b_true=b_true,
        b_false=b_false,
        a_gs=a_gs,
        pi_s=g.pi_projector(s),
        num_false=nf0,
    )


def zero_witness_vectors(p: CanonicalSpanProgram, s: int) -> np.ndarray:
    """Kernel witness of the input graph, with its exact overlap guarantees.

    For f(s) = 1 returns psi = -3 sqrt(W) |0> + sum_j |j, s_j> v_{s,j} in the
    mu0 | I column space, a kernel vector of B_{G(s)} with
    |<0|psi>|^2 / ||psi||^2 = 9/10.  For f(s) = 0 returns
    psi' = -|s> + sum_j |j, not s_j> v_{s,j} in the F0 | I' row space, a
    kernel vector of B_{G'(s)}* with |<t|psi'>|^2 / ||psi'||^2 = 1/(9W(W+1)).
    Raises WitnessViolationError when the residual betrays an inaccurate
    upstream SDP solution.
    """
    f, n, m = p.f, p.f.n, p.m
    w_size = p.witness_size
    g = build_program_graph(p)
    ig = build_input_graph(g, p, s)
    ni = 2 * n * m

    def block(j: int, b: int) -> slice:
        start = ((j - 1) * 2 + b) * m
        return slice(start, start + m)

    if f.value(s) == 1:
        psi = np.zeros(1 + ni)
        psi[0] = -3.0 * np.sqrt(w_size)
        for j in range(1, n + 1):
            sl = block(j, f.bit(s, j))
            psi[1 + sl.start : 1 + sl.stop] = p.vectors[s, j - 1]
        residual = float(np.linalg.norm(ig.b_true @ psi))
        ratio = psi[0] ** 2 / float(psi @ psi)
        if residual > 1e-6 or ratio < 0.9 - 1e-9:
            raise WitnessViolationError(
                f"true witness for input {s:0{n}b}: residual {residual:.3e}, ratio {ratio:.12f}"
            )
        return psi

    psi = np.zeros(ig.num_false + ni)
    psi[f.f0.index(s)] = -1.0
    for j in range(1, n + 1):
        sl = block(j, 1 - f.bit(s, j))
        psi[ig.num_false + sl.start : ig.num_false + sl.stop] = p.vectors[s, j - 1]
    residual = float(np.linalg.norm(ig.b_false.T @ psi))
    t_hat = np.zeros(ig.num_false + ni)
    t_hat[: ig.num_false] = p.target
    ratio = float(t_hat @ psi) ** 2 / float(psi @ psi)
    floor = 1.0 / (9.0 * w_size * (w_size + 1.0))
    if residual > 1e-6 or ratio < floor - 1e-9:
        raise WitnessViolationError(
            f"false witness for input {s:0{n}b}: residual {residual:.3e}, "
            f"ratio {ratio:.3e} vs floor {floor:.3e}"
        )
    return psi


def reflection_unitary(g: ProgramGraph, s: int) -> np.ndarray:
    """U_s = (2 Pi_s - I)(2 Delta - I) on F0 | mu0 | I."""
    eye = np.eye(g.dim)
    return (2.0 * g.pi_projector(s) - eye) @ (2.0 * g.delta - eye)


@dataclass(frozen=True)
class JordanBlock:
    """One 2-d invariant subspace: Delta projects onto v, Pi onto w."""

    v: np.ndarray
    v_perp: np.ndarray
    w: np.ndarray
    w_perp: np.ndarray
    theta: float


@dataclass(frozen=True)
class JordanDecomposition:
    """Invariant 1-d / 2-d splitting of the space under two projectors.

    one_dim entries are (vector, b, c) with Delta v = b v and Pi v = c v;
    the two-reflection unitary acts as +1 when b == c and -1 otherwise,
    and as a rotation by theta on each 2-d block.
    """

    dim: int
    one_dim: tuple[tuple[np.ndarray, int, int], ...]
    two_dim: tuple[JordanBlock, ...]

    def reconstruct_unitary(self) -> np.ndarray:
        u = np.zeros((self.dim, self.dim))
        for vec, b, c in self.one_dim:
            sign = 1.0 if b == c else -1.0
            u += sign * np.outer(vec, vec)
        for blk in self.two_dim:
            cos_t, sin_t = np.cos(blk.theta), np.sin(blk.theta)
            u += cos_t * (np.outer(blk.v, blk.v) + np.outer(blk.v_perp, blk.v_perp))
            u += sin_t * (np.outer(blk.v_perp, blk.v) - np.outer(blk.v, blk.v_perp))
        return u

    def eigen_system(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal eigensystem of the reconstructed unitary.

        Phases lie in (-pi, pi]; 2-d blocks contribute the conjugate pair
        (v +- i v_perp)/sqrt(2) with phases -+ theta.
        """
        phases = []
        vectors = []
        for vec, b, c in self.one_dim:
            phases.append(0.0 if b == c else np.pi)
            vectors.append(vec.astype(complex))
        for blk in self.two_dim:
            plus = (blk.v + 1j * blk.v_perp) / np.sqrt(2.0)
            minus = (blk.v - 1j * blk.v_perp) / np.sqrt(2.0)
            phases.extend([-blk.theta, blk.theta])
            vectors.extend([plus, minus])
        return np.array(phases), np.array(vectors).T


def _orthonormal_columns(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the column span, dropping near-null directions."""
    if vectors.size == 0:
        return vectors.reshape(vectors.shape[0], 0)
    u, sv, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, sv > tol]


def jordan_decompose(delta, pi, classify_tol: float = JORDAN_CLASSIFY_TOL) -> JordanDecomposition:
    """Split the space into invariant 1-d / 2-d subspaces of two projectors.

    Works from the eigendecomposition of Delta Pi Delta: a fractional
    eigenvalue lam seeds a 2-d block with cos^2(theta/2) = lam, eigenvalue
    one gives a shared fixed direction, and the orthogonal remainder lies
    in ker Delta, where Pi must act as 0/1 (anything else fails the
    completeness check).
    """
    d = require_hermitian(delta, tol=1e-9)
    q = require_hermitian(pi, tol=1e-9)
    for name, proj in (("delta", d), ("pi", q)):
        if np.abs(proj @ proj - proj).max() > 1e-9:
            raise DecompositionFailureError(f"{name} is not idempotent within 1e-9")
    dim = d.shape[0]
    es = eig_hermitian(d @ q @ d)

    one_dim: list[tuple[np.ndarray, int, int]] = []
    blocks: list[JordanBlock] = []
    claimed: list[np.ndarray] = []
    for lam, vec in zip(es.eigenvalues, es.eigenvectors.T):
        vec = vec.real if np.abs(vec.imag).max() < 1e-12 else vec
        if lam >= 1.0 - classify_tol:
            one_dim.append((vec, 1, 1))
            claimed.append(vec)
        elif lam > classify_tol:
            theta = 2.0 * np.arccos(np.sqrt(np.clip(lam, 0.0, 1.0)))
            w_vec = q @ vec
            w_vec = w_vec / np.linalg.norm(w_vec)
            v_perp = w_vec - np.vdot(vec, w_vec) * vec
            v_perp = v_perp / np.linalg.norm(v_perp)
            w_perp = -np.sin(theta / 2.0) * vec + np.cos(theta / 2.0) * v_perp
            blocks.append(JordanBlock(v=vec, v_perp=v_perp, w=w_vec, w_perp=w_perp, theta=float(theta)))
            claimed.extend([vec, v_perp])
        # lam ~ 0 eigenvectors of Delta Pi Delta mix ker Delta with the
        # (b=1, c=0) directions; both are recovered below.

    # remaining directions inside range(Delta): Delta-fixed, Pi-annihilated
    if claimed:
        used = np.array(claimed).T
        residue = d - used @ (used.conj().T @ d)
    else:
        residue = d
    for vec in _orthonormal_columns(residue).T:
        one_dim.append((vec, 1, 0))
        claimed.append(vec)

    # remainder lives in ker Delta; Pi must restrict to a projector there
    if claimed:
        used = np.array(claimed).T
        rem = np.eye(dim) - used @ used.conj().T
    else:
        rem = np.eye(dim)
    basis = _orthonormal_columns(rem, tol=0.5)
    if basis.shape[1]:
        sub = eig_hermitian(basis.conj().T @ q @ basis)
        for lam, coeff in zip(sub.eigenvalues, sub.eigenvectors.T):
            vec = basis @ coeff
            vec = vec.real if np.abs(vec.imag).max() < 1e-12 else vec
            if lam <= classify_tol * 10:
                one_dim.append((vec, 0, 0))
            elif lam >= 1.0 - classify_tol * 10:
                one_dim.append((vec, 0, 1))
            else:
                raise DecompositionFailureError(
                    f"remainder direction has fractional Pi eigenvalue {lam:.3e}"
                )

    jd = JordanDecomposition(dim=dim, one_dim=tuple(one_dim), two_dim=tuple(blocks))
    total = np.zeros((dim, dim))
    for v, _, _ in jd.one_dim:
        total = total + np.outer(v, v.conj()).real
    for blk in jd.two_dim:
        total = total + np.outer(blk.v, blk.v.conj()).real + np.outer(blk.v_perp, blk.v_perp.conj()).real
    if np.abs(total - np.eye(dim)).max() > 1e-8:
        raise DecompositionFailureError("subspaces do not resolve the identity within 1e-8")
    return jd


def effective_gap_profile(
    ig: InputGraph, w_size: float, c_grid, enforce: bool = True
) -> list[tuple[float, float, float]]:
    """Low-eigenvalue overlap of |0> with A_{G(s)} versus 72 c^2 (1 + 1/W).

    Returns (c, lhs, rhs) triples; with enforce, a violation beyond 1e-6
    raises WitnessViolationError.  Only defined on false inputs.
    """
    if ig.value == 1:
        raise WrongBranchError(f"input {ig.s:b} evaluates true; the profile needs f(s) = 0")
    es = eig_hermitian(ig.a_gs)
    overlaps = np.abs(es.eigenvectors.conj().T @ ig.mu0_vector()) ** 2
    out = []
    for c in c_grid:
        lhs = float(overlaps[np.abs(es.eigenvalues) <= c / w_size].sum())
        rhs = 72.0 * c * c * (1.0 + 1.0 / w_size)
        if enforce and lhs > rhs + 1e-6:
            raise WitnessViolationError(f"effective gap violated at c={c}: {lhs:.6f} > {rhs:.6f}")
        out.append((float(c), lhs, rhs))
    return out


def phase_gap_profile(
    jd: JordanDecomposition,
    w_size: float,
    theta_grid,
    anchor: np.ndarray,
    input_value: int,
    enforce: bool = True,
) -> list[tuple[float, float, float]]:
    """Low-phase overlap of the anchor with U_s versus (2 sqrt(6 Theta W) + Theta/2)^2.

    anchor is the mu0 indicator in the reflection space; only defined on
    false inputs.
    """
    if input_value == 1:
        raise WrongBranchError("phase profile needs f(s) = 0")
    phases, vectors = jd.eigen_system()
    overlaps = np.abs(vectors.conj().T @ anchor.astype(complex)) ** 2
    out = []
    for theta in theta_grid:
        lhs = float(overlaps[np.abs(phases) <= theta].sum())
        rhs = (2.0 * np.sqrt(6.0 * theta * w_size) + theta / 2.0) ** 2
        if enforce and lhs > rhs + 1e-6:
            raise WitnessViolationError(
                f"phase gap violated at Theta={theta}: {lhs:.6f} > {rhs:.6f}"
            )
        out.append((float(theta), lhs, rhs))
    return out


def psd_spectral_bound_check(
    x, t: np.ndarray, gamma_grid, zero_tol: float = 1e-8, enforce: bool = True
) -> list[tuple[float, float, float]]:
    """Check sum over small positive eigenvalues of X' = X + |t><t| of
    |<t|beta>|^2 / theta(beta) against 4 gamma / delta.

    delta is the best kernel overlap ||P_null(X) t||^2; if the null space
    of X carries none of t the bound is undefined and NoNullWitnessError
    is raised.  Eigenvalues at numerical zero are excluded from the sum
    (they provably carry no t component).
    """
    xm = require_hermitian(x)
    p_null = nullspace_projector(xm, zero_tol)
    delta = float(np.linalg.norm(p_null @ t) ** 2)
    if delta <= zero_tol * max(1.0, float(t @ t)):
        raise NoNullWitnessError("null space of X is orthogonal to t; delta is undefined")
    x_prime = xm + np.outer(t, t.conj())
    es = eig_hermitian(x_prime)
    scale = max(1.0, float(np.abs(es.eigenvalues).max()))
    overlaps = np.abs(es.eigenvectors.conj().T @ t.astype(complex)) ** 2
    out = []
    for gamma in gamma_grid:
        sel = (es.eigenvalues > zero_tol * scale) & (es.eigenvalues <= gamma)
        lhs = float((overlaps[sel] / es.eigenvalues[sel]).sum())
        rhs = 4.0 * gamma / delta
        if enforce and lhs > rhs + 1e-6:
            raise WitnessViolationError(f"PSD bound violated at gamma={gamma}: {lhs:.6f} > {rhs:.6f}")
        out.append((float(gamma), lhs, rhs))
    return out


def edge_list(matrix: np.ndarray, tol: float = 0.0) -> list[tuple[int, int, float]]:
    """Nonzero entries as (row, col, weight) rows for external visualization."""
    mat = np.asarray(matrix)
    rows, cols = np.nonzero(np.abs(mat) > tol)
    return [(int(r), int(c), float(mat[r, c])) for r, c in zip(rows, cols)]
