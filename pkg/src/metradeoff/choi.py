"""Choi operators of covariant instruments and the optimal tradeoff eigenproblem.

Operators live on H1 (x) H2 (x) H3 (x) H4, each factor of dimension d. The
instrument maps the input pair (3, 4) to the output pair (1, 2), so a single
Kraus operator A on C^d (x) C^d has Choi operator |A>><<A| with A vectorized
across the (12)|(34) cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
import scipy.linalg

from metradeoff.fidelity import TradeoffPoint, visibilities
from metradeoff.haar import SeededStream, mc_average, mc_moments
from metradeoff.linalg import (
    SubsystemSpec,
    is_hermitian,
    ket_bra,
    partial_trace,
    permute_subsystems,
    power_max_eig,
)

DENSE_MAX_DIM = 4
DEGENERACY_GAP = 1e-12


@dataclass(frozen=True)
class ChoiOperator:
    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        n = self.dim**4
        if self.matrix.shape != (n, n):
            raise ValueError(f"Choi matrix must be {n}x{n} for d={self.dim}")
        if not is_hermitian(self.matrix):
            raise ValueError("Choi matrix is not Hermitian")

    @property
    def spec(self) -> SubsystemSpec:
        return SubsystemSpec((self.dim,) * 4)

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class ChiVector:
    """x |I>>_12 |I>>_34 + y |I>>_13 |I>>_24."""

    x: float
    y: float
    dim: int

    @property
    def norm2(self) -> float:
        d = self.dim
        return (self.x**2 + self.y**2) * d * d + 2 * self.x * self.y * d

    def vector(self) -> np.ndarray:
        return self.x * bell_pair_vector(self.dim, (1, 2), (3, 4)) + self.y * bell_pair_vector(
            self.dim, (1, 3), (2, 4)
        )


def bell_pair_vector(d: int, first: tuple[int, int], second: tuple[int, int]) -> np.ndarray:
    """|I>>_ij |I>>_kl on four d-level systems (labels 1..4)."""
    eye = np.eye(d)
    T = np.einsum(eye, [first[0] - 1, first[1] - 1], eye, [second[0] - 1, second[1] - 1], [0, 1, 2, 3])
    return T.reshape(-1).astype(complex)


def maxent_operator(d: int, pairs: list[tuple[int, int]]) -> np.ndarray:
    """Unnormalized projector |I>><<I| on each listed pair, identity elsewhere."""
    phi = np.eye(d).reshape(-1)
    proj = np.outer(phi, phi)
    layout, factors = [], []
    for i, j in pairs:
        layout += [i, j]
        factors.append(proj)
    for k in range(1, 5):
        if k not in layout:
            layout.append(k)
            factors.append(np.eye(d))
    M = factors[0]
    for f in factors[1:]:
        M = np.kron(M, f)
    order = [layout.index(k) + 1 for k in range(1, 5)]
    return permute_subsystems(M, (d,) * 4, order).astype(complex)


def _norm_const(d: int) -> float:
    return 1.0 / (d * d * (d * d - 1))


def build_RF(d: int) -> ChoiOperator:
    """Operator whose pairing with a Choi operator gives the operation fidelity."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    n = d**4
    M = (
        np.eye(n)
        + maxent_operator(d, [(1, 3), (2, 4)])
        - (maxent_operator(d, [(2, 4)]) + maxent_operator(d, [(1, 3)])) / d
    )
    return ChoiOperator(_norm_const(d) * M, d)


def build_RG(d: int) -> ChoiOperator:
    """Operator whose pairing with a Choi operator gives the estimation fidelity."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    n = d**4
    M = (1 - 2 / d**2) * np.eye(n) + maxent_operator(d, [(3, 4)]) / d
    return ChoiOperator(_norm_const(d) * M, d)


def rg_from_rf(RF: ChoiOperator) -> np.ndarray:
    """(1/d) I_12 (x) Tr_12[(|I>><<I|_12 (x) I_34) R_F]."""
    d = RF.dim
    reduced = partial_trace(maxent_operator(d, [(1, 2)]) @ RF.matrix, RF.spec, [1, 2])
    return np.kron(np.eye(d * d), reduced) / d


def _tensor(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, d, d)


def apply_RF(v: np.ndarray, d: int) -> np.ndarray:
    """R_F @ v without forming the d**4 x d**4 matrix."""
    T = _tensor(v, d)
    eye = np.eye(d)
    full = np.einsum("jkjk->", T)
    both = full * np.einsum("ac,bd->abcd", eye, eye)
    p24 = np.einsum("bd,akck->abcd", eye, T)
    p13 = np.einsum("ac,jbjd->abcd", eye, T)
    out = T + both - (p24 + p13) / d
    return _norm_const(d) * out.reshape(-1)


def apply_RG(v: np.ndarray, d: int) -> np.ndarray:
    T = _tensor(v, d)
    p34 = np.einsum("cd,abkk->abcd", np.eye(d), T)
    out = (1 - 2 / d**2) * T + p34 / d
    return _norm_const(d) * out.reshape(-1)


def apply_C(v: np.ndarray, p: float, d: int) -> np.ndarray:
    return p * apply_RG(v, d) + (1 - p) * apply_RF(v, d)


def chi_to_kraus(chi: ChiVector) -> tuple[np.ndarray, float, float]:
    """Kraus operator of the covariant instrument at the group identity.

    |chi> is reshaped across the (12)|(34) cut into x|I>><<I| + y I and
    rescaled so that its Choi operator has trace d**2. Returns (A, a, b).
    """
    d = chi.dim
    if chi.norm2 <= 0:
        raise ValueError("zero chi vector")
    s = d / sqrt(chi.norm2)
    A = s * chi.vector().reshape(d * d, d * d)
    return A, chi.x * s, chi.y * s


def choi_from_chi(chi: ChiVector) -> ChoiOperator:
    v = chi.vector()
    return ChoiOperator(ket_bra(v) * (chi.dim**2 / chi.norm2), chi.dim)


@dataclass(frozen=True)
class Optimum:
    point: TradeoffPoint
    chi: ChiVector
    residual: float
    eigenvalue: float
    degenerate: bool


def _reduced_top(p: float, d: int) -> tuple[float, ChiVector]:
    basis = [bell_pair_vector(d, (1, 2), (3, 4)), bell_pair_vector(d, (1, 3), (2, 4))]
    images = [apply_C(b, p, d) for b in basis]
    M = np.array([[np.vdot(bi, ci).real for ci in images] for bi in basis])
    S = np.array([[d * d, d], [d, d * d]], dtype=float)
    w, V = scipy.linalg.eigh(M, S)
    c = V[:, -1]
    if c.sum() < 0:
        c = -c
    c = np.where(np.abs(c) < 1e-14, 0.0, c)
    if np.any(c < 0):
        raise RuntimeError(f"top vector of the reduced problem has mixed signs: {c}")
    chi = ChiVector(float(c[0]), float(c[1]), d)
    scale = d / sqrt(chi.norm2)
    return float(w[-1]), ChiVector(chi.x * scale, chi.y * scale, d)


def optimize(p: float, d: int, *, dense: bool | None = None) -> Optimum:
    """Maximize p G + (1-p) F over covariant instruments.

    The top eigenvector of C(p) = p R_G + (1-p) R_F is sought in the span of
    |I>>_12|I>>_34 and |I>>_13|I>>_24 through the 2x2 generalized eigenproblem;
    ``residual`` measures how far the true top eigenvector lies outside that
    span (dense solve, default for d <= 4) or, otherwise, the eigen-equation
    residual of the span solution plus any excess of a power-iteration
    estimate of the top eigenvalue over it. The returned chi is scaled so
    that |chi><chi| has trace d**2.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    if dense is None:
        dense = d <= DENSE_MAX_DIM

    lam, chi = _reduced_top(p, d)
    v_chi = chi.vector() / sqrt(chi.norm2)
    degenerate = False
    if dense:
        C = p * build_RG(d).matrix + (1 - p) * build_RF(d).matrix
        w, V = np.linalg.eigh(C)
        degenerate = bool(w[-1] - w[-2] < DEGENERACY_GAP)
        if degenerate:
            top = V[:, w > w[-1] - DEGENERACY_GAP]
            residual = float(np.linalg.norm(v_chi - top @ (top.conj().T @ v_chi)))
        else:
            B = np.stack([bell_pair_vector(d, (1, 2), (3, 4)), bell_pair_vector(d, (1, 3), (2, 4))], axis=1)
            v = V[:, -1]
            coef = np.linalg.solve(B.conj().T @ B, B.conj().T @ v)
            residual = float(np.linalg.norm(v - B @ coef))
        residual = max(residual, abs(float(w[-1]) - lam))
        lam = float(w[-1])
    else:
        n = d**4
        eig_res = float(np.linalg.norm(apply_C(v_chi, p, d) - lam * v_chi))
        scale = 1.0 / (d * d)
        lam_pow, _, _ = power_max_eig(lambda x: apply_C(x, p, d), n, scale=scale, tol=1e-10)
        residual = max(eig_res, lam_pow - lam, 0.0)

    _, a, b = chi_to_kraus(chi)
    v = chi.vector()
    F = float(np.vdot(v, apply_RF(v, d)).real)
    G = float(np.vdot(v, apply_RG(v, d)).real)
    info, dist = visibilities(F, G, d)
    return Optimum(TradeoffPoint(a, b, F, G, info, dist), chi, residual, lam, degenerate)


@dataclass(frozen=True)
class TpReport:
    tp_error: float
    trace_error: float
    min_eig: float
    mc_error: float
    mc_stderr: float
    mc_samples: int

    @property
    def mc_ok(self) -> bool:
        if self.mc_samples == 0:
            return True
        return self.mc_error <= 3 * self.mc_stderr + 1e-12

    def ok(self, tol: float = 1e-9) -> bool:
        return self.tp_error < tol and self.trace_error < tol and self.min_eig > -tol and self.mc_ok


def verify_tp(
    R0: ChoiOperator, *, n: int | None = 2000, stream: SeededStream | None = None
) -> TpReport:
    """Diagnostics of the trace-preservation condition for a covariant seed.

    Reports max|Tr_134 R0 - d I|, |Tr R0 - d^2|, the least eigenvalue of R0
    and a Monte-Carlo check that the Haar average of Tr_34 of the rotated
    operator U(1) U*(3) R0 U(1)^dagger U*(3)^dagger is the identity on (12).
    ``n=None`` skips the Monte-Carlo part (its fields are then NaN).
    """
    d = R0.dim
    red = partial_trace(R0.matrix, R0.spec, [1, 3, 4])
    tp_error = float(np.max(np.abs(red - d * np.eye(d))))
    trace_error = abs(R0.trace() - d * d)
    if n is None:
        return TpReport(tp_error, trace_error, R0.min_eig(), float("nan"), float("nan"), 0)
    I = np.eye(d)

    def rotated_marginal(U):
        W = np.kron(np.kron(U, I), np.kron(U.conj(), I))
        return partial_trace(W @ R0.matrix @ W.conj().T, R0.spec, [3, 4])

    stream = stream or SeededStream(0)
    mean, stderr = mc_average(rotated_marginal, d, n, stream)
    mc_error = float(np.max(np.abs(mean - np.eye(d * d))))
    return TpReport(tp_error, trace_error, R0.min_eig(), mc_error, stderr, n)


def mc_RF(d: int, n: int, stream: SeededStream, **kwargs) -> tuple[np.ndarray, np.ndarray]:
    """Haar average defining R_F, evaluated by brute-force sampling."""
    Y = maxent_operator(d, [(1, 2), (3, 4)])
    I = np.eye(d)

    def f(U):
        W = np.kron(np.kron(U, I), np.kron(U.conj(), I))
        return W @ Y @ W.conj().T / d**2

    return mc_moments(f, d, n, stream, **kwargs)


def mc_RG(d: int, n: int, stream: SeededStream, **kwargs) -> tuple[np.ndarray, np.ndarray]:
    """Haar average defining R_G, evaluated by brute-force sampling."""
    Y = maxent_operator(d, [(3, 4)])
    I = np.eye(d)

    def f(U):
        W = np.kron(np.eye(d * d), np.kron(U.conj(), I))
        weight = abs(np.trace(U)) ** 2
        return weight * (W @ Y @ W.conj().T) / d**3

    return mc_moments(f, d, n, stream, **kwargs)
