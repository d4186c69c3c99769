"""Dense complex linear algebra on multipartite Hilbert spaces.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The fixed
computational basis orders a vectorized operator with the row index as the
first tensor factor, so ``vectorize(A)[m*d + n] == A[m, n]``; every
transpose and complex conjugate in this package refers to that basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Callable, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-10
DENSE_EIG_LIMIT = 1024


@dataclass(frozen=True)
class SubsystemSpec:
    """Dimensions of the tensor factors of a Hilbert space, labelled 1..k."""

    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        if not self.dims or any(x < 1 for x in self.dims):
            raise ValueError(f"invalid subsystem dimensions {self.dims}")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.dims) + 1))

    @property
    def total(self) -> int:
        return prod(self.dims)


def _as_spec(spec) -> SubsystemSpec:
    return spec if isinstance(spec, SubsystemSpec) else SubsystemSpec(tuple(spec))


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def vectorize(A: np.ndarray) -> np.ndarray:
    """Return |A>> = sum_mn <m|A|n> |m>|n>, a vector of length d**2."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"vectorize expects a square matrix, got shape {A.shape}")
    return A.astype(complex).reshape(-1)


def devectorize(v: np.ndarray, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (d * d,):
        raise ValueError(f"vector of length {v.size} is not |A>> for d={d}")
    return v.reshape(d, d)


def ket_bra(u: np.ndarray, v: np.ndarray | None = None) -> np.ndarray:
    """|u><v| (defaults to the projector-like |u><u|)."""
    v = u if v is None else v
    return np.outer(u, np.conj(v))


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt product <<A|B>> = Tr[A^dagger B]."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def partial_trace(M: np.ndarray, spec, traced: Sequence[int]) -> np.ndarray:
    """Trace out the subsystems with 1-based labels ``traced``.

    The remaining subsystems keep their original relative order. Tracing
    every subsystem returns a 1x1 matrix holding Tr[M].
    """
    spec = _as_spec(spec)
    M = np.asarray(M)
    n = spec.total
    if M.shape != (n, n):
        raise ValueError(f"matrix shape {M.shape} inconsistent with dims {spec.dims}")
    traced = sorted(set(int(t) for t in traced))
    if not traced:
        raise ValueError("no subsystems to trace")
    if traced[0] < 1 or traced[-1] > len(spec.dims):
        raise ValueError(f"labels {traced} outside 1..{len(spec.dims)}")

    k = len(spec.dims)
    T = M.reshape(spec.dims + spec.dims)
    row = list(range(k))
    col = list(range(k, 2 * k))
    for t in traced:
        col[t - 1] = row[t - 1]
    kept = [i for i in range(k) if i + 1 not in traced]
    out = [row[i] for i in kept] + [col[i] for i in kept]
    R = np.einsum(T, row + col, out)
    m = prod(spec.dims[i] for i in kept)
    return np.asarray(R).reshape(m, m)


def permute_subsystems(M: np.ndarray, spec, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator.

    ``order[k]`` is the (1-based) label of the old subsystem that becomes
    factor ``k`` of the result.
    """
    spec = _as_spec(spec)
    k = len(spec.dims)
    order = [int(o) - 1 for o in order]
    if sorted(order) != list(range(k)):
        raise ValueError(f"{order} is not a permutation of 1..{k}")
    T = np.asarray(M).reshape(spec.dims + spec.dims)
    T = T.transpose(order + [k + o for o in order])
    return T.reshape(spec.total, spec.total)


def is_hermitian(M: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return float(np.max(np.abs(M - M.conj().T), initial=0.0)) <= rtol * scale


def hermitianize(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # deterministic representative: largest component real positive
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def power_max_eig(
    matvec: Callable[[np.ndarray], np.ndarray],
    n: int,
    *,
    shift: float = 0.0,
    scale: float = 1.0,
    tol: float = 1e-10,
    maxiter: int = 20000,
    v0: np.ndarray | None = None,
) -> tuple[float, np.ndarray, float]:
    """Largest eigenpair of a Hermitian operator given only its action.

    ``shift`` must make ``M + shift*I`` positive semidefinite. Iterates until
    the Rayleigh residual ||Mv - lambda v|| drops below ``tol*scale`` and
    returns (lambda, v, residual).
    """
    if v0 is None:
        rng = np.random.default_rng(0)
        v0 = np.ones(n) + 0.1 * rng.standard_normal(n)
    v = np.asarray(v0, dtype=complex)
    v = v / np.linalg.norm(v)
    lam, res = 0.0, np.inf
    for _ in range(maxiter):
        w = matvec(v)
        lam = float(np.vdot(v, w).real)
        res = float(np.linalg.norm(w - lam * v))
        if res < tol * scale:
            break
        w = w + shift * v
        v = w / np.linalg.norm(w)
    else:
        raise RuntimeError(f"power iteration did not converge (residual {res:.3g})")
    return lam, _fix_phase(v), res


def max_eig_herm(M: np.ndarray, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Maximum eigenvalue and a unit eigenvector of a Hermitian matrix.

    Dense diagonalization up to dimension 1024, shifted power iteration above.
    """
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M):
        raise ValueError("matrix is not Hermitian within tolerance")
    M = hermitianize(M)
    n = M.shape[0]
    if n <= DENSE_EIG_LIMIT:
        w, V = np.linalg.eigh(M)
        return float(w[-1]), _fix_phase(V[:, -1])
    norm = float(np.max(np.sum(np.abs(M), axis=1)))  # Gershgorin bound on |lambda|
    lam, v, _ = power_max_eig(lambda x: M @ x, n, shift=norm, scale=norm, tol=tol)
    return lam, v
