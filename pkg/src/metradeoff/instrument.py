"""Measurement instruments in Kraus form on a pair of d-level systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from metradeoff.linalg import hermitianize, ket_bra, partial_trace, vectorize

COMPLETENESS_TOL = 1e-10
ZERO_PROB = 1e-14


class ZeroProbabilityOutcome(ValueError):
    """Outcome probability below the observability threshold."""


@dataclass(frozen=True)
class Outcome:
    kraus_ops: tuple[np.ndarray, ...]
    guess: np.ndarray


@dataclass(frozen=True)
class KrausInstrument:
    """Finite instrument on C^d (x) C^d with a guessed unitary per outcome.

    A ``covariant_seed`` holds the Kraus operators of a continuous covariant
    instrument at the group identity; completeness is then required only
    after averaging over U (x) I conjugations.
    """

    dim: int
    outcomes: tuple[Outcome, ...]
    covariant_seed: bool = False
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if self.check:
            self.validate()

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def povm(self) -> list[np.ndarray]:
        return [sum(A.conj().T @ A for A in o.kraus_ops) for o in self.outcomes]

    def completeness_error(self) -> float:
        d = self.dim
        total = sum(self.povm())
        if self.covariant_seed:
            # average of (U (x) I) T (U (x) I)^dagger over U is I/d (x) Tr_1 T
            total = np.kron(np.eye(d) / d, partial_trace(total, (d, d), [1]))
        return float(np.max(np.abs(total - np.eye(d * d))))

    def validate(self) -> None:
        D = self.dim**2
        for o in self.outcomes:
            if not o.kraus_ops:
                raise ValueError("outcome without Kraus operators")
            for A in o.kraus_ops:
                if A.shape != (D, D):
                    raise ValueError(f"Kraus operator shape {A.shape}, expected {(D, D)}")
            U = o.guess
            if U.shape != (self.dim, self.dim) or not np.allclose(
                U.conj().T @ U, np.eye(self.dim), atol=COMPLETENESS_TOL
            ):
                raise ValueError("guess is not a d x d unitary")
        err = self.completeness_error()
        if err > COMPLETENESS_TOL:
            raise ValueError(f"POVM completeness violated by {err:.3g}")


@dataclass(frozen=True)
class OptimalParams:
    """Point (a, b) of the optimal Kraus family a|U>><<U| + b I."""

    a: float
    b: float
    dim: int

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a={self.a} outside [0, 1]")
        d = self.dim
        lhs = (self.a**2 + self.b**2) * d**2 + 2 * self.a * self.b * d
        if abs(lhs - d**2) > 1e-12 * d**2:
            raise ValueError("(a, b) violate the normalization (a^2+b^2)d^2 + 2abd = d^2")

    @classmethod
    def from_a(cls, a: float, d: int) -> OptimalParams:
        return cls(float(a), b_from_a(a, d), d)


def b_from_a(a: float, d: int) -> float:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a} outside [0, 1]")
    return (sqrt(d * d * (1 - a * a) + a * a) - a) / d


def weyl_basis(d: int) -> list[np.ndarray]:
    """The d**2 shift-clock unitaries X^m Z^n, ordered by m*d + n."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    Xp = [np.linalg.matrix_power(X, m) for m in range(d)]
    Zp = [np.linalg.matrix_power(Z, n) for n in range(d)]
    return [Xp[m] @ Zp[n] for m in range(d) for n in range(d)]


def optimal_kraus(a: float, b: float, U: np.ndarray) -> np.ndarray:
    u = vectorize(U)
    return a * ket_bra(u) + b * np.eye(u.size)


def optimal_discrete_instrument(params: OptimalParams) -> KrausInstrument:
    d = params.dim
    outcomes = tuple(
        Outcome((optimal_kraus(params.a, params.b, U) / d,), U) for U in weyl_basis(d)
    )
    return KrausInstrument(d, outcomes)


def optimal_seed(params: OptimalParams) -> KrausInstrument:
    """Single Kraus operator a|I>><<I| + b I generating the covariant optimum."""
    d = params.dim
    A = optimal_kraus(params.a, params.b, np.eye(d))
    return KrausInstrument(d, (Outcome((A,), np.eye(d, dtype=complex)),), covariant_seed=True)


def identity_instrument(d: int) -> KrausInstrument:
    return KrausInstrument(d, (Outcome((np.eye(d * d, dtype=complex),), np.eye(d, dtype=complex)),))


def _check_density(rho: np.ndarray, D: int) -> None:
    if rho.shape != (D, D):
        raise ValueError(f"density matrix must be {D}x{D}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(hermitianize(rho))[0] < -1e-10:
        raise ValueError("density matrix is not positive semidefinite")


def apply(instr: KrausInstrument, rho: np.ndarray, r: int) -> tuple[np.ndarray, float]:
    """Conditional post-measurement state and probability of outcome ``r``."""
    rho = np.asarray(rho, dtype=complex)
    _check_density(rho, instr.dim**2)
    ops = instr.outcomes[r].kraus_ops
    out = sum(A @ rho @ A.conj().T for A in ops)
    prob = float(np.trace(out).real)
    if prob < ZERO_PROB:
        raise ZeroProbabilityOutcome(f"outcome {r} has probability {prob:.3g}")
    return out / prob, prob


def covariant_kraus_at(seed: KrausInstrument, h: np.ndarray) -> list[np.ndarray]:
    """Kraus operators of the covariant instrument at continuous outcome ``h``.

    Each seed operator A_r,mu becomes (U_h U_r^dagger (x) I) A (U_r U_h^dagger (x) I);
    the guess attached to outcome h is U_h itself.
    """
    d = seed.dim
    I = np.eye(d)
    ops = []
    for o in seed.outcomes:
        V = np.kron(h @ o.guess.conj().T, I)
        ops.extend(V @ A @ V.conj().T for A in o.kraus_ops)
    return ops


def covariantize(instr: KrausInstrument) -> KrausInstrument:
    """Treat a finite instrument as the seed of its covariant version."""
    return KrausInstrument(instr.dim, instr.outcomes, covariant_seed=True)
