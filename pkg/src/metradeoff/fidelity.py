"""Operation and estimation fidelities, their visibilities and the optimal curve."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from metradeoff.haar import SeededStream, mc_moments
from metradeoff.instrument import KrausInstrument, b_from_a, covariant_kraus_at
from metradeoff.linalg import vectorize

DOMAIN_SLACK = 1e-12
ROUNDOFF = 1e-12


class TradeoffDomainError(ValueError):
    """A square root in a tradeoff relation has a negative argument."""

    def __init__(self, which: str, value: float):
        super().__init__(f"square-root argument {which} = {value:.3g} is negative")
        self.which = which
        self.value = value


@dataclass(frozen=True)
class TradeoffPoint:
    a: float
    b: float
    F: float
    G: float
    I: float
    D: float

    def as_row(self) -> tuple[float, ...]:
        return (self.a, self.b, self.F, self.G, self.I, self.D)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def sigmas(self, exact: float) -> float:
        """Deviation from ``exact`` in units of the standard error."""
        diff = abs(self.value - exact)
        if diff <= ROUNDOFF:
            return 0.0
        return diff / self.stderr if self.stderr > 0 else float("inf")

    def within(self, exact: float, k: float = 3.0) -> bool:
        """``|value - exact| <= k*stderr``, allowing roundoff for constant integrands."""
        return abs(self.value - exact) <= k * self.stderr + ROUNDOFF


def _check_domain(a: float, d: int) -> None:
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a} outside [0, 1]")


def closed_form_F(a: float, d: int) -> float:
    _check_domain(a, d)
    return 1.0 - (d * d - 2) * a * a / (d * d)


def closed_form_F_expanded(a: float, d: int) -> float:
    """[d^2 + (d^2-2)(a+bd)^2] / (d^2(d^2-1)), the pre-simplification form."""
    _check_domain(a, d)
    b = b_from_a(a, d)
    return (d * d + (d * d - 2) * (a + b * d) ** 2) / (d * d * (d * d - 1))


def closed_form_G(a: float, d: int) -> float:
    _check_domain(a, d)
    b = b_from_a(a, d)
    return (2.0 - b * b) / (d * d)


def closed_form_G_expanded(a: float, d: int) -> float:
    _check_domain(a, d)
    b = b_from_a(a, d)
    return (d * d - 2 + (a * d + b) ** 2) / (d * d * (d * d - 1))


def visibilities(F: float, G: float, d: int) -> tuple[float, float]:
    """Retrieved information I and disturbance D, both normalized to [0, 1]."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    for name, x in (("F", F), ("G", G)):
        if not -DOMAIN_SLACK <= x <= 1 + DOMAIN_SLACK:
            raise ValueError(f"{name}={x} outside [0, 1]")
    info = d * d * G - 1
    dist = d * d * (1 - F) / (d * d - 2)
    return _clamp(info), _clamp(dist)


def _clamp(x: float) -> float:
    if -DOMAIN_SLACK <= x < 0:
        return 0.0
    if 1 < x <= 1 + DOMAIN_SLACK:
        return 1.0
    return x


def _root(which: str, x: float) -> float:
    if x < -DOMAIN_SLACK:
        raise TradeoffDomainError(which, x)
    return sqrt(max(x, 0.0))


def gf_residual(F: float, G: float, d: int) -> float:
    """sqrt((d^2-2)(2-d^2 G)) - [sqrt((d^2-1)F - 1) - sqrt(1-F)]."""
    D2 = d * d
    lhs = _root("(d^2-2)(2-d^2 G)", (D2 - 2) * (2 - D2 * G))
    rhs = _root("(d^2-1)F-1", (D2 - 1) * F - 1) - _root("1-F", 1 - F)
    return lhs - rhs


def fg_residual(F: float, G: float, d: int) -> float:
    """Residual of the same curve solved for F in terms of G."""
    D2 = d * d
    lhs = _root("F-1/(d^2-1)", D2 / (D2 - 2) * (F - 1 / (D2 - 1)))
    rhs = _root("G-(d^2-2)/(d^2(d^2-1))", G - (D2 - 2) / (D2 * (D2 - 1))) + _root(
        "(d^2-1)(2/d^2-G)", (D2 - 1) * (2 / D2 - G)
    )
    return lhs - rhs


def quadratic_residual(I: float, D: float, d: int) -> float:
    return d * d * (D - I) ** 2 - 4 * D * (1 - I)


def tradeoff_residuals(F: float, G: float, d: int) -> tuple[float, float]:
    """Signed residuals of the F-G relation and of the I-D quadratic.

    Both vanish on the optimal curve; a point with positive quadratic
    residual lies beyond the bound. Raises :class:`TradeoffDomainError`
    when (F, G) leaves the domain of the square roots.
    """
    gf = gf_residual(F, G, d)
    info = d * d * G - 1
    dist = d * d * (1 - F) / (d * d - 2)
    return gf, quadratic_residual(info, dist, d)


def tradeoff_point(a: float, d: int) -> TradeoffPoint:
    F = closed_form_F(a, d)
    G = closed_form_G(a, d)
    info, dist = visibilities(F, G, d)
    return TradeoffPoint(a, b_from_a(a, d), F, G, info, dist)


def tradeoff_curve(d: int, n_points: int) -> list[TradeoffPoint]:
    """Optimal (F, G, I, D) for ``n_points`` values of a evenly spaced in [0, 1]."""
    if n_points < 2:
        raise ValueError("need at least two points")
    return [tradeoff_point(float(a), d) for a in np.linspace(0.0, 1.0, n_points)]


def _discrete_integrand(instr: KrausInstrument):
    d = instr.dim
    ops, owner = [], []
    for r, o in enumerate(instr.outcomes):
        for A in o.kraus_ops:
            ops.append(A)
            owner.append(r)
    K = np.stack(ops)
    owner = np.array(owner)
    guesses = np.stack([o.guess for o in instr.outcomes])

    def f(U: np.ndarray) -> np.ndarray:
        v = U.reshape(U.shape[0], -1)
        Kv = np.einsum("kij,cj->cki", K, v)
        amp = np.einsum("ci,cki->ck", v.conj(), Kv)
        norm2 = np.sum(np.abs(Kv) ** 2, axis=2)
        overlap = np.abs(np.einsum("rij,cij->cr", guesses.conj(), U)) ** 2
        F = np.sum(np.abs(amp) ** 2, axis=1) / d**2
        G = np.sum(norm2 * overlap[:, owner], axis=1) / d**3
        return np.stack([F, G], axis=1)

    return f


def _covariant_integrand(seed: KrausInstrument):
    d = seed.dim

    def f(Ug: np.ndarray, Uh: np.ndarray) -> np.ndarray:
        v = vectorize(Ug)
        F = G = 0.0
        overlap = abs(np.vdot(vectorize(Uh), v)) ** 2
        for A in covariant_kraus_at(seed, Uh):
            Av = A @ v
            F += abs(np.vdot(v, Av)) ** 2
            G += np.vdot(Av, Av).real * overlap
        return np.array([F / d**2, G / d**3])

    return f


def mc_fidelities(
    instr: KrausInstrument, n: int, stream: SeededStream, *, jobs: int = 1
) -> tuple[McEstimate, McEstimate]:
    """Monte-Carlo estimates of F and G over Haar-random maximally entangled inputs.

    For a covariant seed the continuous outcome is averaged as well, with one
    extra Haar draw per sample.
    """
    if n < 100:
        raise ValueError("use at least 100 samples")
    if instr.covariant_seed:
        mean, err = mc_moments(_covariant_integrand(instr), instr.dim, n, stream, draws=2, jobs=jobs)
    else:
        mean, err = mc_moments(
            _discrete_integrand(instr), instr.dim, n, stream, vectorized=True, jobs=jobs
        )
    # the covariant integrand is a density over h and may exceed 1 pointwise
    mean = np.clip(mean, 0.0, 1.0)
    return (
        McEstimate(float(mean[0]), float(err[0]), n, stream.seed),
        McEstimate(float(mean[1]), float(err[1]), n, stream.seed),
    )
