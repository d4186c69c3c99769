"""Seeded Haar sampling and Monte-Carlo averages over the unitary group.

Unitaries are drawn from U(d), not SU(d). Every integrand used in this
package depends on U only through |U>><<U| or U (x) U*, both blind to a
global phase, so U(d) and SU(d) averages coincide.

Sample ``i`` of stream ``(seed, index)`` comes from a Philox generator whose
key is derived from ``(seed, index)`` and whose counter starts at ``i`` in the
most significant word. Samples can therefore be produced in any order or in
parallel without changing their values.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class SeededStream:
    seed: int
    index: int = 0

    @cached_property
    def key(self) -> np.ndarray:
        entropy = [int(self.seed) & (2**64 - 1), int(self.index)]
        return np.random.SeedSequence(entropy).generate_state(2, np.uint64)

    def generator(self, sample: int) -> np.random.Generator:
        counter = np.array([0, 0, 0, sample], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self.key, counter=counter))


def _haar_from_ginibre(Z: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (diag / np.abs(diag))[..., None, :]


def sample_unitaries(
    d: int, stream: SeededStream, start: int, count: int, draws: int = 1
) -> np.ndarray:
    """Samples ``start .. start+count-1``, shape (count, d, d) or (count, draws, d, d)."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    Z = np.empty((count, draws, d, d), dtype=complex)
    for k in range(count):
        g = stream.generator(start + k)
        x = g.standard_normal((2, draws, d, d))
        Z[k] = (x[0] + 1j * x[1]) / np.sqrt(2)
    U = _haar_from_ginibre(Z)
    return U[:, 0] if draws == 1 else U


def sample_unitary(d: int, stream: SeededStream, sample: int = 0) -> np.ndarray:
    """One Haar-random d x d unitary, reproducible from (stream, sample)."""
    return sample_unitaries(d, stream, sample, 1)[0]


def _block_stats(values: np.ndarray):
    count = values.shape[0]
    mean = values.mean(axis=0)
    m2 = (np.abs(values - mean) ** 2).sum(axis=0)
    return count, mean, m2


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), sa + sb + np.abs(delta) ** 2 * (na * nb / n)


def _tree_reduce(stats: list):
    while len(stats) > 1:
        paired = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            paired.append(stats[-1])
        stats = paired
    return stats[0]


def mc_moments(
    f: Callable,
    d: int,
    n: int,
    stream: SeededStream,
    *,
    draws: int = 1,
    vectorized: bool = False,
    jobs: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean of ``f`` over ``n`` Haar draws and its entrywise standard error.

    With ``vectorized=True``, ``f`` maps a stacked batch of unitaries to a
    stacked batch of values. With ``draws > 1`` each sample consists of that
    many independent unitaries. Samples are processed in fixed blocks and
    combined through a fixed pairwise tree, so the result does not depend on
    ``jobs``.
    """
    if n < 2:
        raise ValueError("need at least two samples")

    def run(start: int):
        count = min(BLOCK_SIZE, n - start)
        U = sample_unitaries(d, stream, start, count, draws)
        if vectorized:
            values = np.asarray(f(U))
        elif draws == 1:
            values = np.stack([np.asarray(f(u)) for u in U])
        else:
            values = np.stack([np.asarray(f(*u)) for u in U])
        return _block_stats(values)

    starts = range(0, n, BLOCK_SIZE)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            stats = list(pool.map(run, starts))
    else:
        stats = [run(s) for s in starts]
    total, mean, m2 = _tree_reduce(stats)
    stderr = np.sqrt(m2 / (total - 1) / total)
    return mean, stderr


def mc_average(
    f: Callable,
    d: int,
    n: int,
    stream: SeededStream,
    **kwargs,
) -> tuple[np.ndarray, float]:
    """Haar average of ``f`` with the largest entrywise standard error."""
    mean, stderr = mc_moments(f, d, n, stream, **kwargs)
    return mean, float(np.max(stderr))


def twirl_U(X: np.ndarray) -> np.ndarray:
    """Closed form of the average of U X U^dagger: Tr[X] I / d."""
    d = X.shape[0]
    return np.trace(X) * np.eye(d) / d


def twirl_UUconj(Y: np.ndarray, d: int) -> np.ndarray:
    """Closed form of the average of (U (x) U*) Y (U (x) U*)^dagger.

    Projects onto the two invariant subspaces spanned by the maximally
    entangled projector and its complement.
    """
    phi = np.eye(d).reshape(-1)
    P = np.outer(phi, phi) / d
    Q = np.eye(d * d) - P
    return np.trace(Y @ P) * P + np.trace(Y @ Q) * Q / (d * d - 1)
