"""Discrete random variables for one weak SRK step.

Streams are counter based: path ``p`` lives in block ``p // BLOCK_SIZE`` at
lane ``p % BLOCK_SIZE``.  Each block owns a Philox generator keyed by
``(seed, block)`` and every draw produces a full block of values, so the value
seen by a path depends only on ``(seed, p, draw index)``, never on how many
paths are simulated or how work is split between threads.

Indices ``k, l`` of Wiener components are 0-based throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import IndexOutOfRange, SupportTooLarge

BLOCK_SIZE = 1 << 16
MAX_ENUMERATED_M = 6

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class WeakIncrements:
    """One step's realization; arrays are ``(m,)`` or batched ``(n, m)``."""

    h: float
    ihat: np.ndarray
    itilde: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.ihat.shape[-1]


class BlockStream:
    """Random numbers for one block of ``BLOCK_SIZE`` consecutive paths."""

    def __init__(self, seed: int, block: int):
        self.seed = int(seed)
        self.block = int(block)
        self.draws = 0
        bitgen = np.random.Philox(key=np.array([self.seed & _SEED_MASK, self.block], dtype=np.uint64))
        self._gen = np.random.Generator(bitgen)

    def uniforms(self, count: int) -> np.ndarray:
        """``(count, BLOCK_SIZE)`` uniforms on [0, 1)."""
        self.draws += count
        return self._gen.random((count, BLOCK_SIZE))

    def normals(self, count: int) -> np.ndarray:
        self.draws += count
        return self._gen.standard_normal((count, BLOCK_SIZE))


class RandomStream:
    """Single-path view on the block stream containing ``path``."""

    def __init__(self, seed: int, path: int):
        self.seed = int(seed)
        self.path = int(path)
        self._lane = self.path % BLOCK_SIZE
        self._block = BlockStream(seed, self.path // BLOCK_SIZE)

    @property
    def draws(self) -> int:
        return self._block.draws

    def uniforms(self, count: int) -> np.ndarray:
        return self._block.uniforms(count)[:, self._lane]

    def normals(self, count: int) -> np.ndarray:
        return self._block.normals(count)[:, self._lane]


def variables_per_step(m: int) -> int:
    """Random variables drawn per step: m three-point, plus m two-point if m > 1."""
    return m if m == 1 else 2 * m


def three_point(u: np.ndarray, h: float) -> np.ndarray:
    """Map uniforms to {-sqrt(3h), 0, +sqrt(3h)} with probabilities 1/6, 2/3, 1/6."""
    r = math.sqrt(3.0 * h)
    return np.where(u < 1.0 / 6.0, -r, np.where(u >= 5.0 / 6.0, r, 0.0))


def two_point(u: np.ndarray, h: float) -> np.ndarray:
    r = math.sqrt(h)
    return np.where(u < 0.5, -r, r)


def increments_from_uniforms(u: np.ndarray, m: int, h: float) -> WeakIncrements:
    """Build increments from uniforms of shape ``(variables_per_step(m), ...)``."""
    ihat = np.moveaxis(three_point(u[:m], h), 0, -1)
    itilde = None
    if m > 1:
        itilde = np.moveaxis(two_point(u[m : 2 * m], h), 0, -1)
    return WeakIncrements(h, ihat, itilde)


def sample_increments(stream, m: int, h: float, counters=None, lanes: int | None = None):
    """Draw one step's increments from ``stream``.

    For a :class:`BlockStream` the result is batched over the first ``lanes``
    paths of the block (all of them by default).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not h > 0:
        raise ValueError("h must be positive")
    nvar = variables_per_step(m)
    u = stream.uniforms(nvar)
    if u.ndim == 2 and lanes is not None:
        u = u[:, :lanes]
    if counters is not None:
        counters.rv_draws += nvar * (u.shape[1] if u.ndim == 2 else 1)
    return increments_from_uniforms(u, m, h)


def ihat_pair(k: int, l: int, inc: WeakIncrements):
    """Iterated-integral substitute for components ``k`` and ``l``."""
    m = inc.m
    if not (0 <= k < m and 0 <= l < m):
        raise IndexOutOfRange(f"indices ({k}, {l}) outside 0..{m - 1}")
    ik = inc.ihat[..., k]
    il = inc.ihat[..., l]
    if k == l:
        return 0.5 * (ik * ik - inc.h)
    rh = math.sqrt(inc.h)
    if k < l:
        return 0.5 * (ik * il - rh * inc.itilde[..., k])
    return 0.5 * (ik * il + rh * inc.itilde[..., l])


def ihat_matrix(inc: WeakIncrements) -> np.ndarray:
    """All pairs at once, shape ``(..., m, m)``, entrywise equal to :func:`ihat_pair`."""
    m = inc.m
    ihat = inc.ihat
    prod = ihat[..., :, None] * ihat[..., None, :]
    out = np.empty_like(prod)
    idx = np.arange(m)
    out[..., idx, idx] = 0.5 * (ihat * ihat - inc.h)
    if m > 1:
        rh = math.sqrt(inc.h)
        tilde = rh * inc.itilde
        k, l = np.triu_indices(m, 1)
        out[..., k, l] = 0.5 * (prod[..., k, l] - tilde[..., k])
        out[..., l, k] = 0.5 * (prod[..., l, k] + tilde[..., k])
    return out


def support_arrays(m: int, h: float) -> tuple[WeakIncrements, np.ndarray]:
    """Full joint support as one batched increment plus its probabilities."""
    if m > MAX_ENUMERATED_M:
        raise SupportTooLarge(f"support of size 6^{m} is too large to enumerate")
    r3 = math.sqrt(3.0 * h)
    r1 = math.sqrt(h)
    hat_vals = ((-r3, 1.0 / 6.0), (0.0, 2.0 / 3.0), (r3, 1.0 / 6.0))
    tilde_vals = ((-r1, 0.5), (r1, 0.5))
    ihat, itilde, probs = [], [], []
    for hats in itertools.product(hat_vals, repeat=m):
        for tildes in itertools.product(tilde_vals, repeat=m):
            ihat.append([v for v, _ in hats])
            itilde.append([v for v, _ in tildes])
            p = 1.0
            for _, q in hats + tildes:
                p *= q
            probs.append(p)
    return WeakIncrements(h, np.array(ihat), np.array(itilde)), np.array(probs)


def enumerate_support(m: int, h: float) -> list[tuple[WeakIncrements, float]]:
    """Every outcome of (ihat, itilde) with its exact probability."""
    batch, probs = support_arrays(m, h)
    return [
        (WeakIncrements(h, batch.ihat[i], batch.itilde[i]), float(probs[i]))
        for i in range(len(probs))
    ]
