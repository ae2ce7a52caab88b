"""Calibrated Laplace noise with a deterministic seeded randomness contract.

All randomness in the package flows through numpy's PCG64 generator, seeded
explicitly.  Independent streams are derived from a base seed with
:func:`mix`, a splitmix64 hash chain, so concurrent components never share a
generator.
"""

from __future__ import annotations

import struct
from typing import TYPE_CHECKING

import numpy as np

from .errors import DpGridKmError

if TYPE_CHECKING:
    from .core import PrivacyBudget

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix(seed: int, *streams: int) -> int:
    """Derive an independent 64-bit seed from a base seed and stream indices.

    Chains splitmix64 over the inputs; identical arguments always produce the
    identical derived seed, and distinct stream tuples decorrelate.
    """
    h = _splitmix64(seed & _MASK64)
    for s in streams:
        h = _splitmix64(h ^ (s & _MASK64))
    return h


def float_bits(x: float) -> int:
    """IEEE-754 bit pattern of a float, for use as a mix() stream component."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def laplace_from(rng: np.random.Generator, scale: float, size) -> np.ndarray:
    """Draw Laplace(0, scale) variates from an existing generator.

    Uses the inverse-CDF transform z = -b * sign(u) * ln(1 - 2|u|) with u
    uniform on (-1/2, 1/2), so every sampler in the repo shares one documented
    sampling recipe on top of PCG64 uniforms.
    """
    u = rng.random(size) - 0.5
    # rng.random() can hit 0.0 exactly; nudge u off the closed endpoint.
    u = np.where(u == -0.5, np.nextafter(-0.5, 0.0), u)
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


class LaplaceSampler:
    """Seeded i.i.d. Laplace(0, scale) source.

    A sampler owns its generator state, so it must not be shared across
    threads; derive one sampler per worker with `mix(base_seed, stream)`.
    """

    def __init__(self, scale: float, seed: int):
        if scale <= 0:
            raise DpGridKmError(f"Laplace scale must be positive, got {scale}")
        self.scale = float(scale)
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def sample(self, count: int) -> np.ndarray:
        """Return `count` i.i.d. draws (mean 0, variance 2 * scale**2)."""
        if count < 1:
            raise DpGridKmError(f"sample count must be >= 1, got {count}")
        return laplace_from(self._rng, self.scale, count)


def privatize_counts(true_counts, budget: "PrivacyBudget", seed: int) -> np.ndarray:
    """Add Laplace(0, 1/epsilon) noise to each bin count.

    Adding or removing one record changes exactly one bin by one, so the
    per-bin L1 sensitivity is 1 and scale 1/epsilon yields epsilon-DP.
    Returned counts are real-valued and may be negative; clamping is left to
    the consumer.
    """
    counts = np.asarray(true_counts, dtype=np.float64)
    if counts.ndim != 1:
        raise DpGridKmError("true_counts must be a flat sequence")
    if (counts < 0).any():
        raise DpGridKmError("true_counts must be non-negative")
    sampler = LaplaceSampler(1.0 / budget.epsilon, seed)
    return counts + sampler.sample(counts.size)
