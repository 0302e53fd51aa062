from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

DEFAULT_POINTS = 64
DEFAULT_SEED = 42

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def _radical_inverse(i: int, base: int) -> float:
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def halton(count: int, dim: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Halton points in [0,1)^dim with a seeded Cranley-Patterson shift."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton sampling supports at most {len(_PRIMES)} dimensions")
    rng = np.random.default_rng(seed)
    shift = rng.random(dim)
    pts = np.array([[_radical_inverse(i + 1, _PRIMES[d]) for d in range(dim)] for i in range(count)])
    return np.mod(pts + shift, 1.0)


def sample_points(domain: Sequence[Tuple[float, float]], count: int = DEFAULT_POINTS,
                  seed: int = DEFAULT_SEED) -> List[np.ndarray]:
    box = np.asarray(domain, dtype=float)
    lo, hi = box[:, 0], box[:, 1]
    unit = halton(count, box.shape[0], seed)
    return [lo + (hi - lo) * u for u in unit]
