"""Low-level random draws shared by the mechanisms and the kernel fallback.

Every draw consumes ``Generator.random`` doubles in a fixed order so the
compiled kernels, which read the same BitGenerator through its C capsule,
reproduce these values exactly.
"""

import numpy as np


def gumbel(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard Gumbel draws ``-log(-log(U))`` from ``size`` uniforms."""
    u = rng.random(size)
    with np.errstate(divide="ignore"):
        return -np.log(-np.log(u))


def gumbel_argmax(keys_without_noise: np.ndarray, rng: np.random.Generator) -> int:
    """Index of ``max(keys + Gumbel)``; ties resolve to the first index."""
    keys = keys_without_noise + gumbel(rng, keys_without_noise.shape[0])
    return int(np.argmax(keys))


def laplace_from_uniform(r: np.ndarray, scale: float) -> np.ndarray:
    """Inverse-CDF Laplace transform of uniforms ``r`` in (0, 1)."""
    u = r - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def uniform_open(rng: np.random.Generator, size: int | None = None):
    """Uniform draws on the open interval (0, 1); exact zeros are redrawn."""
    if size is None:
        r = rng.random()
        while r == 0.0:
            r = rng.random()
        return r
    r = rng.random(size)
    zeros = np.flatnonzero(r == 0.0)
    while zeros.size:
        r[zeros] = rng.random(zeros.size)
        zeros = zeros[r[zeros] == 0.0]
    return r
