"""Seeded random instances and starting points.

All randomness comes from numpy's PCG64 generator. A master seed is split
into independent sub-streams with ``SeedSequence(seed, spawn_key=(stream, *index))``:

======  ===========================================
stream  use
======  ===========================================
0       instance data (tensors, planted solutions)
1       type-I starting points, ``N(0, 1)``
2       type-II perturbations, ``U(-0.3, 0.3)``
======  ===========================================

The optional ``index`` distinguishes repeated draws within a stream, for
example the k-th instance of an experiment.
"""

from __future__ import annotations

import numpy as np

from .model import TaveProblem, construct_signed_solution, build_shifted, residual
from .tensor import SignDiagonal, abs_power, apply_vec, random_symmetric

INSTANCE_STREAM = 0
START_STREAM = 1
PERTURB_STREAM = 2

TYPE2_HALF_WIDTH = 0.3


def rng_for(seed: int, stream: int, *index: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError(f"a nonnegative integer seed is required, got {seed!r}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), *map(int, index)))
    return np.random.Generator(np.random.PCG64(ss))


def type1_starts(n: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Standard normal starting points."""
    return [rng.standard_normal(n) for _ in range(count)]


def type2_start(x_known, rng: np.random.Generator, half_width: float = TYPE2_HALF_WIDTH) -> np.ndarray:
    """Known solution plus independent ``U(-half_width, half_width)`` noise."""
    x_known = np.asarray(x_known, dtype=float)
    return x_known + rng.uniform(-half_width, half_width, size=x_known.shape)


def planted_sym_nonneg(m: int, n: int, rng: np.random.Generator):
    """Symmetric A with entries in [0, 1] and b = A x*^{m-1} - |x*|^{[m-1]} for x* in [0, 1]^n.

    Returns ``(P, x_star)``.
    """
    A = random_symmetric(m, n, rng)
    x_star = rng.uniform(0.0, 1.0, size=n)
    b = apply_vec(A, x_star) - abs_power(x_star, m - 1)
    return TaveProblem(A, b), x_star


def shifted_m(m: int, n: int, rng: np.random.Generator, margin: float = 0.01):
    """``A = c I - B`` for a random symmetric ``B`` in [0, 1]; returns ``(A, c)``."""
    B = random_symmetric(m, n, rng)
    return build_shifted(B, margin)


def cd_construct(m: int, n: int, rng: np.random.Generator, signs: SignDiagonal | None = None, z_star=None):
    """Random symmetric ``C >= 0``, ``z* in [0, 1]^n`` and random signs, combined
    into a solvable instance. Returns ``(P, x_star, C, D, z_star)``."""
    C = random_symmetric(m, n, rng)
    if z_star is None:
        z_star = rng.uniform(0.0, 1.0, size=n)
    if signs is None:
        signs = SignDiagonal(tuple(rng.choice([-1, 1], size=n).tolist()))
    A, x_star, b = construct_signed_solution(C, signs, z_star)
    return TaveProblem(A, b), x_star, C, signs, np.asarray(z_star, dtype=float)


def max_residual(P: TaveProblem, x) -> float:
    return float(np.max(np.abs(residual(P, x))))
