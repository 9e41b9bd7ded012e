"""Fischer-Burmeister reformulation ``H(x) = 0`` and its merit function.

``H_i(x) = phi_FB(F_i(x), G_i(x))`` and ``Psi(x) = 0.5 * ||H(x)||^2``. A
generalized Jacobian element ``Q`` of ``H`` gives ``grad Psi = Q^T H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TaveProblem, eval_FG
from .tensor import jacobian_vec

FISCHER_BURMEISTER = "fischer-burmeister"
MIN = "min"

# exact zeros never occur in floating point; see is_degenerate
DEGENERACY_TOL = 1e-10


def phi_fb(a, b):
    """``a + b - sqrt(a^2 + b^2)``, elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a + b - np.hypot(a, b)


def phi_min(a, b):
    return np.minimum(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def phi(kind: str, a, b):
    """Evaluate an NCP function: zero iff ``a >= 0``, ``b >= 0``, ``a b = 0``."""
    if kind == FISCHER_BURMEISTER:
        return phi_fb(a, b)
    if kind == MIN:
        return phi_min(a, b)
    raise ValueError(f"unknown NCP function {kind!r}")


def _check_fallback(fallback) -> tuple[float, float]:
    va, vb = (float(v) for v in fallback)
    if (1.0 - va) ** 2 + (1.0 - vb) ** 2 > 1.0 + 1e-12:
        raise ValueError(f"fallback {fallback} is not in the FB generalized gradient at the origin")
    return va, vb


def fb_subgradient(a: float, b: float, fallback=(1.0, 1.0), tol: float = DEGENERACY_TOL) -> tuple[float, float]:
    """An element ``(v_a, v_b)`` of the generalized gradient of ``phi_FB`` at ``(a, b)``.

    Away from the origin this is the gradient ``(1 - a/r, 1 - b/r)`` with
    ``r = sqrt(a^2 + b^2)``; within ``tol`` of the origin ``fallback`` is
    returned, which must be of the form ``(1 - xi, 1 - s)`` with
    ``xi^2 + s^2 <= 1``.
    """
    fallback = _check_fallback(fallback)
    r = float(np.hypot(a, b))
    if r <= tol:
        return fallback
    return 1.0 - a / r, 1.0 - b / r


@dataclass(frozen=True)
class DegenerateSet:
    indices: tuple[int, ...]
    indicator: np.ndarray


def degenerate_set(F, G, tol: float = DEGENERACY_TOL) -> DegenerateSet:
    """Indices where F_i and G_i are both zero to within ``tol * (1 + |F_i| + |G_i|)``."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    bound = tol * (1.0 + np.abs(F) + np.abs(G))
    mask = (np.abs(F) <= bound) & (np.abs(G) <= bound)
    return DegenerateSet(tuple(int(i) for i in np.flatnonzero(mask)), mask.astype(float))


def jacobians_FG(P: TaveProblem, x, convention: str = "true") -> tuple[np.ndarray, np.ndarray]:
    """Jacobians of F and G at ``x`` under the given convention."""
    x = np.asarray(x, dtype=float)
    JA = jacobian_vec(P.A, x, convention)
    # derivative of I x^{m-1} = x^{[m-1]} is diagonal
    factor = (P.m - 1) if convention == "true" else 1
    JI = np.diag(factor * x ** (P.m - 2))
    return JA + JI, JA - JI


@dataclass(frozen=True)
class Linearization:
    """Quantities of one solver iterate."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    degenerate: DegenerateSet

    @property
    def psi(self) -> float:
        return 0.5 * float(self.H @ self.H)

    @property
    def grad(self) -> np.ndarray:
        return self.Q.T @ self.H


def _row_weights(F, G, JF, JG, deg: DegenerateSet, tol: float) -> tuple[np.ndarray, np.ndarray]:
    n = len(F)
    wa = np.empty(n)
    wb = np.empty(n)
    z = deg.indicator
    degenerate = set(deg.indices)
    for i in range(n):
        if i in degenerate:
            # directional terms along the degenerate indicator
            dF = float(JF[i] @ z)
            dG = float(JG[i] @ z)
            wa[i], wb[i] = fb_subgradient(dF, dG, tol=tol)
        else:
            r = float(np.hypot(F[i], G[i]))
            wa[i] = 1.0 - F[i] / r
            wb[i] = 1.0 - G[i] / r
    return wa, wb


def linearize(P: TaveProblem, x, convention: str = "true", tol: float = DEGENERACY_TOL) -> Linearization:
    """Evaluate F, G, H and a generalized Jacobian element Q at ``x``.

    ``Q = diag(a) JF + diag(b) JG``; for a non-degenerate row the weights are
    the FB gradient at ``(F_i, G_i)``, for a degenerate row they are built from
    ``(grad F_i . z, grad G_i . z)`` with ``z`` the degenerate indicator, and
    fall back to ``(1, 1)`` when both of those vanish too.
    """
    F, G = eval_FG(P, x)
    H = phi_fb(F, G)
    JF, JG = jacobians_FG(P, x, convention)
    deg = degenerate_set(F, G, tol)
    wa, wb = _row_weights(F, G, JF, JG, deg, tol)
    Q = wa[:, None] * JF + wb[:, None] * JG
    return Linearization(F, G, H, Q, deg)


def eval_H(P: TaveProblem, x) -> np.ndarray:
    F, G = eval_FG(P, x)
    return phi_fb(F, G)


def eval_Psi(P: TaveProblem, x) -> float:
    H = eval_H(P, x)
    return 0.5 * float(H @ H)


def select_Q(P: TaveProblem, x, convention: str = "true") -> np.ndarray:
    return linearize(P, x, convention).Q


def grad_Psi(P: TaveProblem, x, convention: str = "true") -> np.ndarray:
    """``Q^T H(x)``, the gradient of ``Psi`` when ``convention="true"``."""
    return linearize(P, x, convention).grad
