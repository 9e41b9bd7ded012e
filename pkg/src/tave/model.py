"""The tensor absolute value equation ``A x^{m-1} - |x|^{[m-1]} = b``.

Besides residual evaluation this module holds the complementarity maps
``F = (A + I) x^{m-1} - b`` and ``G = (A - I) x^{m-1} - b``, the structural
existence certificates, and the sign-diagonal solution construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import (
    SignDiagonal,
    Tensor,
    abs_power,
    apply_vec,
    sign_diag_product,
    sign_power,
    spectral_radius_bounds,
    unit_tensor,
)

STRONG_M = "strong-M-shift-certified"
M_BOUNDARY = "M-shift-boundary"
NOT_CERTIFIED = "not-certified"


@dataclass(frozen=True)
class TaveProblem:
    A: Tensor
    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.shape != (self.A.dim,):
            raise ValueError(f"b must have length {self.A.dim}, got shape {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.order

    @property
    def n(self) -> int:
        return self.A.dim


@dataclass(frozen=True)
class GtcpGap:
    min_F: float
    min_G: float
    inner_product: float

    def is_solution(self, tol: float = 1e-9) -> bool:
        return self.min_F >= -tol and self.min_G >= -tol and abs(self.inner_product) <= tol


@dataclass(frozen=True)
class StructureCertificate:
    is_z_tensor: bool
    shift_c: float | None
    B_remainder: Tensor | None
    rho_upper: float | None
    verdict: str

    def to_dict(self) -> dict:
        return {
            "is_z_tensor": self.is_z_tensor,
            "shift_c": self.shift_c,
            "rho_upper": self.rho_upper,
            "verdict": self.verdict,
        }


def residual(P: TaveProblem, x) -> np.ndarray:
    """``A x^{m-1} - |x|^{[m-1]} - b``."""
    Ax = apply_vec(P.A, x)
    return Ax - abs_power(x, P.m - 1) - P.b


def eval_F(P: TaveProblem, x) -> np.ndarray:
    return apply_vec(P.A, x) + sign_power(x, P.m - 1) - P.b


def eval_G(P: TaveProblem, x) -> np.ndarray:
    return apply_vec(P.A, x) - sign_power(x, P.m - 1) - P.b


def eval_FG(P: TaveProblem, x) -> tuple[np.ndarray, np.ndarray]:
    """F and G sharing one tensor product."""
    Ax = apply_vec(P.A, x) - P.b
    xp = sign_power(x, P.m - 1)
    return Ax + xp, Ax - xp


def gtcp_gap(P: TaveProblem, x) -> GtcpGap:
    """Complementarity gap: x solves the equation iff F >= 0, G >= 0 and F.G = 0."""
    F, G = eval_FG(P, x)
    return GtcpGap(float(F.min()), float(G.min()), float(F @ G))


def _offdiagonal_mask(order: int, dim: int) -> np.ndarray:
    mask = np.ones((dim,) * order, dtype=bool)
    for i in range(dim):
        mask[(i,) * order] = False
    return mask


def is_z_tensor(A: Tensor) -> bool:
    """Nonnegative diagonal and nonpositive off-diagonal entries."""
    if np.any(A.diagonal() < 0):
        return False
    if A.layout == "symmetric":
        return all(v <= 0.0 for k, v in A.entries().items() if len(set(k)) > 1)
    return bool(np.all(A.dense[_offdiagonal_mask(A.order, A.dim)] <= 0.0))


def _boundary_tol(rho_upper: float) -> float:
    return 1e-8 * (1.0 + rho_upper)


def certify_strong_m_shift(A: Tensor, max_rounds: int = 10) -> StructureCertificate:
    """Try to write ``A = c I - B`` with ``B >= 0`` and ``c - 1 > rho(B)``.

    ``rho(B)`` is bounded by ``max_i (B e^{m-1})_i``. Candidate shifts start
    at the largest diagonal entry (the smallest c keeping B nonnegative) and
    are refined by ``c <- 1 + upper_bound(c I - A)``; the smallest certifying
    candidate is reported. The certificate is sufficient only: an
    overestimated spectral radius can leave a strong M-shift uncertified.
    """
    if not is_z_tensor(A):
        return StructureCertificate(False, None, None, None, NOT_CERTIFIED)
    I = unit_tensor(A.order, A.dim)
    c0 = float(A.diagonal().max())
    candidates = [c0]
    c = c0
    for _ in range(max_rounds):
        B = c * I - A
        c_next = 1.0 + spectral_radius_bounds(B, max_iters=0).upper_bound
        if c_next < c0 or abs(c_next - c) <= 1e-15 * max(1.0, abs(c)):
            break
        c = c_next
        candidates.append(c)

    best = None
    for c in sorted(candidates):
        B = c * I - A
        rho = spectral_radius_bounds(B, max_iters=0).upper_bound
        if c - 1.0 - rho > _boundary_tol(rho):
            return StructureCertificate(True, c, B, rho, STRONG_M)
        if best is None and abs(c - 1.0 - rho) <= _boundary_tol(rho):
            best = StructureCertificate(True, c, B, rho, M_BOUNDARY)
    if best is not None:
        return best
    B = c0 * I - A
    rho = spectral_radius_bounds(B, max_iters=0).upper_bound
    return StructureCertificate(True, c0, B, rho, NOT_CERTIFIED)


def nonnegative_solution_certified(P: TaveProblem, v, atol: float = 0.0) -> bool:
    """Sufficient test for a nonnegative solution at the M-shift boundary.

    Holds when ``b >= 0``, ``A = c I - B`` with ``B >= 0`` and
    ``c = rho(B) + 1`` (certified up to the boundary tolerance), and the
    supplied ``v >= 0`` satisfies ``(A - I) v^{m-1} >= b``. Strong
    M-shifts pass as well, since they imply the weaker condition.
    """
    v = np.asarray(v, dtype=float)
    if np.any(P.b < 0) or np.any(v < 0):
        return False
    cert = certify_strong_m_shift(P.A)
    if cert.verdict == NOT_CERTIFIED:
        return False
    lhs = apply_vec(P.A, v) - sign_power(v, P.m - 1)
    return bool(np.all(lhs >= P.b - atol))


def build_shifted(B: Tensor, margin: float = 0.01) -> tuple[Tensor, float]:
    """``A = c I - B`` with ``c = 1 + (1 + margin) max_i (B e^{m-1})_i``.

    Returns ``(A, c)``; ``A - I`` is then a strong M-tensor.
    """
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    if not B.is_nonnegative():
        raise ValueError("build_shifted needs a nonnegative tensor B")
    if not B.is_symmetric:
        raise ValueError("build_shifted needs a symmetric tensor B")
    B = B.to_symmetric()
    row_max = float(np.max(apply_vec(B, np.ones(B.dim))))
    c = 1.0 + (1.0 + margin) * row_max
    return c * unit_tensor(B.order, B.dim) - B, c


def construct_signed_solution(C: Tensor, D: SignDiagonal, z_star) -> tuple[Tensor, np.ndarray, np.ndarray]:
    """Build a solvable instance from ``(C - I) z*^{m-1} = b`` with ``z* >= 0``.

    Returns ``(A, x_star, b)`` where ``A = C D`` and ``x_star = D z*``
    componentwise, so that ``A x_star^{m-1} - |x_star|^{[m-1]} = b``.
    Requires even order.
    """
    if C.order % 2:
        raise ValueError(f"construction needs even order, got m={C.order}")
    z = np.asarray(z_star, dtype=float)
    if z.shape != (C.dim,):
        raise ValueError(f"z_star must have length {C.dim}")
    if np.any(z < 0):
        raise ValueError("z_star must be componentwise nonnegative")
    b = apply_vec(C, z) - sign_power(z, C.order - 1)
    A = sign_diag_product(C, D)
    x_star = D.as_array() * z
    return A, x_star, b
