"""Solver for tensor absolute value equations ``A x^{m-1} - |x|^{[m-1]} = b``."""

from .model import (
    StructureCertificate,
    TaveProblem,
    build_shifted,
    certify_strong_m_shift,
    construct_signed_solution,
    gtcp_gap,
    residual,
)
from .ncp import eval_H, eval_Psi, grad_Psi, linearize, phi_fb
from .solver import SolverConfig, SolverReport, multi_start, solve
from .tensor import (
    SignDiagonal,
    Tensor,
    apply_mat,
    apply_vec,
    jacobian_vec,
    random_symmetric,
    sign_diag_product,
    spectral_radius_bounds,
    unit_tensor,
)

__all__ = [
    "SignDiagonal",
    "SolverConfig",
    "SolverReport",
    "StructureCertificate",
    "TaveProblem",
    "Tensor",
    "apply_mat",
    "apply_vec",
    "build_shifted",
    "certify_strong_m_shift",
    "construct_signed_solution",
    "eval_H",
    "eval_Psi",
    "grad_Psi",
    "gtcp_gap",
    "jacobian_vec",
    "linearize",
    "multi_start",
    "phi_fb",
    "random_symmetric",
    "residual",
    "sign_diag_product",
    "solve",
    "spectral_radius_bounds",
    "unit_tensor",
]
