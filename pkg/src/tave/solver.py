"""Inexact Levenberg-Marquardt method for ``H(x) = 0`` with Armijo line search.

Each iteration solves ``(Q^T Q + mu I) d = -Q^T H + r``, falls back to the
steepest descent direction ``-grad Psi`` when ``d`` is not a sufficient
descent direction, and backtracks with step sizes ``2^-i`` on the merit
function ``Psi = 0.5 ||H||^2``.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .model import TaveProblem
from .ncp import eval_Psi, linearize

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max-iter"
STALLED = "stalled-line-search"
STATIONARY = "stationary-nonzero"

LM = "lm"
GRADIENT = "gradient-fallback"

# ||grad Psi|| below this with ||H|| > epsilon ends the run as stationary-nonzero
STATIONARY_TOL = 1e-12
_JITTER = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the iteration.

    ``mu`` is either a constant or a sequence indexed by iteration (the last
    value is held past its end). ``alpha_schedule`` likewise; ``None`` means
    ``alpha_k = min(0.5, 1 / (k + 2))``. ``jacobian`` is ``"true"`` or
    ``"literal"``.
    """

    epsilon: float = 1e-6
    rho_descent: float = 1e-10
    p: float = 2.1
    beta: float = 1e-4
    mu: float | Sequence[float] = 0.3
    max_iter: int = 300
    max_backtracks: int = 50
    inexact: bool = False
    alpha_schedule: Sequence[float] | None = None
    jacobian: str = "true"

    def __post_init__(self):
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if not self.p > 2.0:
            raise ValueError(f"p must exceed 2, got {self.p}")
        if not self.rho_descent > 0.0:
            raise ValueError(f"rho_descent must be positive, got {self.rho_descent}")
        if not self.epsilon >= 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.max_iter < 0 or self.max_backtracks < 0:
            raise ValueError("max_iter and max_backtracks must be nonnegative")
        mus = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mus.size == 0 or np.any(mus < 0) or not np.all(np.isfinite(mus)):
            raise ValueError(f"mu must be nonnegative and finite, got {self.mu}")
        if not np.isscalar(self.mu):
            object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        if self.alpha_schedule is not None:
            alphas = tuple(float(a) for a in self.alpha_schedule)
            if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
                raise ValueError("alpha_schedule entries must lie in (0, 1)")
            object.__setattr__(self, "alpha_schedule", alphas)
        if self.jacobian not in ("true", "literal"):
            raise ValueError(f"jacobian must be 'true' or 'literal', got {self.jacobian!r}")

    def mu_at(self, k: int) -> float:
        if np.isscalar(self.mu):
            return float(self.mu)
        return self.mu[min(k, len(self.mu) - 1)]

    def alpha_at(self, k: int) -> float:
        if self.alpha_schedule is None:
            return min(0.5, 1.0 / (k + 2))
        return self.alpha_schedule[min(k, len(self.alpha_schedule) - 1)]

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if isinstance(out["mu"], tuple):
            out["mu"] = list(out["mu"])
        if out["alpha_schedule"] is not None:
            out["alpha_schedule"] = list(out["alpha_schedule"])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown solver config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class TraceRecord:
    k: int
    norm_H: float
    norm_gradPsi: float
    psi: float
    x: list[float] | None = None
    step: float | None = None
    source: str | None = None
    r_norm: float | None = None
    alpha: float | None = None


@dataclass
class SolverReport:
    status: str
    x_final: np.ndarray
    iterations: int
    trace: list[TraceRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def final_norm_H(self) -> float:
        return self.trace[-1].norm_H

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "x_final": [float(v) for v in self.x_final],
            "iterations": self.iterations,
            "final_norm_H": self.final_norm_H,
            "wall_time": self.wall_time,
            "trace": [dataclasses.asdict(r) for r in self.trace],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolverReport":
        return cls(
            status=data["status"],
            x_final=np.array(data["x_final"], dtype=float),
            iterations=int(data["iterations"]),
            trace=[TraceRecord(**r) for r in data["trace"]],
            wall_time=float(data.get("wall_time", 0.0)),
        )


def lm_direction(Q, H, gradPsi, mu: float, inexact: bool = False, alpha: float = 0.5) -> tuple[np.ndarray, float]:
    """Solve ``(Q^T Q + mu I) d = -Q^T H + r``; return ``(d, ||r||)``.

    Exact mode uses a Cholesky factorization (``r = 0``); with ``mu == 0``
    the system is solved as the least-squares problem ``Q d = -H``. Inexact
    mode runs conjugate gradients until ``||r|| <= alpha ||grad Psi||``.
    """
    Q = np.asarray(Q, dtype=float)
    H = np.asarray(H, dtype=float)
    g = np.asarray(gradPsi, dtype=float)
    n = Q.shape[1]
    if Q.shape[0] != H.shape[0] or g.shape != (n,):
        raise ValueError("dimension mismatch in LM system")
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    rhs = -(Q.T @ H)
    M = Q.T @ Q + mu * np.eye(n)
    if inexact:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            return np.zeros(n), 0.0
        # ||rhs|| = ||grad Psi||; aim inside the bound, the true residual is rechecked below
        d, _ = scipy.sparse.linalg.cg(M, rhs, rtol=0.5 * alpha, atol=0.0, maxiter=10 * n)
        r_norm = float(np.linalg.norm(M @ d - rhs))
        if r_norm <= alpha * gnorm:
            return d, r_norm
        log.debug("CG residual %.3e above bound %.3e; using exact solve", r_norm, alpha * gnorm)
    if mu == 0.0:
        d = np.linalg.lstsq(Q, -H, rcond=None)[0]
        return d, 0.0
    try:
        factor = scipy.linalg.cho_factor(M)
    except np.linalg.LinAlgError:
        try:
            factor = scipy.linalg.cho_factor(M + _JITTER * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("LM matrix with mu > 0 is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs), 0.0


def safeguard_direction(d, gradPsi, rho_descent: float, p: float) -> tuple[np.ndarray, str]:
    """Keep ``d`` if ``grad^T d <= -rho ||d||^p``, else use ``-grad``.

    A zero ``d`` is rejected whenever the gradient is nonzero.
    """
    d = np.asarray(d, dtype=float)
    g = np.asarray(gradPsi, dtype=float)
    dnorm = float(np.linalg.norm(d))
    if dnorm > 0.0 and float(g @ d) <= -rho_descent * dnorm**p:
        return d, LM
    return -g, GRADIENT


def armijo_search(P: TaveProblem, x, d, gradPsi, beta: float, max_backtracks: int, psi0: float | None = None):
    """Smallest ``i >= 0`` with ``Psi(x + 2^-i d) <= Psi(x) + beta 2^-i grad^T d``.

    A trial point must also lower ``Psi`` strictly: once ``beta t grad^T d``
    drops below the rounding level of ``Psi(x)`` the sufficient-decrease test
    alone would accept a step that changes nothing. Returns
    ``(t, i, psi_new)``, or ``None`` if no step is accepted within
    ``max_backtracks`` halvings.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    slope = float(np.asarray(gradPsi) @ d)
    if not slope < 0.0:
        raise ValueError(f"not a descent direction: grad^T d = {slope}")
    if psi0 is None:
        psi0 = eval_Psi(P, x)
    t = 1.0
    for i in range(max_backtracks + 1):
        psi = eval_Psi(P, x + t * d)
        if psi <= psi0 + beta * t * slope and psi < psi0:
            return t, i, psi
        t *= 0.5
    return None


def solve(P: TaveProblem, x0, cfg: SolverConfig | None = None, keep_x: bool = True) -> SolverReport:
    """Run the Levenberg-Marquardt iteration from ``x0``.

    The run stops as ``converged`` once ``||H|| <= epsilon``; as
    ``stationary-nonzero`` when the merit gradient vanishes first; as
    ``stalled-line-search`` when backtracking fails; and as ``max-iter``
    after ``cfg.max_iter`` steps.
    """
    cfg = cfg or SolverConfig()
    x = np.array(x0, dtype=float)
    if x.shape != (P.n,):
        raise ValueError(f"x0 must have length {P.n}, got shape {x.shape}")
    start = time.perf_counter()
    trace: list[TraceRecord] = []
    status = MAX_ITER
    k = 0
    while True:
        lin = linearize(P, x, cfg.jacobian)
        g = lin.grad
        norm_H = float(np.linalg.norm(lin.H))
        rec = TraceRecord(k, norm_H, float(np.linalg.norm(g)), lin.psi, x.tolist() if keep_x else None)
        trace.append(rec)
        if norm_H <= cfg.epsilon:
            status = CONVERGED
            break
        if rec.norm_gradPsi <= STATIONARY_TOL:
            status = STATIONARY
            break
        if k >= cfg.max_iter:
            status = MAX_ITER
            break
        alpha = cfg.alpha_at(k)
        d, r_norm = lm_direction(lin.Q, lin.H, g, cfg.mu_at(k), cfg.inexact, alpha)
        d, source = safeguard_direction(d, g, cfg.rho_descent, cfg.p)
        rec.source, rec.r_norm = source, r_norm
        if cfg.inexact:
            rec.alpha = alpha
        found = armijo_search(P, x, d, g, cfg.beta, cfg.max_backtracks, psi0=lin.psi)
        if found is None:
            status = STALLED
            break
        t, _, _ = found
        rec.step = t
        x = x + t * d
        k += 1
    return SolverReport(status, x, k, trace, time.perf_counter() - start)


@dataclass
class Cluster:
    representative: np.ndarray
    count: int
    members: list[int]
    max_norm_H: float
    mean_iterations: float


@dataclass
class MultiStartResult:
    clusters: list[Cluster]
    attempts: int
    reports: list[SolverReport]

    @property
    def converged(self) -> int:
        return sum(c.count for c in self.clusters)

    def attempts_label(self) -> str:
        return f"{self.converged}/{self.attempts}"


def cluster_solutions(points: Sequence[np.ndarray], tol: float = 1e-4) -> list[list[int]]:
    """Greedy clustering in input order; a point joins the first cluster whose
    first member is within ``tol`` in the infinity norm."""
    groups: list[list[int]] = []
    for i, p in enumerate(points):
        for grp in groups:
            if np.max(np.abs(points[grp[0]] - p)) <= tol:
                grp.append(i)
                break
        else:
            groups.append([i])
    return groups


def multi_start(
    P: TaveProblem,
    starts: Sequence,
    cfg: SolverConfig | None = None,
    tol: float = 1e-4,
    workers: int | None = None,
) -> MultiStartResult:
    """Solve from every start and cluster the converged solutions.

    Results do not depend on ``workers``: runs are independent and merged in
    start order.
    """
    cfg = cfg or SolverConfig()
    starts = [np.asarray(s, dtype=float) for s in starts]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda s: solve(P, s, cfg, keep_x=False), starts))
    else:
        reports = [solve(P, s, cfg, keep_x=False) for s in starts]
    ok = [i for i, r in enumerate(reports) if r.converged]
    groups = cluster_solutions([reports[i].x_final for i in ok], tol)
    clusters = []
    for grp in groups:
        members = [ok[j] for j in grp]
        clusters.append(
            Cluster(
                representative=reports[members[0]].x_final,
                count=len(members),
                members=members,
                max_norm_H=max(reports[i].final_norm_H for i in members),
                mean_iterations=float(np.mean([reports[i].iterations for i in members])),
            )
        )
    return MultiStartResult(clusters, len(starts), reports)
