"""Minimum-norm least-squares application of (z*B - A)^+ to right-hand sides.

Small problems go through a dense SVD pseudoinverse; large sparse problems
use conjugate-gradient iterations on the normal equations (CGLS), Golub-
Kahan bidiagonalization (LSQR), or a block variant with the trace inner
product for multiple right-hand sides.  All iterative solvers start from
zero, which keeps their limits in the operator's row space and therefore of
minimum norm.  Convergence is measured by the normal-equation residual
||Z^H (b - Z x)|| relative to ||Z^H b||, the quantity that actually vanishes
at a least-squares solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, ProblemSizeError, SolveFailureError
from .pencil import MatrixPencil, ShiftedOperator

__all__ = [
    "LsqConfig",
    "LsqReport",
    "pinv_apply_dense",
    "cgls_solve",
    "lsqr_solve",
    "global_cgls_solve",
    "apply_pseudoinverse",
    "METHODS",
]

METHODS = ("dense-pinv", "cgls", "lsqr", "global-cgls")

# iterations tolerated without a 10% improvement of the best metric so far
_STALL_WINDOW = 50
_STALL_FACTOR = 0.9


@dataclass(frozen=True)
class LsqConfig:
    """Solver selection and stopping rules for pseudoinverse applications.

    max_iters=None means min(m, n) of the pencil at solve time.  The
    crossover guards the dense path: raising it is the caller's explicit
    opt-in to dense solves on larger problems.
    """

    method: str = "dense-pinv"
    rel_tol: float = 1e-14
    max_iters: int | None = None
    size_crossover: int = 1000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        if not 0.0 < self.rel_tol < 1.0:
            raise ConfigurationError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.size_crossover < 1:
            raise ConfigurationError("size_crossover must be >= 1")


@dataclass(frozen=True)
class LsqReport:
    """Outcome of one pseudoinverse application."""

    iterations: int
    final_rel_residual: float
    converged: bool
    stagnated: bool = False
    history: tuple[float, ...] = ()


def _as_block(v, rows: int, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(v, dtype=np.complex128)
    was_vector = arr.ndim == 1
    if was_vector:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise DimensionMismatchError(
            f"{what} must have leading dimension {rows}, got shape {np.shape(v)}"
        )
    return arr, was_vector


def pinv_apply_dense(
    pencil: MatrixPencil,
    z: complex,
    v_block: np.ndarray,
    *,
    size_crossover: int = 1000,
) -> tuple[np.ndarray, LsqReport]:
    """Minimum-norm least-squares solutions via a dense SVD of z*B - A.

    Singular values below eps * max(m, n) * sigma_max are treated as zero.
    Refuses problems with min(m, n) >= size_crossover; raise the crossover
    to override.
    """
    m, n = pencil.shape
    if min(m, n) >= size_crossover:
        raise ProblemSizeError(
            f"dense pseudoinverse disabled for min(m, n) = {min(m, n)} >= "
            f"crossover {size_crossover}; use an iterative method or raise the crossover"
        )
    v, was_vector = _as_block(v_block, m, "right-hand side")
    zmat = ShiftedOperator(pencil, z).dense()
    try:
        u, s, vh = np.linalg.svd(zmat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolveFailureError(f"SVD of the shifted pencil failed: {exc}") from exc
    if s.size and s[0] > 0:
        cutoff = np.finfo(np.float64).eps * max(m, n) * s[0]
        rank = int(np.count_nonzero(s > cutoff))
    else:
        rank = 0
    coeffs = (u[:, :rank].conj().T @ v) / s[:rank, None] if rank else np.zeros((0, v.shape[1]), dtype=np.complex128)
    x = vh[:rank].conj().T @ coeffs
    report = LsqReport(iterations=0, final_rel_residual=0.0, converged=True)
    return (x[:, 0] if was_vector else x), report


class _StallGuard:
    """Stop when the metric fails to improve 10% over 50 consecutive iterations."""

    def __init__(self):
        self.best = math.inf
        self.count = 0

    def update(self, metric: float) -> bool:
        if metric <= _STALL_FACTOR * self.best:
            self.best = metric
            self.count = 0
            return False
        self.count += 1
        return self.count >= _STALL_WINDOW


def cgls_solve(
    pencil: MatrixPencil, z: complex, b: np.ndarray, cfg: LsqConfig
) -> tuple[np.ndarray, LsqReport]:
    """Conjugate gradients on the normal equations, starting from zero."""
    op = ShiftedOperator(pencil, z)
    m, n = op.shape
    bcol, _ = _as_block(b, m, "b")
    b = bcol[:, 0]
    max_iters = cfg.max_iters if cfg.max_iters is not None else min(m, n)

    x = np.zeros(n, dtype=np.complex128)
    r = b.copy()
    s = op.rmatvec(r)
    norm_s0 = np.linalg.norm(s)
    if norm_s0 == 0:
        return x, LsqReport(0, 0.0, True)
    pdir = s.copy()
    gamma = norm_s0**2
    guard = _StallGuard()
    metric = 1.0
    stagnated = False
    history = []
    its = 0
    for its in range(1, max_iters + 1):
        q = op.matvec(pdir)
        qq = np.vdot(q, q).real
        if qq == 0.0:
            its -= 1
            break
        alpha = gamma / qq
        x += alpha * pdir
        r -= alpha * q
        s = op.rmatvec(r)
        gamma_new = np.vdot(s, s).real
        metric = math.sqrt(gamma_new) / norm_s0
        history.append(metric)
        if metric <= cfg.rel_tol:
            break
        if guard.update(metric):
            stagnated = True
            break
        beta = gamma_new / gamma
        gamma = gamma_new
        pdir = s + beta * pdir
    return x, LsqReport(its, metric, metric <= cfg.rel_tol, stagnated, tuple(history))


def lsqr_solve(
    pencil: MatrixPencil, z: complex, b: np.ndarray, cfg: LsqConfig
) -> tuple[np.ndarray, LsqReport]:
    """Golub-Kahan bidiagonalization with the same stopping contract as CGLS."""
    op = ShiftedOperator(pencil, z)
    m, n = op.shape
    bcol, _ = _as_block(b, m, "b")
    b = bcol[:, 0]
    max_iters = cfg.max_iters if cfg.max_iters is not None else min(m, n)

    x = np.zeros(n, dtype=np.complex128)
    beta = np.linalg.norm(b)
    if beta == 0:
        return x, LsqReport(0, 0.0, True)
    u = b / beta
    v = op.rmatvec(u)
    alpha = np.linalg.norm(v)
    if alpha == 0:
        # b is orthogonal to the range; the minimum-norm solution is zero
        return x, LsqReport(0, 0.0, True)
    v = v / alpha
    w = v.copy()
    phibar = beta
    rhobar = alpha
    norm_ar0 = alpha * beta
    guard = _StallGuard()
    stagnated = False
    history = []
    its = 0
    for its in range(1, max_iters + 1):
        u = op.matvec(v) - alpha * u
        beta = np.linalg.norm(u)
        if beta > 0:
            u = u / beta
            vnext = op.rmatvec(u) - beta * v
            alpha_next = np.linalg.norm(vnext)
            if alpha_next > 0:
                v = vnext / alpha_next
        else:
            alpha_next = 0.0
        rho = math.hypot(rhobar, beta)
        c = rhobar / rho
        sn = beta / rho
        theta = sn * alpha_next
        rhobar = -c * alpha_next
        phi = c * phibar
        phibar = sn * phibar
        x += (phi / rho) * w
        w = v - (theta / rho) * w
        metric = phibar * alpha_next * abs(c) / norm_ar0
        history.append(metric)
        if metric <= cfg.rel_tol:
            break
        if beta == 0.0 or alpha_next == 0.0:
            break
        if guard.update(metric):
            stagnated = True
            break
        alpha = alpha_next
    # recurrence estimates drift near the floor; report the true residual
    final = float(np.linalg.norm(op.rmatvec(b - op.matvec(x))) / norm_ar0)
    return x, LsqReport(its, final, final <= cfg.rel_tol, stagnated, tuple(history))


def global_cgls_solve(
    pencil: MatrixPencil, z: complex, v_block: np.ndarray, cfg: LsqConfig
) -> tuple[np.ndarray, LsqReport]:
    """Block CGLS over all right-hand sides with the trace inner product.

    Search coefficients couple the columns through Frobenius inner products;
    with a single column the iterates coincide with cgls_solve.  Convergence
    is declared on ||Z^H R||_F / ||Z^H V||_F.
    """
    op = ShiftedOperator(pencil, z)
    m, n = op.shape
    v, was_vector = _as_block(v_block, m, "right-hand side")
    max_iters = cfg.max_iters if cfg.max_iters is not None else min(m, n)

    x = np.zeros((n, v.shape[1]), dtype=np.complex128)
    r = v.copy()
    s = op.rmatvec(r)
    norm_s0 = np.linalg.norm(s)
    if norm_s0 == 0:
        return (x[:, 0] if was_vector else x), LsqReport(0, 0.0, True)
    pdir = s.copy()
    gamma = norm_s0**2
    guard = _StallGuard()
    metric = 1.0
    stagnated = False
    history = []
    its = 0
    for its in range(1, max_iters + 1):
        q = op.matvec(pdir)
        qq = np.vdot(q, q).real
        if qq == 0.0:
            its -= 1
            break
        alpha = gamma / qq
        x += alpha * pdir
        r -= alpha * q
        s = op.rmatvec(r)
        gamma_new = np.vdot(s, s).real
        metric = math.sqrt(gamma_new) / norm_s0
        history.append(metric)
        if metric <= cfg.rel_tol:
            break
        if guard.update(metric):
            stagnated = True
            break
        beta = gamma_new / gamma
        gamma = gamma_new
        pdir = s + beta * pdir
    x_out = x[:, 0] if was_vector else x
    return x_out, LsqReport(its, metric, metric <= cfg.rel_tol, stagnated, tuple(history))


def apply_pseudoinverse(
    pencil: MatrixPencil, z: complex, v_block: np.ndarray, cfg: LsqConfig
) -> tuple[np.ndarray, LsqReport]:
    """Apply (z*B - A)^+ to a block with the configured method."""
    v, was_vector = _as_block(v_block, pencil.num_rows, "right-hand side")
    if cfg.method == "dense-pinv":
        x, report = pinv_apply_dense(pencil, z, v, size_crossover=cfg.size_crossover)
    elif cfg.method == "global-cgls":
        x, report = global_cgls_solve(pencil, z, v, cfg)
    else:
        solver = cgls_solve if cfg.method == "cgls" else lsqr_solve
        cols = []
        reports = []
        for j in range(v.shape[1]):
            xj, rj = solver(pencil, z, v[:, j], cfg)
            cols.append(xj)
            reports.append(rj)
        x = np.column_stack(cols)
        report = LsqReport(
            iterations=max(r.iterations for r in reports),
            final_rel_residual=max(r.final_rel_residual for r in reports),
            converged=all(r.converged for r in reports),
            stagnated=any(r.stagnated for r in reports),
        )
    return (x[:, 0] if was_vector else x), report
