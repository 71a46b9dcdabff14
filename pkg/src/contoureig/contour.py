"""Projection eigensolver for interior eigenvalues of nonsquare pencils.

Pseudoinverse resolvents (z_j B - A)^+ are sampled on quadrature nodes of a
circle, accumulated into moment blocks that filter out eigencomponents
outside the disk, compressed by a condition-capped truncated SVD, and
reduced through random left probes to a small dense generalized
eigenproblem whose finite eigenvalues approximate the pencil's eigenvalues
inside the circle.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from ._rng import complex_standard_normal, stream
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    EmptySubspaceError,
    SolveFailureError,
)
from .lsq import LsqConfig, LsqReport, apply_pseudoinverse
from .pencil import MatrixPencil, max_relative_error, rrn

__all__ = [
    "ContourConfig",
    "QuadratureNode",
    "SubspaceBasis",
    "EigenPair",
    "EigenPairSet",
    "StepTimings",
    "ReducedEigenpair",
    "trapezoid_circle",
    "assemble_moments",
    "quadrature_moments",
    "truncate_svd",
    "reduced_gep",
    "solve",
    "solve_timed",
    "convergence_sweep",
    "SweepPoint",
    "UNIT_ROUNDOFF",
]

log = logging.getLogger(__name__)

UNIT_ROUNDOFF = 2.0**-53

# a generalized eigenvalue (alpha, beta) counts as infinite below this ratio
SPURIOUS_BETA_RATIO = 1e-8


@dataclass(frozen=True)
class ContourConfig:
    """Region, quadrature and probe sizes for one solver run.

    probes * moments bounds the subspace dimension and must stay below
    min(m, n) of the pencil (checked at solve time).  region_margin widens
    the membership disk by that fraction of the radius.
    """

    center: complex
    radius: float
    num_quad: int = 48
    probes: int = 4
    moments: int = 2
    lsq: LsqConfig = field(default_factory=LsqConfig)
    seed: int = 0
    region_margin: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError(f"radius must be positive, got {self.radius}")
        if self.num_quad < 2:
            raise ConfigurationError(f"need at least 2 quadrature points, got {self.num_quad}")
        if self.probes < 1 or self.moments < 1:
            raise ConfigurationError("probes and moments must be >= 1")
        if self.region_margin <= -1.0:
            raise ConfigurationError("region_margin must exceed -1")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        if not 0 <= int(self.seed) <= 2**64 - 1:
            raise ConfigurationError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "center", complex(self.center))


@dataclass(frozen=True)
class QuadratureNode:
    z: complex
    w: complex


def trapezoid_circle(center: complex, radius: float, n: int) -> list[QuadratureNode]:
    """Midpoint-angle trapezoidal nodes and weights on a circle.

    Nodes are z_j = center + radius * exp(i * (2j - 1) * pi / n) for
    j = 1..n, with weights w_j = (z_j - center) / n, the exact trapezoidal
    discretization of the scaled contour integral (1 / 2 pi i) * integral.
    """
    if n < 2:
        raise ConfigurationError(f"need at least 2 quadrature points, got {n}")
    j = np.arange(1, n + 1)
    theta = (2 * j - 1) * math.pi / n
    z = center + radius * np.exp(1j * theta)
    w = (z - center) / n
    return [QuadratureNode(complex(zj), complex(wj)) for zj, wj in zip(z, w)]


@dataclass(frozen=True)
class NodeSolveInfo:
    """Per-node solver outcome from the moment assembly."""

    index: int
    z: complex
    report: LsqReport


def _node_solutions(pencil, nodes, v, lsq_cfg, threads):
    def solve_node(node):
        return apply_pseudoinverse(pencil, node.z, v, lsq_cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_node, nodes))
    else:
        results = [solve_node(node) for node in nodes]
    return results


def assemble_moments(
    pencil: MatrixPencil, cfg: ContourConfig, v: np.ndarray
) -> tuple[np.ndarray, list[NodeSolveInfo]]:
    """Accumulate the filtered blocks S_k = sum_j w_j z_j^k (z_j B - A)^+ V.

    Each node's pseudoinverse application is computed once and reused for
    every moment order.  Node solves may run on a thread pool, but the
    accumulation is a reduction in fixed node order, so results do not
    depend on the thread count.  Non-converged node solves are collected
    into the returned reports; more than a quarter of them aborts the
    assembly.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 2 or v.shape[0] != pencil.num_rows:
        raise DimensionMismatchError(
            f"probe block must be {pencil.num_rows} x L, got shape {v.shape}"
        )
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError("probe block contains non-finite entries")
    nodes = trapezoid_circle(cfg.center, cfg.radius, cfg.num_quad)
    results = _node_solutions(pencil, nodes, v, cfg.lsq, cfg.threads)

    infos = [
        NodeSolveInfo(index=j, z=nodes[j].z, report=rep)
        for j, (_, rep) in enumerate(results)
    ]
    failures = [info for info in infos if not info.report.converged]
    if len(failures) > cfg.num_quad / 4:
        raise SolveFailureError(
            f"{len(failures)} of {cfg.num_quad} quadrature-node solves did not "
            f"converge; refusing to assemble moments from unreliable solutions"
        )
    if failures:
        log.warning(
            "%d of %d node solves did not converge (worst residual %.2e)",
            len(failures),
            cfg.num_quad,
            max(f.report.final_rel_residual for f in failures),
        )

    n, L = pencil.num_cols, v.shape[1]
    stacked = np.stack([y for y, _ in results])  # (N, n, L)
    weights = np.array([node.w for node in nodes], dtype=np.complex128)
    zs = np.array([node.z for node in nodes], dtype=np.complex128)
    blocks = []
    for k in range(cfg.moments):
        coeff = weights * zs**k
        blocks.append(np.tensordot(coeff, stacked, axes=(0, 0)))
    s_tilde = np.hstack(blocks)
    assert s_tilde.shape == (n, L * cfg.moments)
    return s_tilde, infos


def quadrature_moments(
    pencil: MatrixPencil,
    center: complex,
    radius: float,
    num_quad: int,
    order: int,
    lsq_cfg: LsqConfig | None = None,
) -> list[np.ndarray]:
    """Full n-by-m quadrature moment matrices for orders 0..order-1.

    Applies the node pseudoinverses to the identity, so only use on small
    problems (reference computations and tests).
    """
    m = pencil.num_rows
    cfg = ContourConfig(
        center=center,
        radius=radius,
        num_quad=num_quad,
        probes=m,
        moments=order,
        lsq=lsq_cfg if lsq_cfg is not None else LsqConfig(),
    )
    s_tilde, _ = assemble_moments(pencil, cfg, np.eye(m, dtype=np.complex128))
    n = pencil.num_cols
    return [s_tilde[:, k * m : (k + 1) * m] for k in range(order)]


@dataclass(frozen=True)
class SubspaceBasis:
    """Moment blocks and their condition-capped truncated SVD."""

    s_tilde: np.ndarray
    u1: np.ndarray
    sigma1: np.ndarray
    v1: np.ndarray
    tau: int


def truncate_svd(s_tilde: np.ndarray, cond_cap: float = 1.0 / UNIT_ROUNDOFF) -> SubspaceBasis:
    """Keep the longest leading singular block with condition number <= cond_cap."""
    s_tilde = np.ascontiguousarray(s_tilde, dtype=np.complex128)
    try:
        u, s, vh = np.linalg.svd(s_tilde, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolveFailureError(f"SVD of the moment block failed: {exc}") from exc
    if s.size == 0 or s[0] == 0.0:
        raise EmptySubspaceError(
            "moment blocks are numerically zero: no eigenvalues in the region "
            "or deficient probes"
        )
    tau = int(np.count_nonzero(s >= s[0] / cond_cap))
    return SubspaceBasis(
        s_tilde=s_tilde,
        u1=u[:, :tau],
        sigma1=s[:tau].copy(),
        v1=vh[:tau].conj().T,
        tau=tau,
    )


@dataclass(frozen=True)
class ReducedEigenpair:
    """One eigenpair of the probe-reduced dense pencil, in homogeneous form."""

    alpha: complex
    beta: complex
    y: np.ndarray
    finite: bool


def reduced_gep(
    pencil: MatrixPencil, u1: np.ndarray, t_tilde: np.ndarray
) -> list[ReducedEigenpair]:
    """Eigenpairs of the tau-by-tau pencil obtained with plain-transposed probes.

    Pairs with |beta| vanishing relative to the largest |alpha| are flagged
    as infinite rather than dropped.
    """
    u1 = np.asarray(u1, dtype=np.complex128)
    t_tilde = np.asarray(t_tilde, dtype=np.complex128)
    if u1.ndim != 2 or u1.shape[0] != pencil.num_cols:
        raise DimensionMismatchError("basis must be n x tau")
    if t_tilde.shape != (pencil.num_rows, u1.shape[1]):
        raise DimensionMismatchError("left probe must be m x tau")
    if u1.shape[1] < 1:
        raise DimensionMismatchError("basis must have at least one column")
    # plain transpose on the probe block, not the conjugate transpose
    ar = t_tilde.T @ (pencil.a @ u1)
    br = t_tilde.T @ (pencil.b @ u1)
    try:
        w, vr = scipy.linalg.eig(ar, br, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolveFailureError(f"dense generalized eigensolve failed: {exc}") from exc
    alphas, betas = w[0], w[1]
    beta_floor = SPURIOUS_BETA_RATIO * max(np.max(np.abs(alphas)), np.finfo(float).tiny)
    return [
        ReducedEigenpair(
            alpha=complex(alphas[j]),
            beta=complex(betas[j]),
            y=vr[:, j].copy(),
            finite=bool(abs(betas[j]) > beta_floor),
        )
        for j in range(alphas.size)
    ]


@dataclass(frozen=True)
class EigenPair:
    """One computed eigenpair with its residual quality and region membership."""

    eigenvalue: complex
    vector: np.ndarray
    rrn: float
    in_region: bool
    finite: bool = True


@dataclass
class EigenPairSet:
    """Computed eigenpairs, sorted by distance from the region center."""

    pairs: list[EigenPair]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, idx):
        return self.pairs[idx]

    @property
    def in_region(self) -> list[EigenPair]:
        return [p for p in self.pairs if p.in_region]

    @property
    def found_in_region(self) -> int:
        return len(self.in_region)

    def in_region_eigenvalues(self) -> np.ndarray:
        return np.array([p.eigenvalue for p in self.in_region], dtype=np.complex128)

    def max_rrn(self) -> float:
        """Largest residual among in-region pairs (NaN when none)."""
        inside = self.in_region
        if not inside:
            return math.nan
        return max(p.rrn for p in inside)


@dataclass(frozen=True)
class StepTimings:
    """Wall-clock seconds per solver stage."""

    setup: float
    moments: float
    truncation: float
    reduced_eig: float
    recovery: float

    @property
    def total(self) -> float:
        return self.setup + self.moments + self.truncation + self.reduced_eig + self.recovery

    def shares(self) -> dict[str, float]:
        total = self.total
        if total <= 0:
            return {name: 0.0 for name in ("setup", "moments", "truncation", "reduced_eig", "recovery")}
        return {
            "setup": self.setup / total,
            "moments": self.moments / total,
            "truncation": self.truncation / total,
            "reduced_eig": self.reduced_eig / total,
            "recovery": self.recovery / total,
        }


def _validate_solve_config(pencil: MatrixPencil, cfg: ContourConfig) -> None:
    m, n = pencil.shape
    if cfg.probes >= min(m, n):
        raise ConfigurationError(
            f"probe count {cfg.probes} must stay below min(m, n) = {min(m, n)}"
        )
    if cfg.moments >= n:
        raise ConfigurationError(
            f"moment order {cfg.moments} must stay below n = {n}"
        )
    if cfg.probes * cfg.moments >= min(m, n):
        raise ConfigurationError(
            f"subspace budget probes*moments = {cfg.probes * cfg.moments} must "
            f"stay below min(m, n) = {min(m, n)}"
        )


def solve_timed(pencil: MatrixPencil, cfg: ContourConfig) -> tuple[EigenPairSet, StepTimings]:
    """Run the full projection solve and report per-stage timings."""
    _validate_solve_config(pencil, cfg)
    m = pencil.num_rows

    t0 = time.perf_counter()
    v = complex_standard_normal(stream(cfg.seed, "probe-v"), (m, cfg.probes))
    t1 = time.perf_counter()

    s_tilde, infos = assemble_moments(pencil, cfg, v)
    t2 = time.perf_counter()

    try:
        basis = truncate_svd(s_tilde)
    except EmptySubspaceError:
        # nothing detectable inside the region: report an empty result
        t3 = time.perf_counter()
        timings = StepTimings(t1 - t0, t2 - t1, t3 - t2, 0.0, 0.0)
        return EigenPairSet([]), timings
    t3 = time.perf_counter()

    t_tilde = complex_standard_normal(stream(cfg.seed, "probe-t"), (m, basis.tau))
    raw = reduced_gep(pencil, basis.u1, t_tilde)
    t4 = time.perf_counter()

    if basis.tau < basis.s_tilde.shape[1]:
        log.info(
            "moment block rank %d below subspace budget %d",
            basis.tau,
            basis.s_tilde.shape[1],
        )

    limit = cfg.radius * (1.0 + cfg.region_margin)
    pairs = []
    for pair in raw:
        x = basis.u1 @ pair.y
        x = x / np.linalg.norm(x)
        if pair.finite:
            lam = pair.alpha / pair.beta
            residual = rrn(pencil, lam, x)
            inside = abs(lam - cfg.center) <= limit
        else:
            lam = complex(math.inf, 0.0)
            residual = math.nan
            inside = False
        pairs.append(
            EigenPair(eigenvalue=lam, vector=x, rrn=residual, in_region=inside, finite=pair.finite)
        )
    pairs.sort(key=lambda p: abs(p.eigenvalue - cfg.center) if p.finite else math.inf)
    t5 = time.perf_counter()

    timings = StepTimings(t1 - t0, t2 - t1, t3 - t2, t4 - t3, t5 - t4)
    return EigenPairSet(pairs), timings


def solve(pencil: MatrixPencil, cfg: ContourConfig) -> EigenPairSet:
    """Compute all finite eigenvalues in the disk and their eigenvectors."""
    result, _ = solve_timed(pencil, cfg)
    return result


@dataclass(frozen=True)
class SweepPoint:
    """One row of a quadrature-refinement sweep."""

    num_quad: int
    max_rerr: float
    max_rrn: float
    seconds: float


def convergence_sweep(
    pencil: MatrixPencil,
    cfg: ContourConfig,
    n_values,
    truth=None,
    repeats: int = 1,
) -> list[SweepPoint]:
    """Re-solve with identical seeds for each quadrature size in n_values.

    With ground truth available the worst relative eigenvalue error against
    the true in-region spectrum is reported, otherwise NaN.  ``repeats``
    reruns each size and keeps the fastest time (the accuracy columns are
    identical across repeats by determinism).
    """
    if repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    reference = None
    if truth is not None:
        reference = truth.eigs_inside(cfg.center, cfg.radius)
    rows = []
    for nq in n_values:
        cfg_n = replace(cfg, num_quad=int(nq))
        best = math.inf
        result = None
        for _ in range(repeats):
            start = time.perf_counter()
            result = solve(pencil, cfg_n)
            best = min(best, time.perf_counter() - start)
        rerr = math.nan
        if reference is not None and len(reference):
            rerr = max_relative_error(result.in_region_eigenvalues(), reference)
        rows.append(
            SweepPoint(
                num_quad=int(nq),
                max_rerr=rerr,
                max_rrn=result.max_rrn(),
                seconds=best,
            )
        )
    return rows
