"""Independent reference computations for generated pencils.

Everything here is brute force and dense: closed-form moment matrices
reconstructed from the stored block transforms, reference spectra from a
dense generalized eigensolver on squared-up pencils, and the probe-reduced
pencil built from exact moments.  These paths never share code with the
quadrature solver, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ._rng import complex_standard_normal, stream
from .errors import (
    ContourProximityError,
    GeneratorSpecError,
    MatrixDataError,
    ProblemSizeError,
    SolveFailureError,
)
from .pencil import GroundTruth, MatrixPencil

__all__ = [
    "KroneckerFactors",
    "oracle_moment",
    "oracle_dense_eig",
    "hankel_reduced_pencil",
    "finite_eigenvalues",
    "jordan_block",
    "DENSE_ORACLE_MAX_DIM",
]

DENSE_ORACLE_MAX_DIM = 500

# |beta| below this fraction of the largest |alpha| marks an eigenvalue as
# infinite or spurious in dense reference solves
SPURIOUS_BETA_RATIO = 1e-8

_COND_LIMIT = 1e12


def jordan_block(lam: complex, size: int) -> np.ndarray:
    block = np.eye(size, dtype=np.complex128) * lam
    block += np.diag(np.ones(size - 1), 1) if size > 1 else 0.0
    return block


def finite_eigenvalues(
    a: np.ndarray,
    b: np.ndarray,
    *,
    spurious_ratio: float = SPURIOUS_BETA_RATIO,
    return_vectors: bool = False,
):
    """Finite generalized eigenvalues of a square dense pencil.

    Pairs whose |beta| is negligible against the largest |alpha| are
    classified as infinite/spurious and dropped.
    """
    try:
        w, vr = scipy.linalg.eig(a, b, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolveFailureError(f"dense generalized eigensolve failed: {exc}") from exc
    alphas, betas = w[0], w[1]
    floor = spurious_ratio * max(float(np.max(np.abs(alphas))), np.finfo(float).tiny)
    keep = np.abs(betas) > floor
    lams = alphas[keep] / betas[keep]
    if return_vectors:
        return lams, vr[:, keep]
    return lams


@dataclass(frozen=True)
class KroneckerFactors:
    """Canonical transforms of a generated pencil, with block bookkeeping.

    p_matrix and q_matrix are the square left/right transforms that reduce
    the pencil to its block-canonical form; rows of p_matrix and columns of
    q_matrix are grouped finite blocks first, then nilpotent blocks, then
    singular padding.
    """

    p_matrix: np.ndarray
    q_matrix: np.ndarray
    finite_blocks: tuple[tuple[complex, int], ...]
    nilpotent_sizes: tuple[int, ...]
    num_right_singular: int
    num_left_singular: int

    @classmethod
    def from_ground_truth(cls, truth: GroundTruth) -> "KroneckerFactors":
        spec = truth.spec
        if spec.nu > 0:
            raise GeneratorSpecError(
                "oracle reconstruction requires index-0 singular blocks only"
            )
        m, n = spec.num_rows, spec.num_cols
        if max(m, n) > DENSE_ORACLE_MAX_DIM:
            raise ProblemSizeError(
                f"oracle limited to max(m, n) <= {DENSE_ORACLE_MAX_DIM}, got {(m, n)}"
            )
        r1 = truth.p_inv.toarray() if sp.issparse(truth.p_inv) else np.asarray(truth.p_inv)
        r2 = truth.q_inv.toarray() if sp.issparse(truth.q_inv) else np.asarray(truth.q_inv)
        for name, mat in (("left", r1), ("right", r2)):
            cond = np.linalg.cond(mat, 1)
            if not np.isfinite(cond) or cond > _COND_LIMIT:
                raise MatrixDataError(
                    f"{name} embedding factor too ill-conditioned for the oracle "
                    f"(1-norm condition {cond:.2e})"
                )
        p = np.linalg.inv(r1).astype(np.complex128)
        q = np.linalg.inv(r2).astype(np.complex128)
        return cls(
            p_matrix=p,
            q_matrix=q,
            finite_blocks=spec.finite_eigs,
            nilpotent_sizes=spec.nilpotent_sizes,
            num_right_singular=spec.q,
            num_left_singular=spec.r,
        )

    @property
    def eta(self) -> int:
        return sum(size for _, size in self.finite_blocks)

    @property
    def rho(self) -> int:
        return sum(self.nilpotent_sizes)


def _orthonormal_range(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space via pivoted QR."""
    if x.shape[1] == 0:
        return np.zeros((x.shape[0], 0), dtype=np.complex128)
    qf, rf, _ = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(rf))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((x.shape[0], 0), dtype=np.complex128)
    tol = max(x.shape) * np.finfo(float).eps * diag[0]
    rank = int(np.count_nonzero(diag > tol))
    return qf[:, :rank]


def _in_region_blocks(kf: KroneckerFactors, center: complex, radius: float):
    selected = []
    offset = 0
    for lam, size in kf.finite_blocks:
        dist = abs(lam - center)
        if abs(dist - radius) < 1e-8 * radius:
            raise ContourProximityError(
                f"eigenvalue {lam} lies within 1e-8*radius of the contour"
            )
        if dist < radius:
            selected.append((lam, size, offset))
        offset += size
    return selected


def oracle_moment(kf: KroneckerFactors, region: tuple[complex, float], k: int) -> np.ndarray:
    """Closed-form n-by-m moment matrix of order k from the stored transforms.

    Assembles projected eigenvector blocks for the eigenvalues inside the
    disk and the k-th power of their joint Jordan matrix; no quadrature is
    involved.
    """
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    center, radius = complex(region[0]), float(region[1])
    if radius <= 0:
        raise ValueError("radius must be positive")
    selected = _in_region_blocks(kf, center, radius)
    n = kf.q_matrix.shape[0]
    m = kf.p_matrix.shape[0]
    if not selected:
        return np.zeros((n, m), dtype=np.complex128)

    eta, rho = kf.eta, kf.rho
    q_cols = [q for _, size, off in selected for q in range(off, off + size)]
    q_omega = kf.q_matrix[:, q_cols]
    p_omega = kf.p_matrix[q_cols, :]

    q_sing = kf.q_matrix[:, eta + rho : eta + rho + kf.num_right_singular]
    p_sing = kf.p_matrix[m - kf.num_left_singular :, :]

    basis_q = _orthonormal_range(q_sing)
    q_hat = q_omega - basis_q @ (basis_q.conj().T @ q_omega)
    basis_p = _orthonormal_range(p_sing.conj().T)
    p_hat = p_omega - (p_omega @ basis_p) @ basis_p.conj().T

    j_omega = scipy.linalg.block_diag(*[jordan_block(lam, size) for lam, size, _ in selected])
    return q_hat @ np.linalg.matrix_power(j_omega, k) @ p_hat


def _padded_square(a: np.ndarray, b: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    m, n = a.shape
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1.0) / np.sqrt(m * n)
    if m < n:
        pad_a = scale * complex_standard_normal(rng, (n - m, n))
        pad_b = scale * complex_standard_normal(rng, (n - m, n))
        return np.vstack([a, pad_a]), np.vstack([b, pad_b])
    pad_a = scale * complex_standard_normal(rng, (m, m - n))
    pad_b = scale * complex_standard_normal(rng, (m, m - n))
    return np.hstack([a, pad_a]), np.hstack([b, pad_b])


def oracle_dense_eig(
    pencil: MatrixPencil,
    *,
    seed: int = 0,
    agree_tol: float = 1e-8,
) -> np.ndarray:
    """Reference finite spectrum of a pencil from dense eigensolves.

    Square pencils are solved directly.  Nonsquare pencils are squared up
    twice with independent random paddings in the singular directions;
    eigenvalues that reappear in both runs (within agree_tol) are genuine,
    everything unstable across the paddings is discarded as spurious.
    """
    m, n = pencil.shape
    if max(m, n) > DENSE_ORACLE_MAX_DIM:
        raise ProblemSizeError(
            f"dense reference limited to max(m, n) <= {DENSE_ORACLE_MAX_DIM}, got {(m, n)}"
        )
    a, b = pencil.dense_arrays()
    if m == n:
        return np.asarray(finite_eigenvalues(a, b))

    rng = stream(seed, "oracle-padding")
    runs = []
    for _ in range(2):
        a_sq, b_sq = _padded_square(a, b, rng)
        runs.append(np.asarray(finite_eigenvalues(a_sq, b_sq)))
    first, second = runs
    stable = [
        lam
        for lam in first
        if second.size and np.min(np.abs(second - lam)) <= agree_tol * (1.0 + abs(lam))
    ]
    return np.array(stable, dtype=np.complex128)


def hankel_reduced_pencil(
    kf: KroneckerFactors,
    region: tuple[complex, float],
    w_probe: np.ndarray,
    v_probe: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Probe-compressed pair (W M0 V, W M1 V) built from exact moments.

    The finite spectrum of z * (W M0 V) - (W M1 V) reproduces the in-region
    eigenvalues when the probes have full contact with the projected
    eigenvector blocks; observed rank deficiency is reported as a warning,
    not an error.
    """
    w_probe = np.asarray(w_probe, dtype=np.complex128)
    v_probe = np.asarray(v_probe, dtype=np.complex128)
    m0 = oracle_moment(kf, region, 0)
    m1 = oracle_moment(kf, region, 1)
    if w_probe.ndim != 2 or w_probe.shape[1] != m0.shape[0]:
        raise MatrixDataError("left probe must be L x n")
    if v_probe.ndim != 2 or v_probe.shape[0] != m0.shape[1]:
        raise MatrixDataError("right probe must be m x L")
    reduced0 = w_probe @ m0 @ v_probe
    reduced1 = w_probe @ m1 @ v_probe
    t = sum(size for _, size, _ in _in_region_blocks(kf, complex(region[0]), float(region[1])))
    rank0 = np.linalg.matrix_rank(reduced0)
    if rank0 < min(t, reduced0.shape[0]):
        warnings.warn(
            f"compressed moment of order 0 has rank {rank0} < {min(t, reduced0.shape[0])}; "
            "probes may be deficient",
            stacklevel=2,
        )
    return reduced0, reduced1
