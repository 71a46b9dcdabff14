"""Naive square-ization baselines for nonsquare pencils.

Each baseline turns the m-by-n pencil into a square one — by a random
one-sided projection or by zero padding — and hands it to a dense
generalized eigensolver.  They are cheap at desk scale and serve as the
comparison points for the projection solver: they may silently miss
eigenvalues or pollute the spectrum, which the harness records.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np
import scipy.linalg

from ._rng import complex_standard_normal, stream
from .contour import ContourConfig, EigenPair, EigenPairSet, solve
from .errors import DimensionMismatchError, ProblemSizeError, SolveFailureError
from .pencil import MatrixPencil, rrn

__all__ = ["BaselineKind", "run_baseline", "DENSE_BASELINE_MAX_DIM"]

DENSE_BASELINE_MAX_DIM = 2000

# eigenvectors with (almost) no support in the original coordinates cannot
# be scored; their residual is reported as infinite
_VECTOR_SUPPORT_RTOL = 1e-12


class BaselineKind(Enum):
    F1_RIGHT_PROJECT = "f1"
    F2_ZERO_PAD_ROWS = "f2"
    F3_LEFT_PROJECT = "f3"
    F4_ZERO_PAD_COLS = "f4"


def _square_pencil_and_recovery(pencil, kind, seed):
    """Build the square pencil and the map from its eigenvectors to length n."""
    m, n = pencil.shape
    a, b = pencil.dense_arrays()
    if kind in (BaselineKind.F1_RIGHT_PROJECT, BaselineKind.F2_ZERO_PAD_ROWS):
        if not m < n:
            raise DimensionMismatchError(
                f"{kind.value} requires m < n, got shape {pencil.shape}"
            )
    else:
        if not m > n:
            raise DimensionMismatchError(
                f"{kind.value} requires m > n, got shape {pencil.shape}"
            )

    if kind is BaselineKind.F1_RIGHT_PROJECT:
        v = complex_standard_normal(stream(seed, "baseline-probe"), (n, m))
        return a @ v, b @ v, lambda y: v @ y
    if kind is BaselineKind.F2_ZERO_PAD_ROWS:
        pad = np.zeros((n - m, n), dtype=np.complex128)
        return np.vstack([a, pad]), np.vstack([b, pad]), lambda y: y
    if kind is BaselineKind.F3_LEFT_PROJECT:
        v = complex_standard_normal(stream(seed, "baseline-probe"), (n, m))
        return v @ a, v @ b, lambda y: y
    pad = np.zeros((m, m - n), dtype=np.complex128)
    return np.hstack([a, pad]), np.hstack([b, pad]), lambda y: y[:n]


def _score_pairs(pencil, region, lam_vec_pairs):
    center, radius = complex(region[0]), float(region[1])
    pairs = []
    for lam, x in lam_vec_pairs:
        norm_full = np.linalg.norm(x)
        if not np.isfinite(lam):
            pairs.append(
                EigenPair(
                    eigenvalue=complex(math.inf, 0.0),
                    vector=x / norm_full if norm_full else x,
                    rrn=math.nan,
                    in_region=False,
                    finite=False,
                )
            )
            continue
        if norm_full <= _VECTOR_SUPPORT_RTOL:
            residual = math.inf
            vec = x
        else:
            vec = x / norm_full
            residual = rrn(pencil, lam, vec)
        pairs.append(
            EigenPair(
                eigenvalue=lam,
                vector=vec,
                rrn=residual,
                in_region=abs(lam - center) <= radius,
                finite=True,
            )
        )
    pairs.sort(key=lambda p: abs(p.eigenvalue - center) if p.finite else math.inf)
    return EigenPairSet(pairs)


def run_baseline(
    pencil: MatrixPencil,
    kind: BaselineKind,
    region: tuple[complex, float],
    seed: int,
    *,
    contour_cfg: ContourConfig | None = None,
    max_dense_dim: int = DENSE_BASELINE_MAX_DIM,
) -> EigenPairSet:
    """Solve the squared-up pencil and score pairs against the original one.

    With ``contour_cfg`` given (projection baselines only), the square
    pencil is handed to the projection solver instead of the dense
    eigensolver — the rational-filter variant of the same baseline.
    Residuals are always evaluated on the original pencil.
    """
    kind = BaselineKind(kind)
    m, n = pencil.shape
    if max(m, n) > max_dense_dim:
        raise ProblemSizeError(
            f"baselines are dense-only, max(m, n) <= {max_dense_dim} required, got {(m, n)}"
        )
    a_sq, b_sq, recover = _square_pencil_and_recovery(pencil, kind, seed)

    if contour_cfg is not None:
        if kind in (BaselineKind.F2_ZERO_PAD_ROWS, BaselineKind.F4_ZERO_PAD_COLS):
            raise DimensionMismatchError(
                "the rational-filter variant applies to the projection baselines only"
            )
        square = MatrixPencil(a_sq, b_sq)
        inner = solve(square, contour_cfg)
        lam_vec = [
            (p.eigenvalue, recover(p.vector)) for p in inner.pairs if p.finite
        ]
        return _score_pairs(pencil, region, lam_vec)

    try:
        w, vr = scipy.linalg.eig(a_sq, b_sq, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolveFailureError(f"dense baseline eigensolve failed: {exc}") from exc
    alphas, betas = w[0], w[1]
    floor = 1e-8 * max(float(np.max(np.abs(alphas))), np.finfo(float).tiny)
    lam_vec = []
    for j in range(alphas.size):
        if abs(betas[j]) <= floor:
            lam_vec.append((math.inf, recover(vr[:, j])))
        else:
            lam_vec.append((complex(alphas[j] / betas[j]), recover(vr[:, j])))
    return _score_pairs(pencil, region, lam_vec)
