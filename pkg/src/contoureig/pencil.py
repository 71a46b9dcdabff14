"""Complex m-by-n matrix pencils: data model, structured test generation, metrics.

A pencil is the one-parameter matrix family ``z*B - A`` with ``A`` and ``B``
complex matrices of identical shape, dense or sparse.  Nonsquare pencils are
singular; their finite spectrum is carried by Jordan-like diagonal blocks of
a canonical block form, padded by zero rows/columns and hidden behind an
invertible two-sided embedding.  The generator here produces such pencils
together with their exact spectrum and eigenvectors, which the rest of the
package uses as ground truth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ._rng import complex_standard_normal, stream
from .errors import (
    DimensionMismatchError,
    GeneratorSpecError,
    MatrixDataError,
)

__all__ = [
    "MatrixPencil",
    "ShiftedOperator",
    "Embedding",
    "KroneckerSpec",
    "GroundTruth",
    "make_kronecker_pencil",
    "place_eigenvalues",
    "sample_finite_eigs",
    "sample_nilpotent_sizes",
    "pencil_apply",
    "pencil_apply_adjoint",
    "rrn",
    "relative_error",
    "max_relative_error",
]


# ---------------------------------------------------------------------------
# matrix validation

def _as_complex_matrix(mat, what: str):
    """Normalize to a complex128 dense ndarray or CSR array, validating entries."""
    if sp.issparse(mat):
        out = sp.csr_array(mat).astype(np.complex128)
        out.sum_duplicates()
        out.eliminate_zeros()
        if out.nnz and not np.all(np.isfinite(out.data)):
            raise MatrixDataError(f"{what} contains non-finite entries")
        return out
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2:
        raise MatrixDataError(f"{what} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixDataError(f"{what} contains non-finite entries")
    return arr


def _frobenius(mat) -> float:
    if sp.issparse(mat):
        return float(np.linalg.norm(mat.data)) if mat.nnz else 0.0
    return float(np.linalg.norm(mat))


@dataclass(frozen=True)
class MatrixPencil:
    """The pair (A, B) defining the pencil z*B - A.

    Both matrices must share one m-by-n shape.  Storage may be dense
    (ndarray) or sparse (any scipy format; normalized to CSR).
    """

    a: object
    b: object

    def __post_init__(self):
        a = _as_complex_matrix(self.a, "A")
        b = _as_complex_matrix(self.b, "B")
        if a.shape != b.shape:
            raise DimensionMismatchError(
                f"A and B must have equal shapes, got {a.shape} and {b.shape}"
            )
        if min(a.shape) < 1:
            raise MatrixDataError(f"pencil must have positive dimensions, got {a.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]

    @property
    def num_cols(self) -> int:
        return self.a.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.a) or sp.issparse(self.b)

    @cached_property
    def norm_a(self) -> float:
        """Frobenius norm of A (computed once, cached)."""
        return _frobenius(self.a)

    @cached_property
    def norm_b(self) -> float:
        """Frobenius norm of B (computed once, cached)."""
        return _frobenius(self.b)

    def to_dense(self) -> "MatrixPencil":
        if not self.is_sparse:
            return self
        a = self.a.toarray() if sp.issparse(self.a) else self.a
        b = self.b.toarray() if sp.issparse(self.b) else self.b
        return MatrixPencil(a, b)

    def dense_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (A, B) as dense ndarrays (copies only when sparse)."""
        a = self.a.toarray() if sp.issparse(self.a) else self.a
        b = self.b.toarray() if sp.issparse(self.b) else self.b
        return a, b


class ShiftedOperator:
    """Matrix-free actions of Z = z*B - A and its conjugate transpose.

    Adjoint factors are formed once at construction so repeated rmatvec
    calls inside iterative solvers stay cheap.
    """

    def __init__(self, pencil: MatrixPencil, z: complex):
        self.pencil = pencil
        self.z = complex(z)
        self.shape = pencil.shape
        a, b = pencil.a, pencil.b
        self._a, self._b = a, b
        if sp.issparse(a):
            self._ah = sp.csr_array(a.conj().T)
        else:
            self._ah = a.conj().T
        if sp.issparse(b):
            self._bh = sp.csr_array(b.conj().T)
        else:
            self._bh = b.conj().T

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """(z*B - A) @ x for a vector or block x."""
        if x.shape[0] != self.shape[1]:
            raise DimensionMismatchError(
                f"operand has leading dimension {x.shape[0]}, expected {self.shape[1]}"
            )
        return self.z * (self._b @ x) - self._a @ x

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """(z*B - A)^H @ y for a vector or block y."""
        if y.shape[0] != self.shape[0]:
            raise DimensionMismatchError(
                f"operand has leading dimension {y.shape[0]}, expected {self.shape[0]}"
            )
        return np.conj(self.z) * (self._bh @ y) - self._ah @ y

    def dense(self) -> np.ndarray:
        a, b = self.pencil.dense_arrays()
        return self.z * b - a


def pencil_apply(pencil: MatrixPencil, z: complex, x: np.ndarray) -> np.ndarray:
    """Apply z*B - A to x without materializing the shifted matrix."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != pencil.num_cols:
        raise DimensionMismatchError(
            f"x has length {x.shape[0]}, expected {pencil.num_cols}"
        )
    return z * (pencil.b @ x) - pencil.a @ x


def pencil_apply_adjoint(pencil: MatrixPencil, z: complex, y: np.ndarray) -> np.ndarray:
    """Apply (z*B - A)^H to y."""
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != pencil.num_rows:
        raise DimensionMismatchError(
            f"y has length {y.shape[0]}, expected {pencil.num_rows}"
        )
    return np.conj(z) * (pencil.b.conj().T @ y) - pencil.a.conj().T @ y


# ---------------------------------------------------------------------------
# residual metrics

def rrn(pencil: MatrixPencil, eigenvalue: complex, x: np.ndarray) -> float:
    """Relative residual norm ||A x - lam B x||_2 / (||A||_F + |lam| ||B||_F)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != pencil.num_cols:
        raise DimensionMismatchError(
            f"x has length {x.shape[0]}, expected {pencil.num_cols}"
        )
    if np.linalg.norm(x) == 0:
        raise MatrixDataError("eigenvector must be nonzero")
    residual = pencil.a @ x - eigenvalue * (pencil.b @ x)
    return float(np.linalg.norm(residual) / (pencil.norm_a + abs(eigenvalue) * pencil.norm_b))


def relative_error(lambda_computed: complex, lambda_true: complex) -> float:
    """|computed - true| / |true|; falls back to absolute error when true == 0."""
    if lambda_true == 0:
        warnings.warn(
            "reference eigenvalue is zero; returning absolute error", stacklevel=2
        )
        return abs(lambda_computed)
    return abs(lambda_computed - lambda_true) / abs(lambda_true)


def max_relative_error(computed: Sequence[complex], reference: Sequence[complex]) -> float:
    """Worst relative distance from each computed value to its nearest reference.

    Returns NaN when either list is empty (nothing to compare).
    """
    computed = list(computed)
    reference = list(reference)
    if not computed or not reference:
        return math.nan
    return max(min(relative_error(c, t) for t in reference) for c in computed)


# ---------------------------------------------------------------------------
# structured test-pencil generation

@dataclass(frozen=True)
class Embedding:
    """How the block-canonical core is hidden inside the generated pencil.

    "dense"     two-sided multiplication by square standard-normal factors;
    "givens"    products of random plane rotations applied until the pencil's
                nonzero density reaches ``density`` (factors stay orthogonal);
    "identity"  no embedding; the raw block form is returned (for tests).
    """

    kind: str = "dense"
    density: float = 0.001

    def __post_init__(self):
        if self.kind not in ("dense", "givens", "identity"):
            raise GeneratorSpecError(f"unknown embedding kind {self.kind!r}")
        if self.kind == "givens" and not 0.0 < self.density <= 1.0:
            raise GeneratorSpecError(
                f"target density must lie in (0, 1], got {self.density}"
            )

    @classmethod
    def dense(cls) -> "Embedding":
        return cls("dense")

    @classmethod
    def givens(cls, density: float = 0.001) -> "Embedding":
        return cls("givens", density)

    @classmethod
    def identity(cls) -> "Embedding":
        return cls("identity")


@dataclass(frozen=True)
class KroneckerSpec:
    """Block recipe for a generated pencil.

    finite_eigs      (eigenvalue, block size) pairs; block size > 1 produces
                     a Jordan chain on that eigenvalue.
    nilpotent_sizes  sizes of the blocks carrying infinite eigenvalues.
    q                number of zero columns (index-0 right singular blocks).
    r                number of zero rows (index-0 left singular blocks).
    nu               minimal index of one optional left singular block with
                     positive index (0 = absent); adds nu columns and nu+1 rows.
    """

    finite_eigs: tuple[tuple[complex, int], ...] = ()
    nilpotent_sizes: tuple[int, ...] = ()
    q: int = 0
    r: int = 0
    nu: int = 0
    embed: Embedding = field(default_factory=Embedding.dense)
    seed: int = 0

    def __post_init__(self):
        eigs = tuple((complex(lam), int(size)) for lam, size in self.finite_eigs)
        sizes = tuple(int(s) for s in self.nilpotent_sizes)
        object.__setattr__(self, "finite_eigs", eigs)
        object.__setattr__(self, "nilpotent_sizes", sizes)
        if any(size < 1 for _, size in eigs):
            raise GeneratorSpecError("finite-eigenvalue block sizes must be >= 1")
        if any(s < 1 for s in sizes):
            raise GeneratorSpecError("nilpotent block sizes must be >= 1")
        if self.q < 0 or self.r < 0 or self.nu < 0:
            raise GeneratorSpecError("q, r and nu must be nonnegative")
        if not 0 <= int(self.seed) <= 2**64 - 1:
            raise GeneratorSpecError("seed must fit in 64 unsigned bits")
        if self.num_rows < 1 or self.num_cols < 1:
            raise GeneratorSpecError("spec produces an empty pencil")

    @property
    def eta(self) -> int:
        """Total finite-eigenvalue multiplicity."""
        return sum(size for _, size in self.finite_eigs)

    @property
    def rho(self) -> int:
        """Total size of the infinite-eigenvalue blocks."""
        return sum(self.nilpotent_sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.finite_eigs)

    @property
    def num_rows(self) -> int:
        extra = self.nu + 1 if self.nu > 0 else 0
        return self.eta + self.rho + self.r + extra

    @property
    def num_cols(self) -> int:
        return self.eta + self.rho + self.q + self.nu


@dataclass(frozen=True)
class GroundTruth:
    """Exact spectral data for a generated pencil.

    finite_eigs     all finite eigenvalues with multiplicity (length eta).
    right_eigvecs   one exact right eigenvector per finite block (n x #blocks).
    p_inv / q_inv   the left/right embedding factors (inverses of the
                    canonical transforms), kept for oracle reconstruction.
    """

    finite_eigs: np.ndarray
    right_eigvecs: np.ndarray
    p_inv: object
    q_inv: object
    spec: KroneckerSpec

    def eigs_inside(self, center: complex, radius: float) -> np.ndarray:
        """Finite eigenvalues lying in the closed disk |z - center| <= radius."""
        mask = np.abs(self.finite_eigs - center) <= radius
        return self.finite_eigs[mask]

    def count_inside(self, center: complex, radius: float) -> int:
        return int(np.count_nonzero(np.abs(self.finite_eigs - center) <= radius))


def _kcf_core(spec: KroneckerSpec) -> tuple[sp.csr_array, sp.csr_array, list[int]]:
    """Assemble the block-canonical core matrices and finite-block column offsets."""
    m, n = spec.num_rows, spec.num_cols
    rows_a, cols_a, vals_a = [], [], []
    rows_b, cols_b, vals_b = [], [], []

    offsets = []
    pos = 0
    for lam, size in spec.finite_eigs:
        offsets.append(pos)
        for j in range(size):
            rows_a.append(pos + j)
            cols_a.append(pos + j)
            vals_a.append(lam)
            rows_b.append(pos + j)
            cols_b.append(pos + j)
            vals_b.append(1.0)
            if j + 1 < size:
                rows_a.append(pos + j)
                cols_a.append(pos + j + 1)
                vals_a.append(1.0)
        pos += size

    for size in spec.nilpotent_sizes:
        for j in range(size):
            rows_a.append(pos + j)
            cols_a.append(pos + j)
            vals_a.append(1.0)
            if j + 1 < size:
                rows_b.append(pos + j)
                cols_b.append(pos + j + 1)
                vals_b.append(1.0)
        pos += size

    # q zero columns follow here; the optional positive-index left singular
    # block sits after them, and index-0 left blocks are trailing zero rows.
    if spec.nu > 0:
        row0 = spec.eta + spec.rho
        col0 = spec.eta + spec.rho + spec.q
        for j in range(spec.nu):
            if j + 1 < spec.nu:
                rows_a.append(row0 + j + 1)
                cols_a.append(col0 + j)
                vals_a.append(1.0)
            rows_b.append(row0 + j)
            cols_b.append(col0 + j)
            vals_b.append(1.0)
        rows_a.append(row0 + spec.nu)
        cols_a.append(col0 + spec.nu - 1)
        vals_a.append(1.0)

    core_a = sp.csr_array(
        sp.coo_array((np.asarray(vals_a, dtype=np.complex128), (rows_a, cols_a)), shape=(m, n))
    )
    core_b = sp.csr_array(
        sp.coo_array((np.asarray(vals_b, dtype=np.complex128), (rows_b, cols_b)), shape=(m, n))
    )
    return core_a, core_b, offsets


def _rotation_chunk(dim: int, rng: np.random.Generator, limit: int) -> sp.csr_array:
    """A product of random plane rotations with pairwise-disjoint planes.

    Planes are drawn one at a time, each uniform over index pairs; the chunk
    is flushed as soon as a plane collides with one already in the chunk, so
    the chunk equals the exact product of the individual rotations.
    """
    used: set[int] = set()
    diag = np.ones(dim)
    rows, cols, vals = [], [], []
    while len(used) // 2 < limit:
        i, j = rng.choice(dim, size=2, replace=False)
        if i in used or j in used:
            break
        used.update((int(i), int(j)))
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        diag[i] = 0.0
        diag[j] = 0.0
        rows.extend((i, i, j, j))
        cols.extend((i, j, i, j))
        vals.extend((c, -s, s, c))
    keep = np.flatnonzero(diag)
    rows.extend(keep)
    cols.extend(keep)
    vals.extend(np.ones(keep.size))
    return sp.csr_array(
        sp.coo_array((np.asarray(vals), (rows, cols)), shape=(dim, dim))
    )


def _givens_embed(core_a, core_b, density, rng_left, rng_right):
    """Apply random rotations on both sides until both A and B hit the density."""
    m, n = core_a.shape
    a = sp.csr_array(core_a, copy=True)
    b = sp.csr_array(core_b, copy=True)
    cells = m * n

    def current_density():
        return min(a.nnz, b.nnz) / cells

    if current_density() > density:
        raise GeneratorSpecError(
            f"target density {density:g} is below the unembedded pencil's "
            f"density {current_density():.3g}; rotations only add fill"
        )
    r1 = sp.eye_array(m, format="csr")
    r2 = sp.eye_array(n, format="csr")
    if max(m, n) < 2 and current_density() < density:
        raise GeneratorSpecError("cannot rotate a 1x1 pencil to a higher density")

    limit = max(1, min(m, n) // 4)
    budget = 512 * (m + n)
    spent = 0
    side_left = True
    while current_density() < density:
        if spent > budget:
            raise GeneratorSpecError(
                f"could not reach density {density:g} within the rotation budget"
            )
        if side_left and m >= 2:
            g = _rotation_chunk(m, rng_left, limit)
            a = sp.csr_array(g @ a)
            b = sp.csr_array(g @ b)
            r1 = sp.csr_array(g @ r1)
        elif not side_left and n >= 2:
            h = _rotation_chunk(n, rng_right, limit)
            a = sp.csr_array(a @ h)
            b = sp.csr_array(b @ h)
            r2 = sp.csr_array(r2 @ h)
        side_left = not side_left
        for mat in (a, b):
            mat.eliminate_zeros()
        spent += limit
    return a, b, r1, r2


def make_kronecker_pencil(spec: KroneckerSpec) -> tuple[MatrixPencil, GroundTruth]:
    """Generate a pencil with the prescribed block structure and its ground truth.

    The core block form carries the finite eigenvalues on (possibly Jordan)
    diagonal blocks and the infinite ones on shift blocks, padded by q zero
    columns and r zero rows (plus the optional positive-index left block).
    The embedding hides this structure behind invertible factors; the exact
    eigenvalues and one right eigenvector per finite block are returned.
    """
    core_a, core_b, offsets = _kcf_core(spec)
    m, n = spec.num_rows, spec.num_cols

    if spec.embed.kind == "identity":
        a, b = core_a.toarray(), core_b.toarray()
        r1 = np.eye(m)
        r2 = np.eye(n)
        eigvecs = np.eye(n, dtype=np.complex128)[:, offsets] if offsets else np.zeros((n, 0), dtype=np.complex128)
    elif spec.embed.kind == "dense":
        r1 = stream(spec.seed, "embed-left").standard_normal((m, m))
        r2 = stream(spec.seed, "embed-right").standard_normal((n, n))
        a = r1 @ core_a.toarray() @ r2
        b = r1 @ core_b.toarray() @ r2
        if offsets:
            rhs = np.eye(n)[:, offsets]
            eigvecs = scipy.linalg.solve(r2, rhs).astype(np.complex128)
        else:
            eigvecs = np.zeros((n, 0), dtype=np.complex128)
    else:
        a, b, r1, r2 = _givens_embed(
            core_a,
            core_b,
            spec.embed.density,
            stream(spec.seed, "embed-left"),
            stream(spec.seed, "embed-right"),
        )
        # rotation products are orthogonal, so the inverse is the transpose
        if offsets:
            eigvecs = np.asarray(r2.T.todense())[:, offsets].astype(np.complex128)
        else:
            eigvecs = np.zeros((n, 0), dtype=np.complex128)

    pencil = MatrixPencil(a, b)
    expected_m = spec.eta + spec.rho + spec.r + (spec.nu + 1 if spec.nu else 0)
    expected_n = spec.eta + spec.rho + spec.q + spec.nu
    if pencil.shape != (expected_m, expected_n):
        raise GeneratorSpecError(
            f"generated shape {pencil.shape} violates the block dimension identity "
            f"({expected_m}, {expected_n})"
        )

    finite = np.concatenate(
        [np.full(size, lam, dtype=np.complex128) for lam, size in spec.finite_eigs]
    ) if spec.finite_eigs else np.zeros(0, dtype=np.complex128)
    truth = GroundTruth(
        finite_eigs=finite,
        right_eigvecs=eigvecs,
        p_inv=r1,
        q_inv=r2,
        spec=spec,
    )
    return pencil, truth


def sample_finite_eigs(
    eta: int,
    seed: int,
    *,
    center: complex = 0j,
    radius: float = 1.0,
    forced_inside: int | None = None,
    clear_band: tuple[float, float] = (0.5, 2.5),
) -> list[complex]:
    """Draw eta eigenvalues with standard-normal parts, kept clear of the circle.

    Entries whose distance to ``center`` falls strictly inside
    ``clear_band`` (in units of ``radius``) are redrawn, so every sampled
    eigenvalue is decisively inside or outside the disk.  With
    ``forced_inside=t``, the first t entries are placed uniformly in the
    inner disk and the remaining draws are rejected out of the whole band,
    pinning the in-region count to exactly t.
    """
    if eta < 0:
        raise GeneratorSpecError("eta must be nonnegative")
    inner, outer = clear_band
    if not 0.0 < inner < outer:
        raise GeneratorSpecError(f"clear band must satisfy 0 < inner < outer, got {clear_band}")
    if forced_inside is not None and not 0 <= forced_inside <= eta:
        raise GeneratorSpecError("forced_inside must lie in [0, eta]")
    rng = stream(seed, "lambda")
    out: list[complex] = []
    n_inside = 0 if forced_inside is None else forced_inside
    for _ in range(n_inside):
        rho = inner * radius * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * math.pi)
        out.append(center + rho * complex(math.cos(phi), math.sin(phi)))
    lo = 0.0 if forced_inside is None else outer
    for _ in range(eta - n_inside):
        while True:
            lam = complex(complex_standard_normal(rng, ()))
            dist = abs(lam - center) / radius
            if dist <= inner and lo == 0.0:
                break
            if dist >= outer:
                break
        out.append(lam)
    return out


def place_eigenvalues(
    seed: int,
    center: complex,
    radius: float,
    bands: Sequence[tuple[int, float, float]],
) -> list[complex]:
    """Draw eigenvalues uniformly inside prescribed annuli around the center.

    ``bands`` is a sequence of (count, lo, hi) entries with radii in units
    of ``radius``; each entry contributes ``count`` draws uniform over the
    annulus lo <= |z - center|/radius <= hi.  Use bands to control how many
    eigenvalues sit inside a disk and how strongly the outside ones couple
    into a quadrature filter of a given order.
    """
    rng = stream(seed, "lambda")
    out: list[complex] = []
    for count, lo, hi in bands:
        if count < 0 or lo < 0 or hi < lo:
            raise GeneratorSpecError(f"invalid eigenvalue band {(count, lo, hi)}")
        for _ in range(count):
            rho = radius * math.sqrt(rng.uniform(lo**2, hi**2))
            phi = rng.uniform(0.0, 2.0 * math.pi)
            out.append(center + rho * complex(math.cos(phi), math.sin(phi)))
    return out


def sample_nilpotent_sizes(rho: int, seed: int) -> tuple[int, ...]:
    """Random block-size partition with half of rho spent on superdiagonal ones.

    Splits rho into ceil(rho/2) positive parts uniformly at random, so the
    assembled shift blocks carry floor(rho/2) unit superdiagonal entries.
    """
    if rho < 0:
        raise GeneratorSpecError("rho must be nonnegative")
    if rho == 0:
        return ()
    parts = (rho + 1) // 2
    if parts == rho:
        return tuple([1] * rho)
    rng = stream(seed, "nilpotent")
    cuts = np.sort(rng.choice(rho - 1, size=parts - 1, replace=False) + 1)
    edges = np.concatenate(([0], cuts, [rho]))
    return tuple(int(d) for d in np.diff(edges))
