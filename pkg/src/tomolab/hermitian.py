"""Complex Hermitian matrix arithmetic and spectral decompositions.

Matrices are plain complex ``numpy`` arrays.  The one structured value is
:class:`SpectralDecomposition`, which stores the *distinct* eigenvalues of a
Hermitian matrix together with the orthogonal projections onto their
eigenspaces.  Floating-point eigensolvers split degenerate eigenvalues, so
nearby eigenvalues are merged by a relative clustering tolerance before the
projections are formed.

Design envelope: dense double precision, dimensions up to ~1024 (tensor
products are capped there); decompositions are O(d^3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    EigensolveFailure,
    NonHermitianInput,
)

__all__ = [
    "TOL_HERM",
    "TOL_NUM",
    "MAX_TENSOR_DIM",
    "SpectralDecomposition",
    "is_hermitian",
    "require_hermitian",
    "spectral_decompose",
    "tensor_product",
    "tensor_chain",
    "hs_inner",
    "trace_product",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]

TOL_HERM = 1e-9          # Hermitian symmetry check
TOL_NUM = 1e-9           # projection-algebra checks
MAX_TENSOR_DIM = 2 ** 10  # tensor-product size cap


def is_hermitian(mat: np.ndarray, tol: float = TOL_HERM) -> bool:
    """True if ``mat`` equals its conjugate transpose within ``tol`` (absolute)."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol)


def require_hermitian(mat: np.ndarray, tol: float = TOL_HERM) -> np.ndarray:
    """Return ``mat`` as a complex array, raising :class:`NonHermitianInput` if unsymmetric."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {mat.shape}")
    dev = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if dev > tol:
        raise NonHermitianInput(f"matrix deviates from Hermitian symmetry by {dev:.3e}")
    return mat


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (descending) with their eigenspace projections."""

    eigenvalues: np.ndarray                 # shape (r,), real, descending
    projections: tuple = field(repr=False)  # r Hermitian idempotents, each (d, d)
    multiplicities: np.ndarray = field(default=None)

    @property
    def r(self) -> int:
        """Number of distinct eigenvalues."""
        return len(self.eigenvalues)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue-weighted projections."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for lam, proj in zip(self.eigenvalues, self.projections):
            out += lam * proj
        return out

    def cell_traces(self, rho: np.ndarray) -> np.ndarray:
        """Real vector of tr(Q_a rho) over the distinct eigenvalues."""
        return np.array([trace_product(q, rho).real for q in self.projections])


def spectral_decompose(mat: np.ndarray, cluster_tol: float = 1e-9) -> SpectralDecomposition:
    """Decompose a Hermitian matrix into distinct eigenvalues and projections.

    Eigenvalues within ``cluster_tol`` times the spectral norm of each other
    are merged into a single distinct eigenvalue whose projection is the sum
    of the merged rank-one projectors.  Returned eigenvalues are descending.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    mat = require_hermitian(mat)
    try:
        evals, evecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc

    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    gap = cluster_tol * max(scale, 1.0) if scale > 0 else cluster_tol
    # eigh returns ascending order; walk it and cut where the gap exceeds tol
    distinct, projections, mults = [], [], []
    start = 0
    d = mat.shape[0]
    for i in range(1, d + 1):
        if i == d or evals[i] - evals[start] > gap:
            block = evecs[:, start:i]
            projections.append(block @ block.conj().T)
            distinct.append(float(np.mean(evals[start:i])))
            mults.append(i - start)
            start = i
    order = np.argsort(distinct)[::-1]
    return SpectralDecomposition(
        eigenvalues=np.array([distinct[i] for i in order]),
        projections=tuple(projections[i] for i in order),
        multiplicities=np.array([mults[i] for i in order]),
    )


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, capped at ``MAX_TENSOR_DIM``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > MAX_TENSOR_DIM:
        raise DimensionOverflow(f"tensor product dimension {out_dim} exceeds {MAX_TENSOR_DIM}")
    return np.kron(a, b)


def tensor_chain(factors) -> np.ndarray:
    """Left-to-right Kronecker product of a sequence of matrices."""
    factors = list(factors)
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = tensor_product(out, f)
    return out


def hs_inner(a1: np.ndarray, a2: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(a2† a1)."""
    a1 = np.asarray(a1)
    a2 = np.asarray(a2)
    if a1.shape != a2.shape:
        raise DimensionMismatch(f"shapes {a1.shape} and {a2.shape} differ")
    return complex(np.sum(a2.conj() * a1))


def trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    """tr(a @ b) without forming the product matrix."""
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} cannot be multiplied")
    return complex(np.sum(a * b.T))


# --- text serialization ------------------------------------------------------
#
# Format: first line is the dimension d, then d lines of d whitespace-separated
# entries written as "a+bi" / "a-bi" with 17 significant digits, so values
# round-trip exactly in double precision.


def _format_entry(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    sign = "-" if im < 0 or (im == 0 and np.signbit(im)) else "+"
    return f"{re:.17g}{sign}{abs(im):.17g}i"


def _parse_entry(tok: str) -> complex:
    tok = tok.strip()
    try:
        return complex(tok[:-1] + "j") if tok.endswith("i") else complex(tok)
    except ValueError as exc:
        raise ValueError(f"bad matrix entry {tok!r}") from exc


def format_matrix(mat: np.ndarray) -> str:
    mat = np.asarray(mat, dtype=complex)
    d = mat.shape[0]
    lines = [str(d)]
    for row in mat:
        lines.append(" ".join(_format_entry(z) for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text) -> np.ndarray:
    """Inverse of :func:`format_matrix`; accepts a string or line iterable."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.strip() for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    d = int(lines[0])
    if len(lines) < d + 1:
        raise ValueError(f"expected {d} rows, got {len(lines) - 1}")
    rows = []
    for ln in lines[1:d + 1]:
        toks = ln.split()
        if len(toks) != d:
            raise ValueError(f"expected {d} entries per row, got {len(toks)}")
        rows.append([_parse_entry(t) for t in toks])
    return np.array(rows, dtype=complex)


def write_matrix(mat: np.ndarray, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(mat))


def read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix(fh.read())
