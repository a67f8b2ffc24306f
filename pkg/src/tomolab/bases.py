"""Observable families and sampling designs.

Four constructions, all of size p = d^2:

* ``canonical`` - unit matrices e_l1 e_l2'; the off-diagonal members are not
  Hermitian and are admitted for masking only (no spectral decomposition, the
  measurement simulator rejects them).
* ``hermitian`` - the orthonormal Hermitian family: diagonal units, and
  symmetric / antisymmetric off-diagonal pairs scaled by 1/sqrt(2).
* ``pauli`` - b-fold tensor products of the 2x2 Pauli matrices, d = 2^b.
* ``gvector`` - the hermitian construction with the canonical axes replaced
  by a supplied orthonormal real basis g_1..g_d.

Spectral decompositions are cached eagerly at build time; every downstream
simulation consumes them repeatedly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDimension,
    DimensionMismatch,
    NonOrthonormalVectors,
    WrongBasisKind,
)
from .hermitian import (
    format_matrix,
    hs_inner,
    parse_matrix,
    spectral_decompose,
    tensor_chain,
    trace_product,
)

__all__ = [
    "SIGMA",
    "ObservableBasis",
    "SamplingDesign",
    "build_basis",
    "verify_orthogonal",
    "pauli_projection_traces",
    "haar_wavelet_vectors",
    "write_basis",
    "read_basis",
]

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_KINDS = ("canonical", "hermitian", "pauli", "gvector", "custom")


@dataclass(frozen=True)
class ObservableBasis:
    """A finite observable family with cached spectral decompositions."""

    kind: str
    dim: int
    matrices: tuple = field(repr=False)
    decompositions: tuple = field(repr=False)  # None for non-measurable members
    labels: tuple = ()
    kappa: int = 0
    g_vectors: np.ndarray = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.matrices)

    def measurable(self, j: int) -> bool:
        return self.decompositions[j] is not None

    @property
    def identity_index(self):
        """Index of the identity member (Pauli family), else None."""
        return 0 if self.kind == "pauli" else None


@dataclass(frozen=True)
class SamplingDesign:
    """Fixed design, or per-experiment sampling distributions over the family."""

    mode: str                                   # "fixed" | "random"
    weights_regression: np.ndarray = None       # Pi(j)
    weights_tomography: np.ndarray = None       # Xi(j)

    def __post_init__(self):
        if self.mode not in ("fixed", "random"):
            raise ValueError(f"unknown design mode {self.mode!r}")
        if self.mode == "random":
            for name in ("weights_regression", "weights_tomography"):
                w = getattr(self, name)
                if w is None:
                    raise ValueError(f"random design requires {name}")
                w = np.asarray(w, dtype=float)
                if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                    raise ValueError(f"{name} must be nonnegative and sum to 1")
                object.__setattr__(self, name, w)

    @classmethod
    def fixed(cls) -> "SamplingDesign":
        return cls(mode="fixed")

    @classmethod
    def random(cls, pi, xi=None) -> "SamplingDesign":
        pi = np.asarray(pi, dtype=float)
        xi = pi if xi is None else np.asarray(xi, dtype=float)
        return cls(mode="random", weights_regression=pi, weights_tomography=xi)

    @classmethod
    def uniform(cls, p: int) -> "SamplingDesign":
        return cls.random(np.full(p, 1.0 / p))


def _hermitian_family(axes: np.ndarray):
    """Members and (l1, l2) labels of the hermitian construction over ``axes`` columns."""
    d = axes.shape[1]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    mats, labels = [], []
    for l1 in range(1, d + 1):
        for l2 in range(1, d + 1):
            u = axes[:, l1 - 1][:, None]
            v = axes[:, l2 - 1][:, None]
            if l1 == l2:
                mat = u @ u.conj().T
            elif l1 < l2:
                mat = inv_sqrt2 * (u @ v.conj().T + v @ u.conj().T)
            else:
                mat = 1j * inv_sqrt2 * (u @ v.conj().T - v @ u.conj().T)
            mats.append(mat.astype(complex))
            labels.append((l1, l2))
    return mats, labels


def build_basis(kind: str, d: int, g_vectors=None, cluster_tol: float = 1e-9) -> ObservableBasis:
    """Construct one of the built-in observable families (p = d^2 members)."""
    if kind not in _KINDS:
        raise WrongBasisKind(f"unknown basis kind {kind!r}")
    if d < 2:
        raise BadDimension("dimension must be at least 2")

    g_store = None
    if kind == "canonical":
        eye = np.eye(d, dtype=complex)
        mats, labels = [], []
        for l1 in range(1, d + 1):
            for l2 in range(1, d + 1):
                mats.append(np.outer(eye[:, l1 - 1], eye[:, l2 - 1]))
                labels.append((l1, l2))
        decomps = tuple(
            spectral_decompose(m, cluster_tol) if l1 == l2 else None
            for m, (l1, l2) in zip(mats, labels)
        )
    elif kind in ("hermitian", "gvector"):
        if kind == "gvector":
            if g_vectors is None:
                raise ValueError("gvector basis requires g_vectors")
            axes = np.asarray(g_vectors, dtype=float)
            if axes.shape != (d, d):
                raise DimensionMismatch(f"expected {d} vectors of length {d}")
            gram_dev = float(np.max(np.abs(axes.T @ axes - np.eye(d))))
            if gram_dev > 1e-9:
                raise NonOrthonormalVectors(f"Gram matrix deviates from identity by {gram_dev:.3e}")
            g_store = axes.copy()
        else:
            axes = np.eye(d)
        mats, labels = _hermitian_family(axes.astype(complex))
        decomps = tuple(spectral_decompose(m, cluster_tol) for m in mats)
    elif kind == "pauli":
        b = int(round(np.log2(d)))
        if 2 ** b != d:
            raise BadDimension(f"pauli family needs d = 2^b, got d = {d}")
        labels = [_pauli_label(j, b) for j in range(d * d)]
        mats = [tensor_chain(SIGMA[l] for l in lab) for lab in labels]
        decomps = tuple(spectral_decompose(m, cluster_tol) for m in mats)
        labels = [tuple(lab) for lab in labels]
    else:
        raise WrongBasisKind("custom bases are assembled directly, not built")

    kappa = max(dec.r for dec in decomps if dec is not None)
    return ObservableBasis(
        kind=kind,
        dim=d,
        matrices=tuple(mats),
        decompositions=decomps,
        labels=tuple(labels),
        kappa=kappa,
        g_vectors=g_store,
    )


def _pauli_label(j: int, b: int):
    """Base-4 digits of j, most significant first; j = 0 is the identity."""
    digits = []
    for _ in range(b):
        digits.append(j % 4)
        j //= 4
    return digits[::-1]


def custom_basis(matrices, cluster_tol: float = 1e-9) -> ObservableBasis:
    """Wrap an explicit matrix list; non-Hermitian members are left undecomposed."""
    mats = tuple(np.asarray(m, dtype=complex) for m in matrices)
    d = mats[0].shape[0]
    decomps = []
    for m in mats:
        herm = np.max(np.abs(m - m.conj().T)) <= 1e-9
        decomps.append(spectral_decompose(m, cluster_tol) if herm else None)
    kappa = max((dec.r for dec in decomps if dec is not None), default=0)
    return ObservableBasis(
        kind="custom", dim=d, matrices=mats, decompositions=tuple(decomps),
        labels=tuple(range(1, len(mats) + 1)), kappa=kappa,
    )


def verify_orthogonal(basis: ObservableBasis) -> dict:
    """Max off-diagonal |<B_j, B_j'>| over all pairs; pass iff <= 1e-9."""
    p = basis.size
    worst = 0.0
    worst_pair = None
    for j in range(p):
        for jp in range(j + 1, p):
            val = abs(hs_inner(basis.matrices[j], basis.matrices[jp]))
            if val > worst:
                worst, worst_pair = val, (j, jp)
    norms = [abs(hs_inner(m, m)) for m in basis.matrices]
    return {
        "max_off_diagonal": worst,
        "worst_pair": worst_pair,
        "diagonal_norms": norms,
        "passed": worst <= 1e-9,
    }


def pauli_projection_traces(basis: ObservableBasis) -> dict:
    """Projection traces and cross-traces of the Pauli family.

    For every non-identity member j the two projections satisfy
    tr(Q_j+-) = d/2 and tr(B_j Q_j+-) = +-d/2, and tr(B_j' Q_j+-) = 0 for any
    other non-identity j'.  Returns the full table plus worst-case deviations.
    """
    if basis.kind != "pauli":
        raise WrongBasisKind("projection-trace table is defined for the pauli family")
    d = basis.dim
    rows = []
    dev_proj = dev_self = dev_cross = 0.0
    non_identity = [j for j in range(basis.size) if j != basis.identity_index]
    stack = np.stack([basis.matrices[j] for j in non_identity])
    for pos, j in enumerate(non_identity):
        dec = basis.decompositions[j]
        q_plus, q_minus = dec.projections[0], dec.projections[1]
        tr_p = np.trace(q_plus).real
        tr_m = np.trace(q_minus).real
        cross_p = np.abs(np.einsum("kab,ba->k", stack, q_plus))
        cross_m = np.abs(np.einsum("kab,ba->k", stack, q_minus))
        self_p = trace_product(basis.matrices[j], q_plus).real
        self_m = trace_product(basis.matrices[j], q_minus).real
        dev_proj = max(dev_proj, abs(tr_p - d / 2), abs(tr_m - d / 2))
        dev_self = max(dev_self, abs(self_p - d / 2), abs(self_m + d / 2))
        mask = np.arange(len(non_identity)) != pos
        cross = float(max(cross_p[mask].max(), cross_m[mask].max())) if mask.any() else 0.0
        dev_cross = max(dev_cross, cross)
        rows.append({
            "j": j,
            "tr_Q_plus": tr_p,
            "tr_Q_minus": tr_m,
            "tr_BQ_plus": self_p,
            "tr_BQ_minus": self_m,
            "max_cross_trace": cross,
        })
    return {
        "rows": rows,
        "max_projection_trace_dev": dev_proj,
        "max_self_trace_dev": dev_self,
        "max_cross_trace": dev_cross,
        "passed": max(dev_proj, dev_self, dev_cross) <= 1e-9,
    }


def haar_wavelet_vectors(d: int) -> np.ndarray:
    """Orthonormal Haar wavelet basis of R^d (d a power of 2), columns are vectors.

    The first column is the constant vector; subsequent columns are the
    rescaled step wavelets.
    """
    b = int(round(np.log2(d)))
    if 2 ** b != d:
        raise BadDimension(f"Haar basis needs d = 2^b, got d = {d}")
    cols = [np.full(d, 1.0 / np.sqrt(d))]
    for level in range(b):
        n_wav = 2 ** level
        width = d // (2 * n_wav)
        for k in range(n_wav):
            v = np.zeros(d)
            start = k * 2 * width
            v[start:start + width] = 1.0
            v[start + width:start + 2 * width] = -1.0
            cols.append(v / np.linalg.norm(v))
    return np.stack(cols, axis=1)


# --- basis text files --------------------------------------------------------


def write_basis(basis: ObservableBasis, path) -> None:
    """Header line "kind d p" followed by the p matrices in text format."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{basis.kind} {basis.dim} {basis.size}\n")
        for mat in basis.matrices:
            fh.write(format_matrix(mat))


def read_basis(path, cluster_tol: float = 1e-9) -> ObservableBasis:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty basis file")
    kind, d_str, p_str = lines[0].split()
    d, p = int(d_str), int(p_str)
    mats = []
    pos = 1
    for _ in range(p):
        block = lines[pos:pos + d + 1]
        mats.append(parse_matrix(block))
        pos += d + 1
    basis = custom_basis(mats, cluster_tol)
    if kind in ("hermitian", "pauli", "gvector", "canonical"):
        kappa = max((dec.r for dec in basis.decompositions if dec is not None), default=0)
        labels = basis.labels
        if kind == "pauli":
            b = int(round(np.log2(d)))
            labels = tuple(tuple(_pauli_label(j, b)) for j in range(p))
        basis = ObservableBasis(
            kind=kind, dim=d, matrices=basis.matrices,
            decompositions=basis.decompositions, labels=labels, kappa=kappa,
        )
    return basis
