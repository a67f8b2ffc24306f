"""Density matrices, state classes and their witness constructions.

A density matrix is Hermitian, positive semidefinite and has unit trace.
Four state classes are supported, each with a seeded sampler and a
membership check:

* ``entry_sparse``        - at most s nonzero entries;
* ``pauli_sparse``        - at most s nonzero coefficients in the Pauli
                            expansion rho = sum_j alpha_j B_j, alpha_j = tr(rho B_j)/d;
* ``low_rank``            - rank at most r;
* ``low_rank_sparse_vec`` - rank-r mixtures of unit vectors whose real and
                            imaginary parts are each supported on at most
                            gamma vectors of a supplied orthonormal basis.

Named witnesses reproduce the closed-form extremal states used by the
diagnostics suite ("cor2_line", "cor3_tilted", "remark8_haar_rank1",
"remark8_haar_rank2").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bases
from .errors import (
    BetaOutOfRange,
    DimensionOverflow,
    IdentityIndex,
    InfeasibleSpec,
    NotHermitian,
    NotPSD,
    TraceNotOne,
)
from .hermitian import MAX_TENSOR_DIM, trace_product
from .rng import substream

__all__ = [
    "DensityMatrix",
    "StateClassSpec",
    "validate_density",
    "pauli_line_state",
    "tilted_product_state",
    "sample_class",
    "class_membership",
    "witness_state",
    "pauli_coefficients",
    "WITNESS_NAMES",
]

DENSITY_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    """A validated quantum state."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = DENSITY_TOL) -> int:
        return int(np.sum(self.eigenvalues() > tol))


@dataclass(frozen=True)
class StateClassSpec:
    """Parameters of one state class, optionally pinned to a named witness."""

    class_name: str                  # entry_sparse | pauli_sparse | low_rank | low_rank_sparse_vec
    s: int = None
    r: int = None
    gamma: int = None
    g_vectors: np.ndarray = None     # columns g_1..g_d, low_rank_sparse_vec only
    witness_id: str = None


def validate_density(mat: np.ndarray, tol: float = DENSITY_TOL) -> DensityMatrix:
    """Wrap ``mat`` as a density matrix or raise the first failed property."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {mat.shape}")
    dev = float(np.max(np.abs(mat - mat.conj().T)))
    if dev > tol:
        raise NotHermitian(f"deviates from Hermitian symmetry by {dev:.3e}")
    tr = complex(np.trace(mat))
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(f"trace is {tr:.12g}, not 1")
    lam_min = float(np.linalg.eigvalsh(mat)[0])
    if lam_min < -tol:
        raise NotPSD(f"most negative eigenvalue is {lam_min:.3e}")
    return DensityMatrix(matrix=mat)


_BASIS_CACHE = {}


def _cached_pauli(d: int) -> bases.ObservableBasis:
    if d not in _BASIS_CACHE:
        _BASIS_CACHE[d] = bases.build_basis("pauli", d)
    return _BASIS_CACHE[d]


def pauli_line_state(d: int, j_star, beta: float) -> DensityMatrix:
    """State I/d + (beta/d) B_j* along one non-identity Pauli direction.

    Its eigenvalues are (1 +- beta)/d, each with multiplicity d/2, so it is a
    valid state exactly when |beta| < 1.
    """
    if abs(beta) >= 1:
        raise BetaOutOfRange(f"|beta| must be < 1, got {beta}")
    basis = _cached_pauli(d)
    if isinstance(j_star, tuple):
        j_star = basis.labels.index(j_star)
    if j_star == basis.identity_index:
        raise IdentityIndex("the identity member carries no perturbation direction")
    mat = np.eye(d, dtype=complex) / d + (beta / d) * basis.matrices[j_star]
    return validate_density(mat)


def tilted_product_state(b: int) -> DensityMatrix:
    """Rank-one product state whose Pauli averages factor over tensor slots.

    Built from the single-qubit unit vector (sqrt(6/7), sqrt(1/14)(1+i));
    its four single-qubit averages are (1, 2 sqrt(3)/7, 2 sqrt(3)/7, 5/7).
    """
    if b < 1:
        raise ValueError("b must be at least 1")
    if 2 ** b > MAX_TENSOR_DIM:
        raise DimensionOverflow(f"dimension 2^{b} exceeds {MAX_TENSOR_DIM}")
    e = np.array([np.sqrt(6.0 / 7.0), np.sqrt(1.0 / 14.0) * (1 + 1j)])
    u = e
    for _ in range(b - 1):
        u = np.kron(u, e)
    return validate_density(np.outer(u, u.conj()))


def pauli_coefficients(rho: DensityMatrix, basis=None) -> np.ndarray:
    """Expansion coefficients alpha_j = tr(rho B_j)/d under the Pauli family."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = mat.shape[0]
    basis = basis if basis is not None else _cached_pauli(d)
    return np.array([trace_product(b, mat).real / d for b in basis.matrices])


WITNESS_NAMES = ("cor2_line", "cor3_tilted", "remark8_haar_rank1", "remark8_haar_rank2")


def witness_state(name: str, d: int, j_star=None, beta: float = 0.5) -> DensityMatrix:
    """Construct one of the named extremal states at dimension ``d``."""
    if name == "cor2_line":
        if j_star is None:
            j_star = 1  # first non-identity member
        return pauli_line_state(d, j_star, beta)
    if name == "cor3_tilted":
        b = int(round(np.log2(d)))
        if 2 ** b != d:
            raise ValueError("cor3_tilted needs d = 2^b")
        return tilted_product_state(b)
    if name == "remark8_haar_rank1":
        return validate_density(np.ones((d, d), dtype=complex) / d)
    if name == "remark8_haar_rank2":
        g = bases.haar_wavelet_vectors(d)
        mat = 0.75 * np.outer(g[:, 0], g[:, 0]) + 0.25 * np.outer(g[:, 1], g[:, 1])
        return validate_density(mat.astype(complex))
    raise ValueError(f"unknown witness {name!r}")


# --- samplers ----------------------------------------------------------------


def sample_class(spec: StateClassSpec, d: int, seed: int) -> DensityMatrix:
    """Draw one state from the class; deterministic for a fixed seed."""
    if spec.witness_id is not None:
        return witness_state(spec.witness_id, d)
    rng = substream(seed)
    if spec.class_name == "entry_sparse":
        return _sample_entry_sparse(d, spec.s, rng)
    if spec.class_name == "pauli_sparse":
        return _sample_pauli_sparse(d, spec.s, rng)
    if spec.class_name == "low_rank":
        return _sample_low_rank(d, spec.r, rng)
    if spec.class_name == "low_rank_sparse_vec":
        return _sample_sparse_vec(d, spec.r, spec.gamma, spec.g_vectors, rng)
    raise ValueError(f"unknown state class {spec.class_name!r}")


def _sample_entry_sparse(d: int, s: int, rng) -> DensityMatrix:
    if s is None or s < 1:
        raise InfeasibleSpec("entry_sparse needs s >= 1")
    # Support patterns that survive PSD repair: a few full 2x2 blocks
    # (4 entries each) plus isolated diagonal entries.
    for _ in range(200):
        n_blocks = int(rng.integers(0, s // 4 + 1))
        n_diag = int(rng.integers(0 if n_blocks else 1, s - 4 * n_blocks + 1))
        if n_blocks == 0 and n_diag == 0:
            continue
        need = 2 * n_blocks + n_diag
        if need > d:
            continue
        idx = rng.permutation(d)[:need]
        blocks = [tuple(sorted(idx[2 * i:2 * i + 2])) for i in range(n_blocks)]
        diag = idx[2 * n_blocks:]
        mat = np.zeros((d, d), dtype=complex)
        for a in diag:
            mat[a, a] = rng.uniform(0.2, 1.0)
        for a, b in blocks:
            z = rng.normal() + 1j * rng.normal()
            x, y = rng.uniform(0.2, 1.0, size=2)
            mat[a, a], mat[b, b] = x, y
            off = z * np.sqrt(x * y) * rng.uniform(0.2, 0.9) / abs(z)
            mat[a, b], mat[b, a] = off, np.conj(off)
        mat = _psd_repair(mat)
        support = np.abs(mat) > DENSITY_TOL
        wanted = n_diag + 4 * n_blocks
        if support.sum() <= s and support.sum() == wanted:
            return validate_density(mat)
    raise InfeasibleSpec(f"could not realize an entry-sparse state with s={s}, d={d}")


def _psd_repair(mat: np.ndarray) -> np.ndarray:
    """Project onto the PSD cone, then renormalize the trace to 1."""
    evals, evecs = np.linalg.eigh(mat)
    evals = np.clip(evals, 0.0, None)
    mat = (evecs * evals) @ evecs.conj().T
    return mat / np.trace(mat).real


def _sample_pauli_sparse(d: int, s: int, rng) -> DensityMatrix:
    if s is None or s < 1:
        raise InfeasibleSpec("pauli_sparse needs s >= 1 (unit trace forces the identity term)")
    basis = _cached_pauli(d)
    if s > basis.size:
        raise InfeasibleSpec(f"s={s} exceeds the family size {basis.size}")
    mat = np.eye(d, dtype=complex) / d
    extra = int(min(s - 1, basis.size - 1))
    if extra:
        others = 1 + rng.permutation(basis.size - 1)[:extra]
        delta = np.zeros((d, d), dtype=complex)
        for j in others:
            delta += rng.normal() * basis.matrices[j]
        lam_min = float(np.linalg.eigvalsh(delta)[0])
        if lam_min < -0.9:
            # eigenvalues of I/d + delta/d are (1 + eig(delta))/d; keep a margin
            delta = delta * (0.9 / abs(lam_min))
        mat = mat + delta / d
    return validate_density(mat)


def _sample_low_rank(d: int, r: int, rng) -> DensityMatrix:
    if r is None or not (1 <= r <= d):
        raise InfeasibleSpec(f"low_rank needs 1 <= r <= {d}")
    z = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    q, _ = np.linalg.qr(z)
    xi = rng.dirichlet(np.ones(r))
    return validate_density((q * xi) @ q.conj().T)


def _sample_sparse_vec(d: int, r: int, gamma: int, g_vectors, rng) -> DensityMatrix:
    if r is None or gamma is None or r < 1 or gamma < 1:
        raise InfeasibleSpec("low_rank_sparse_vec needs r >= 1 and gamma >= 1")
    if r > d:
        raise InfeasibleSpec(f"cannot place {r} orthogonal vectors in dimension {d}")
    g = np.asarray(g_vectors, dtype=float) if g_vectors is not None else np.eye(d)
    # group the r vectors into blocks of at most gamma; each block draws an
    # orthonormal complex frame inside the span of its own (disjoint) support
    # of at most gamma basis vectors, so mixture components stay orthonormal
    # and membership is certifiable from the eigendecomposition
    sizes = []
    rem = r
    while rem:
        k = min(gamma, rem)
        sizes.append(k)
        rem -= k
    pool = list(rng.permutation(d))
    spare = d - sum(sizes)
    vectors = []
    for k in sizes:
        width = k
        if gamma > k and spare > 0:
            extra = int(rng.integers(0, min(gamma - k, spare) + 1))
            width += extra
            spare -= extra
        support = [pool.pop() for _ in range(width)]
        z = rng.normal(size=(width, k)) + 1j * rng.normal(size=(width, k))
        frame, _ = np.linalg.qr(z)
        for col in range(k):
            coeff = np.zeros(d, dtype=complex)
            coeff[support] = frame[:, col]
            vectors.append(g @ coeff.real + 1j * (g @ coeff.imag))
    xi = rng.dirichlet(np.ones(r))
    mat = np.zeros((d, d), dtype=complex)
    for w, u in zip(xi, vectors):
        mat += w * np.outer(u, u.conj())
    return validate_density(mat)


# --- membership --------------------------------------------------------------


def class_membership(rho: DensityMatrix, spec: StateClassSpec, d: int = None,
                     tol: float = DENSITY_TOL) -> dict:
    """Check the defining property of ``spec`` against ``rho``.

    Returns a report dict with a boolean ``member`` plus the measured
    quantity (entry count, coefficient count, rank, or per-vector supports).
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = mat.shape[0] if d is None else d
    if spec.class_name == "entry_sparse":
        count = int(np.sum(np.abs(mat) > tol))
        return {"member": count <= spec.s, "nonzero_entries": count, "s": spec.s}
    if spec.class_name == "pauli_sparse":
        alpha = pauli_coefficients(mat)
        count = int(np.sum(np.abs(alpha) > tol))
        return {"member": count <= spec.s, "nonzero_coefficients": count, "s": spec.s}
    if spec.class_name == "low_rank":
        rank = int(np.sum(np.linalg.eigvalsh(mat) > tol))
        return {"member": rank <= spec.r, "rank": rank, "r": spec.r}
    if spec.class_name == "low_rank_sparse_vec":
        return _sparse_vec_membership(mat, spec, d, tol)
    raise ValueError(f"unknown state class {spec.class_name!r}")


def _sparse_vec_membership(mat, spec, d, tol) -> dict:
    g = np.asarray(spec.g_vectors, dtype=float) if spec.g_vectors is not None else np.eye(d)
    evals, evecs = np.linalg.eigh(mat)
    active = [i for i in range(d) if evals[i] > tol]
    if len(active) > spec.r:
        return {"member": False, "rank": len(active), "r": spec.r}
    supports = []
    ok = True
    for i in active:
        coeff = g.T @ evecs[:, i]
        best = _sparsest_phase_supports(coeff, tol)
        supports.append(best)
        if max(best) > spec.gamma:
            ok = False
    return {"member": ok, "rank": len(active), "r": spec.r,
            "gamma": spec.gamma, "part_supports": supports}


def _sparsest_phase_supports(coeff: np.ndarray, tol: float):
    """Smallest (re, im) support sizes of exp(i phi) * coeff over candidate phases.

    Eigenvectors are recovered only up to a global phase; candidate phases
    align each nonzero coordinate with the real or imaginary axis.
    """
    nz = np.abs(coeff) > tol
    candidates = [0.0]
    for c in coeff[nz]:
        candidates.append(-np.angle(c))
        candidates.append(-np.angle(c) + np.pi / 2)
    best = (np.inf, np.inf)
    for phi in candidates:
        rotated = np.exp(1j * phi) * coeff
        n_re = int(np.sum(np.abs(rotated.real) > tol))
        n_im = int(np.sum(np.abs(rotated.imag) > tol))
        if max(n_re, n_im) < max(best) or (max(n_re, n_im) == max(best) and n_re + n_im < sum(best)):
            best = (n_re, n_im)
    return best
