"""Gaussian trace-regression simulation, coarse and fine scale.

Coarse: Y_k = tr(X_k rho) + eps_k with eps_k normal, variance
(tr(X_k^2 rho) - tr(X_k rho)^2)/m, matching the variance of the averaged
measurement outcome on the same observable.

Fine: per eigenprojection, y_ka = tr(Q_ka rho) + z_ka with (z_ka) jointly
normal, covariance (diag(theta) - theta theta')/m where theta_a =
tr(Q_ka rho).  That covariance annihilates the all-ones direction, so each
fine sample sums to one; the sampler draws the nondegenerate block minus one
coordinate by Cholesky and sets the last coordinate from the sum constraint.
Cells with theta_a in {0, 1} are deterministic and excluded from the
Gaussian block.

Randomness contract matches the tomography simulator, with separate
stream families for the coarse and fine runs: record k draws from
(seed, family, k + 1) and the design indices from (seed, family, 0).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .bases import ObservableBasis, SamplingDesign
from .errors import DesignMismatch, LengthMismatch
from .hermitian import require_hermitian, trace_product
from .measurement import cell_probabilities
from .rng import substream
from .states import DensityMatrix

__all__ = [
    "RegressionSample",
    "FineRegressionSample",
    "noise_variance_coarse",
    "noise_covariance_fine",
    "simulate_coarse",
    "simulate_fine",
    "aggregate_fine",
    "write_coarse_csv",
    "write_fine_csv",
    "read_coarse_csv",
    "read_fine_csv",
]

DEGENERATE_TOL = 1e-12
_COARSE_FAMILY = 1
_FINE_FAMILY = 2


@dataclass(frozen=True)
class RegressionSample:
    design_index: int
    Y: float


@dataclass(frozen=True)
class FineRegressionSample:
    design_index: int
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))

    @property
    def eigen_count(self) -> int:
        return len(self.y)


def noise_variance_coarse(rho, b_mat: np.ndarray) -> float:
    """tr(B^2 rho) - tr(B rho)^2, clamped at zero (division by m is the caller's).

    Values below 1e-12 collapse to exactly zero so deterministic observables
    stay deterministic under floating-point rounding.
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b_mat = require_hermitian(b_mat)
    second = trace_product(b_mat @ b_mat, mat).real
    first = trace_product(b_mat, mat).real
    var = second - first * first
    return var if var >= DEGENERATE_TOL else 0.0


def noise_covariance_fine(rho, basis: ObservableBasis, j: int) -> np.ndarray:
    """Multinomial-shaped covariance diag(theta) - theta theta' (m-scaled)."""
    theta = cell_probabilities(rho, basis, j)
    return np.diag(theta) - np.outer(theta, theta)


def _draw_design(design: SamplingDesign, basis: ObservableBasis, n: int,
                 seed, family: int) -> np.ndarray:
    p = basis.size
    if design.mode == "fixed":
        if n != p:
            raise DesignMismatch(f"fixed design requires n = p = {p}, got n = {n}")
        return np.arange(p)
    pi = design.weights_regression
    if len(pi) != p:
        raise DesignMismatch(f"Pi has length {len(pi)}, family has {p} members")
    rng = substream(seed, family, 0)
    return rng.choice(p, size=n, p=pi)


def simulate_coarse(rho, basis: ObservableBasis, design: SamplingDesign,
                    n: int, m: int, seed: int) -> list:
    """n coarse samples Y_k = tr(X_k rho) + eps_k."""
    indices = _draw_design(design, basis, n, seed, _COARSE_FAMILY)
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    out = []
    for k, j in enumerate(indices):
        j = int(j)
        rng = substream(seed, _COARSE_FAMILY, k + 1)
        mean = trace_product(basis.matrices[j], mat).real
        sd = np.sqrt(noise_variance_coarse(mat, basis.matrices[j]) / m)
        out.append(RegressionSample(design_index=j, Y=float(mean + sd * rng.standard_normal())))
    return out


def _sample_fine_vector(theta: np.ndarray, m: int, rng) -> np.ndarray:
    """One draw of theta + z with the singular multinomial-shaped covariance."""
    y = theta.astype(float).copy()
    active = np.where((theta > DEGENERATE_TOL) & (theta < 1 - DEGENERATE_TOL))[0]
    q = len(active)
    if q == 0:
        return y
    th = theta[active]
    cov = (np.diag(th) - np.outer(th, th))[:q - 1, :q - 1] / m
    if q > 1:
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            chol = np.linalg.cholesky(cov + 1e-12 * np.eye(q - 1))
        z = chol @ rng.standard_normal(q - 1)
        y[active[:q - 1]] = th[:q - 1] + z
        y[active[q - 1]] = th[q - 1] - z.sum()
    return y


def simulate_fine(rho, basis: ObservableBasis, design: SamplingDesign,
                  n: int, m: int, seed: int) -> list:
    """n fine samples y_k = theta(X_k) + z_k, z_k singular multivariate normal."""
    indices = _draw_design(design, basis, n, seed, _FINE_FAMILY)
    out = []
    for k, j in enumerate(indices):
        j = int(j)
        rng = substream(seed, _FINE_FAMILY, k + 1)
        theta = cell_probabilities(rho, basis, j)
        out.append(FineRegressionSample(design_index=j, y=_sample_fine_vector(theta, m, rng)))
    return out


def aggregate_fine(sample: FineRegressionSample, eigenvalues) -> RegressionSample:
    """Collapse a fine sample to the coarse observation Y = sum_a lambda_a y_a."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if len(eigenvalues) != sample.eigen_count:
        raise LengthMismatch(
            f"{sample.eigen_count} fine coordinates vs {len(eigenvalues)} eigenvalues")
    return RegressionSample(design_index=sample.design_index,
                            Y=float(np.dot(eigenvalues, sample.y)))


# --- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_coarse_csv(samples, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "j", "Y"])
        for k, s in enumerate(samples):
            writer.writerow([k, s.design_index, _fmt(s.Y)])


def write_fine_csv(samples, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "j", "y"])
        for k, s in enumerate(samples):
            writer.writerow([k, s.design_index, "|".join(_fmt(v) for v in s.y)])


def read_coarse_csv(path) -> list:
    out = []
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.append(RegressionSample(design_index=int(row[1]), Y=float(row[2])))
    return out


def read_fine_csv(path) -> list:
    out = []
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            y = np.array([float(t) for t in row[2].split("|")])
            out.append(FineRegressionSample(design_index=int(row[1]), y=y))
    return out
