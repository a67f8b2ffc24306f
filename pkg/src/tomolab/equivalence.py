"""Couplings between counted measurements and their Gaussian surrogates.

Two data translations drive everything here:

* ``kernel_K0`` adds independent Uniform(-1/2, 1/2) noise to the first r-1
  coordinates of a count vector and fixes the last by the sum constraint, so
  the discrete law acquires a density;
* ``kernel_K1`` rounds the first r-1 coordinates half-away-from-zero and
  inverts K0 exactly on every count vector.

The perturbed counts have a piecewise-constant joint density on unit cells.
Distances to the moment-matched multivariate normal are computed two ways:
squared Hellinger by per-cell Gauss-Legendre quadrature on the first r-1
coordinates (the last coordinate is the same deterministic function of the
rest under both laws, so the marginal distance equals the joint one), and
total variation by Monte Carlo with CLT error bars.  A scaling study fits
the log-log slope of the Hellinger distance against the number of
measurement repetitions; combined with the product rule for squared
Hellinger distances over independent records and the two-stage total
variation bound, these are the quantitative ingredients of the deficiency
bounds evaluated in :mod:`tomolab.diagnostics`.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import NegativeResult, UnsupportedArity, ZeroDensity
from .measurement import CountRecord, TomographyDataset
from .regression import FineRegressionSample
from .rng import substream

__all__ = [
    "PerturbedCounts",
    "DistanceEstimate",
    "QuadSpec",
    "ScalingReport",
    "TranslationResult",
    "round_half_away",
    "multinomial_pmf",
    "multinomial_pmf_chain",
    "kernel_K0",
    "kernel_K1",
    "translate_qst_to_regression",
    "translate_regression_to_qst",
    "perturbed_density",
    "gaussian_marginal_density",
    "perturbed_sampler",
    "hellinger_perturbed_vs_gaussian",
    "product_hellinger_bound",
    "tv_monte_carlo",
    "tv_perturbed_vs_gaussian",
    "conditional_tv_bound",
    "fit_loglog_slope",
    "scaling_study",
    "write_scaling_csv",
    "write_scaling_json",
    "write_distance_json",
    "SLOPE_BAND",
]

DEGENERATE_TOL = 1e-12
SLOPE_BAND = (-0.70, -0.35)
MAX_QUAD_M = 4096
_TRANSLATE_FAMILY = 3  # keeps translation substreams disjoint from simulator record streams


@dataclass(frozen=True)
class PerturbedCounts:
    """A count vector after uniform perturbation; coordinates still sum to m."""

    values: np.ndarray
    m: int
    source: CountRecord = None


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    kind: str                 # "hellinger" | "tv"
    method: str               # "quadrature" | "monte_carlo"
    error_bar: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class QuadSpec:
    """Cellwise Gauss-Legendre settings for the Hellinger integral."""

    order: int = 5
    compare_order: int = 3
    window: float = 8.0       # half-width of the lattice window, in per-axis sd units
    chunk_cells: int = 2_000_000


def round_half_away(x):
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


# --- multinomial densities -----------------------------------------------------


def multinomial_pmf(counts, m: int, theta) -> np.ndarray:
    """Multinomial pmf at integer vectors ``counts`` (last axis over cells)."""
    counts = np.asarray(counts, dtype=float)
    theta = np.asarray(theta, dtype=float)
    scalar = counts.ndim == 1
    if scalar:
        counts = counts[None, :]
    valid = np.all(counts >= 0, axis=-1) & (np.abs(counts.sum(axis=-1) - m) < 0.5)
    safe = np.where(counts < 0, 0.0, counts)
    with np.errstate(divide="ignore"):
        log_theta = np.log(theta)
    terms = np.where((safe == 0) & (theta == 0.0)[None, :], 0.0, safe * log_theta[None, :])
    log_pmf = gammaln(m + 1) - gammaln(safe + 1).sum(axis=-1) + terms.sum(axis=-1)
    # a cell with theta = 0 must carry zero count
    valid &= ~np.any((safe > 0) & (theta == 0.0)[None, :], axis=-1)
    out = np.where(valid, np.exp(log_pmf), 0.0)
    return float(out[0]) if scalar else out


def multinomial_pmf_chain(counts, m: int, theta) -> float:
    """Same pmf through the conditional-binomial factorization.

    Cell j, given the earlier cells, is binomial with the remaining trials
    and success probability theta_j renormalized by the remaining mass; the
    last cell is deterministic.  Used as a cross-check of the direct formula.
    """
    counts = np.asarray(counts, dtype=np.int64)
    theta = np.asarray(theta, dtype=float)
    r = len(theta)
    if counts.sum() != m or np.any(counts < 0):
        return 0.0
    log_p = 0.0
    remaining_trials = m
    remaining_mass = 1.0
    for j in range(r - 1):
        beta = theta[j] / remaining_mass if remaining_mass > 0 else 0.0
        u = int(counts[j])
        if beta <= 0.0:
            if u:
                return 0.0
        elif beta >= 1.0:
            if u != remaining_trials:
                return 0.0
        else:
            log_p += (gammaln(remaining_trials + 1) - gammaln(u + 1)
                      - gammaln(remaining_trials - u + 1)
                      + u * math.log(beta) + (remaining_trials - u) * math.log1p(-beta))
        remaining_trials -= u
        remaining_mass -= theta[j]
    return math.exp(log_p)


# --- kernels -------------------------------------------------------------------


def kernel_K0(record: CountRecord, seed, degenerate: bool = False) -> PerturbedCounts:
    """Uniformly perturb a count vector; sum preserved at m exactly.

    Records with a single cell, or flagged as coming from a degenerate law,
    pass through unchanged.
    """
    vals = record.counts.astype(float)
    r = len(vals)
    if r >= 2 and not degenerate:
        rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
        psi = rng.uniform(-0.5, 0.5, size=r - 1)
        vals = vals.copy()
        vals[:r - 1] += psi
        vals[r - 1] = record.m - vals[:r - 1].sum()
    return PerturbedCounts(values=vals, m=record.m, source=record)


def kernel_K1(values, m: int) -> np.ndarray:
    """Round off a perturbed vector back to counts; inverts :func:`kernel_K0`.

    Raises :class:`NegativeResult` when any implied count is negative, which
    signals an out-of-model input (e.g. a Gaussian tail event) rather than a
    perturbed count vector.
    """
    values = np.asarray(values, dtype=float)
    r = len(values)
    head = round_half_away(values[:r - 1]).astype(np.int64)
    last = m - int(head.sum())
    if np.any(head < 0) or last < 0:
        raise NegativeResult(f"implied counts {list(head) + [last]} contain a negative entry")
    return np.append(head, last)


@dataclass
class TranslationResult:
    """Counts recovered from fine samples, with out-of-model drops recorded."""

    records: list
    dropped: int
    m: int

    def as_dataset(self, design=None) -> TomographyDataset:
        from .bases import SamplingDesign
        return TomographyDataset(
            design=design if design is not None else SamplingDesign.fixed(),
            n=len(self.records), m=self.m, records=self.records,
        )


def translate_qst_to_regression(dataset: TomographyDataset, seed: int) -> list:
    """Map counted measurements to fine-regression shape via y* = K0(U)/m.

    Records whose counts concentrate on a single cell pass through
    unperturbed: under a degenerate law that is the identity coupling, and
    under a nondegenerate law the event is exponentially rare.
    """
    out = []
    for k, rec in enumerate(dataset.records):
        rng = substream(seed, _TRANSLATE_FAMILY, k)
        degenerate = int(np.count_nonzero(rec.counts)) <= 1
        pert = kernel_K0(rec, rng, degenerate=degenerate)
        out.append(FineRegressionSample(design_index=rec.observable_index,
                                        y=pert.values / rec.m))
    return out


def translate_regression_to_qst(samples, m: int, basis) -> TranslationResult:
    """Map fine samples to counts via K1(m y); drops out-of-model records."""
    records = []
    dropped = 0
    for s in samples:
        try:
            counts = kernel_K1(m * s.y, m)
        except NegativeResult:
            dropped += 1
            continue
        records.append(CountRecord(
            observable_index=s.design_index,
            counts=counts,
            eigenvalues=basis.decompositions[s.design_index].eigenvalues,
            m=m,
        ))
    return TranslationResult(records=records, dropped=dropped, m=m)


# --- densities on the first r-1 coordinates -------------------------------------


def _active_cells(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.where((theta > DEGENERATE_TOL) & (theta < 1 - DEGENERATE_TOL))[0]


def perturbed_density(m: int, theta, x) -> np.ndarray:
    """Joint density of the first r-1 perturbed counts at points ``x``.

    The perturbed vector determines its source counts by rounding, so the
    density is the multinomial pmf at the rounded lattice point, constant on
    unit cells and zero outside the support.
    """
    theta = np.asarray(theta, dtype=float)
    dim = len(theta) - 1
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        pts, scalar = x.reshape(1, 1), True
    elif x.ndim == 1 and dim == 1:
        pts, scalar = x[:, None], False
    elif x.ndim == 1:
        pts, scalar = x[None, :], True
    else:
        pts, scalar = x, False
    if pts.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}")
    head = round_half_away(pts)
    full = np.concatenate([head, m - head.sum(axis=-1, keepdims=True)], axis=-1)
    vals = multinomial_pmf(full, m, theta)
    return float(vals[0]) if scalar else vals


def _gaussian_marginal_params(m: int, theta):
    theta = np.asarray(theta, dtype=float)
    dim = len(theta) - 1
    mu = m * theta[:dim]
    cov = m * (np.diag(theta) - np.outer(theta, theta))[:dim, :dim]
    return mu, cov


def gaussian_marginal_density(m: int, theta, x) -> np.ndarray:
    """Moment-matched normal density of the first r-1 count coordinates."""
    mu, cov = _gaussian_marginal_params(m, theta)
    dim = len(mu)
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x[:, None] if dim == 1 else x[None, :]
    prec = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    diff = x - mu
    quad = np.einsum("nd,de,ne->n", diff, prec, diff)
    log_norm = -0.5 * (len(mu) * np.log(2 * np.pi) + logdet)
    return np.exp(log_norm - 0.5 * quad)


def perturbed_sampler(m: int, theta):
    """Sampler of the first r-1 perturbed coordinates, for Monte Carlo use."""
    theta = np.asarray(theta, dtype=float)
    dim = len(theta) - 1

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        counts = rng.multinomial(m, theta, size=n)
        psi = rng.uniform(-0.5, 0.5, size=(n, dim))
        return counts[:, :dim] + psi

    return draw


# --- Hellinger quadrature --------------------------------------------------------


def _gl_nodes(order: int, dim: int):
    """Tensor Gauss-Legendre nodes and weights on the unit cell [-1/2, 1/2]^dim."""
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = x / 2.0, w / 2.0
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return offsets, weights


def _hellinger_sq_window(m: int, theta: np.ndarray, order: int, window: float,
                         chunk_cells: int) -> float:
    """Squared Hellinger distance integrated over the lattice window."""
    dim = len(theta) - 1
    mu, cov = _gaussian_marginal_params(m, theta)
    prec = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    log_norm = -0.5 * (dim * np.log(2 * np.pi) + logdet)
    sds = np.sqrt(np.diag(cov))
    axes = [np.arange(math.ceil(mu[a] - window * sds[a]),
                      math.floor(mu[a] + window * sds[a]) + 1)
            for a in range(dim)]
    offsets, node_w = _gl_nodes(order, dim)

    def accumulate(centers: np.ndarray) -> float:
        full = np.concatenate(
            [centers, m - centers.sum(axis=-1, keepdims=True)], axis=-1)
        f = multinomial_pmf(full, m, theta)
        sqrt_f = np.sqrt(f)
        total = 0.0
        for off, w in zip(offsets, node_w):
            x = centers + off
            diff = x - mu
            quad = np.einsum("nd,de,ne->n", diff, prec, diff)
            sqrt_g = np.exp(0.5 * log_norm - 0.25 * quad)
            total += w * np.sum((sqrt_f - sqrt_g) ** 2)
        return total

    n_rest = int(np.prod([len(a) for a in axes[1:]])) if dim > 1 else 1
    chunk = max(1, chunk_cells // max(n_rest, 1))
    total = 0.0
    for start in range(0, len(axes[0]), chunk):
        head = axes[0][start:start + chunk]
        if dim == 1:
            centers = head[:, None].astype(float)
        else:
            grids = np.meshgrid(head, *axes[1:], indexing="ij")
            centers = np.stack([g.ravel() for g in grids], axis=-1).astype(float)
        total += accumulate(centers)
    return total


def _tail_mass_bound(m: int, theta: np.ndarray, window: float) -> float:
    """Bound on the P* and Q mass outside the lattice window (Bernstein + normal tail)."""
    dim = len(theta) - 1
    sds = np.sqrt(m * theta[:dim] * (1 - theta[:dim]))
    q_tail = dim * math.erfc(window / math.sqrt(2.0))
    p_tail = 0.0
    for sd in sds:
        t = max(window * sd - 0.5, 0.0)
        p_tail += 2.0 * math.exp(-t * t / (2.0 * sd * sd + 2.0 * t / 3.0))
    return p_tail + q_tail


def hellinger_perturbed_vs_gaussian(m: int, theta, quad_spec: QuadSpec = None) -> DistanceEstimate:
    """Hellinger distance between perturbed counts and the matched normal law.

    Integrates |sqrt f - sqrt g|^2 cell by cell over an integer lattice
    window of ``window`` per-axis standard deviations, with fixed-order
    Gauss-Legendre nodes inside each unit cell.  The error bar combines the
    order-vs-comparison-order difference with an analytic bound on the mass
    outside the window.
    """
    spec = quad_spec or QuadSpec()
    theta = np.asarray(theta, dtype=float)
    if m < 1 or m > MAX_QUAD_M:
        raise ValueError(f"m must be in [1, {MAX_QUAD_M}]")
    active = _active_cells(theta)
    if len(active) <= 1:
        return DistanceEstimate(value=0.0, kind="hellinger", method="quadrature",
                                error_bar=0.0, params={"m": m, "theta": theta.tolist()})
    sub = theta[active]
    sub = sub / sub.sum()
    r = len(sub)
    if r > 4:
        raise UnsupportedArity(f"quadrature supports up to 4 cells, got {r}; use tv_monte_carlo")
    h2 = _hellinger_sq_window(m, sub, spec.order, spec.window, spec.chunk_cells)
    h2_cmp = _hellinger_sq_window(m, sub, spec.compare_order, spec.window, spec.chunk_cells)
    value = math.sqrt(max(h2, 0.0))
    err = abs(value - math.sqrt(max(h2_cmp, 0.0)))
    err += math.sqrt(2.0 * _tail_mass_bound(m, sub, spec.window))
    return DistanceEstimate(value=value, kind="hellinger", method="quadrature",
                            error_bar=err, params={"m": m, "theta": theta.tolist(),
                                                   "order": spec.order})


def product_hellinger_bound(h_squares) -> float:
    """Combine per-record squared distances: sqrt of the sum.

    ``None`` entries mark degenerate records (single-cell laws), which
    contribute zero.
    """
    total = 0.0
    for h2 in h_squares:
        if h2 is None:
            continue
        if h2 < 0:
            raise ValueError("squared distances must be nonnegative")
        total += h2
    return math.sqrt(total)


# --- total variation --------------------------------------------------------------


def tv_monte_carlo(sampler_p, density_p, density_q, n_samples: int, seed: int) -> DistanceEstimate:
    """Estimate TV(P, Q) = E_P[max(0, 1 - q/p)] with a 95% CLT half-width."""
    rng = substream(seed)
    x = sampler_p(rng, n_samples)
    p = np.asarray(density_p(x), dtype=float)
    if np.any(p <= 0):
        raise ZeroDensity("sampling density vanished at a drawn point")
    q = np.asarray(density_q(x), dtype=float)
    vals = np.maximum(0.0, 1.0 - q / p)
    value = float(vals.mean())
    half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(n_samples)
    return DistanceEstimate(value=value, kind="tv", method="monte_carlo",
                            error_bar=half, params={"n_samples": n_samples})


def tv_perturbed_vs_gaussian(m: int, theta, n_samples: int, seed: int) -> DistanceEstimate:
    """TV between the perturbed count law and the matched normal, by Monte Carlo."""
    theta = np.asarray(theta, dtype=float)
    active = _active_cells(theta)
    if len(active) <= 1:
        return DistanceEstimate(value=0.0, kind="tv", method="monte_carlo",
                                error_bar=0.0, params={"m": m, "theta": theta.tolist()})
    sub = theta[active]
    sub = sub / sub.sum()
    est = tv_monte_carlo(
        perturbed_sampler(m, sub),
        lambda x: perturbed_density(m, sub, x),
        lambda x: gaussian_marginal_density(m, sub, x),
        n_samples, seed,
    )
    return DistanceEstimate(value=est.value, kind="tv", method="monte_carlo",
                            error_bar=est.error_bar,
                            params={"m": m, "theta": theta.tolist(), "n_samples": n_samples})


def conditional_tv_bound(marginal_gap: float, weighted_tvs) -> float:
    """Two-stage bound: marginal ratio gap plus weight-averaged conditional TVs."""
    weights = np.array([w for w, _ in weighted_tvs], dtype=float)
    if len(weights) and (np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9):
        raise ValueError("weights must form a probability vector")
    return float(marginal_gap + sum(w * tv for w, tv in weighted_tvs))


# --- scaling study ------------------------------------------------------------------


@dataclass
class ScalingReport:
    theta: list
    m_grid: list
    values: list
    error_bars: list
    slope: float
    band: tuple = SLOPE_BAND
    passed: bool = False


def fit_loglog_slope(m_grid, values) -> float:
    """Least-squares slope of log(value) against log(m)."""
    return float(np.polyfit(np.log(np.asarray(m_grid, dtype=float)),
                            np.log(np.asarray(values, dtype=float)), 1)[0])


def scaling_study(theta, m_grid, quad_spec: QuadSpec = None) -> ScalingReport:
    """Hellinger distance across a repetition grid, with its log-log slope."""
    m_grid = [int(m) for m in m_grid]
    if len(m_grid) < 4:
        raise ValueError("scaling study needs at least 4 grid points")
    estimates = [hellinger_perturbed_vs_gaussian(m, theta, quad_spec) for m in m_grid]
    values = [e.value for e in estimates]
    slope = fit_loglog_slope(m_grid, values)
    return ScalingReport(
        theta=list(np.asarray(theta, dtype=float)),
        m_grid=m_grid,
        values=values,
        error_bars=[e.error_bar for e in estimates],
        slope=slope,
        band=SLOPE_BAND,
        passed=SLOPE_BAND[0] <= slope <= SLOPE_BAND[1],
    )


def write_scaling_csv(report: ScalingReport, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "H", "error_bar"])
        for m, h, e in zip(report.m_grid, report.values, report.error_bars):
            writer.writerow([m, format(h, ".17g"), format(e, ".17g")])


def write_scaling_json(report: ScalingReport, path) -> None:
    payload = {
        "theta": report.theta,
        "slope": report.slope,
        "band": list(report.band),
        "passed": report.passed,
        "m_grid": report.m_grid,
        "values": report.values,
        "error_bars": report.error_bars,
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_distance_json(estimates, path) -> None:
    payload = [
        {"value": e.value, "kind": e.kind, "method": e.method,
         "error_bar": e.error_bar, "params": e.params}
        for e in estimates
    ]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
