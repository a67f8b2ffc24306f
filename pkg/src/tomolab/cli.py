"""Config-driven experiment runner.

Usage::

    tomolab run --config experiment.cfg [--threads N] [--out DIR]

The config is INI-style (flat key = value lines inside [section] blocks);
see the README for the full schema.  Every run writes a ``manifest.json``
(config echo, versions, effective seed) next to the task artifacts, enough
to reproduce each artifact bit-exactly.  The environment variable
``TOMOLAB_SEED`` overrides the configured seed.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 config or
I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__, bases, diagnostics, equivalence, measurement, regression, states
from .errors import ConfigParseError, TomolabError
from .hermitian import read_matrix, trace_product
from .rng import substream

__all__ = ["ExperimentConfig", "ReportBundle", "load_config", "run", "estimator_transfer", "main"]

TASKS = ("simulate", "translate", "distances", "zeta", "corollaries",
         "estimator_transfer", "scaling")

ENVELOPE = {"d": 16, "m": 4096, "n": 100_000}


@dataclass
class ExperimentConfig:
    task: str
    basis_kind: str = "pauli"
    d: int = 4
    g_file: str = None
    witness: str = None
    beta: float = 0.5
    j_star: int = 1
    state_class: str = None
    s: int = None
    r: int = None
    gamma: int = None
    matrix_file: str = None
    design_mode: str = "fixed"
    pi: np.ndarray = None
    xi: np.ndarray = None
    n: int = None
    m: int = 64
    seed: int = 20130204
    detail: str = "summary"
    out_dir: str = "tomolab_out"
    threads: int = 1
    active_tol: float = 1e-9
    c0: float = None
    c1: float = None
    thetas: list = field(default_factory=lambda: [[0.5, 0.5]])
    m_grid: list = field(default_factory=lambda: [16, 64, 256, 1024, 4096])
    tv_samples: int = 50_000
    replications: int = 600
    witnesses: list = field(default_factory=list)
    witness_files: list = field(default_factory=list)
    class_samples: int = 20
    raw_text: str = ""


@dataclass
class ReportBundle:
    manifest: dict
    artifacts: list
    checks: list

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _parse_vector(text: str):
    return np.array([float(t) for t in text.replace(";", ",").split(",") if t.strip()])


def _parse_theta_list(text: str):
    return [[float(v) for v in part.split(",") if v.strip()]
            for part in text.split(";") if part.strip()]


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        parser.read_string(raw)
    except (OSError, configparser.Error) as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc

    def get(section, key, cast=str, default=None):
        if parser.has_option(section, key):
            try:
                return cast(parser.get(section, key))
            except ValueError as exc:
                raise ConfigParseError(f"bad value for [{section}] {key}: {exc}") from exc
        return default

    task = get("run", "task")
    if task not in TASKS:
        raise ConfigParseError(f"task must be one of {TASKS}, got {task!r}")
    cfg = ExperimentConfig(
        task=task,
        basis_kind=get("basis", "kind", str, "pauli"),
        d=get("basis", "d", int, 4),
        g_file=get("basis", "g_file"),
        witness=get("state", "witness"),
        beta=get("state", "beta", float, 0.5),
        j_star=get("state", "j_star", int, 1),
        state_class=get("state", "class"),
        s=get("state", "s", int),
        r=get("state", "r", int),
        gamma=get("state", "gamma", int),
        matrix_file=get("state", "matrix_file"),
        design_mode=get("design", "mode", str, "fixed"),
        pi=get("design", "pi", _parse_vector),
        xi=get("design", "xi", _parse_vector),
        n=get("run", "n", int),
        m=get("run", "m", int, 64),
        seed=get("run", "seed", int, 20130204),
        detail=get("run", "detail", str, "summary"),
        out_dir=get("run", "out", str, "tomolab_out"),
        threads=get("run", "threads", int, 1),
        active_tol=get("tolerances", "active_tol", float, 1e-9),
        c0=get("tolerances", "c0", float),
        c1=get("tolerances", "c1", float),
        tv_samples=get("distances", "tv_samples", int, 50_000),
        replications=get("transfer", "replications", int, 600),
        class_samples=get("corollaries", "samples", int, 20),
        raw_text=raw,
    )
    # the task's own section wins; the others serve as fallbacks
    own = {"distances": "distances", "scaling": "scaling",
           "estimator_transfer": "transfer"}.get(task)
    sections = ([own] if own else []) + ["distances", "scaling", "transfer"]
    for section in sections:
        if section == "transfer":
            continue
        thetas = get(section, "theta", _parse_theta_list)
        if thetas:
            cfg.thetas = thetas
            break
    for section in sections:
        grid = get(section, "m_grid", _parse_vector)
        if grid is not None:
            cfg.m_grid = [int(v) for v in grid]
            break
    wit = get("zeta", "witnesses") or get("corollaries", "witnesses")
    if wit:
        cfg.witnesses = [w.strip() for w in wit.split(",") if w.strip()]
    wfiles = get("zeta", "witness_files")
    if wfiles:
        cfg.witness_files = [w.strip() for w in wfiles.split(",") if w.strip()]

    if "TOMOLAB_SEED" in os.environ:
        cfg.seed = int(os.environ["TOMOLAB_SEED"])
    _check_envelope(cfg)
    return cfg


def _check_envelope(cfg: ExperimentConfig) -> None:
    if cfg.d > ENVELOPE["d"]:
        raise ConfigParseError(f"d = {cfg.d} exceeds envelope {ENVELOPE['d']}")
    if cfg.m > ENVELOPE["m"]:
        raise ConfigParseError(f"m = {cfg.m} exceeds envelope {ENVELOPE['m']}")
    if cfg.n is not None and cfg.n > ENVELOPE["n"]:
        raise ConfigParseError(f"n = {cfg.n} exceeds envelope {ENVELOPE['n']}")
    if any(m > ENVELOPE["m"] for m in cfg.m_grid):
        raise ConfigParseError(f"m_grid exceeds envelope {ENVELOPE['m']}")
    for fname in [cfg.g_file, cfg.matrix_file] + list(cfg.witness_files):
        if fname and not os.path.exists(fname):
            raise ConfigParseError(f"referenced file does not exist: {fname}")


def _build_basis(cfg: ExperimentConfig) -> bases.ObservableBasis:
    g = None
    if cfg.basis_kind == "gvector":
        if cfg.g_file is None:
            raise ConfigParseError("gvector basis requires g_file")
        g = np.loadtxt(cfg.g_file)
    return bases.build_basis(cfg.basis_kind, cfg.d, g_vectors=g)


def _build_state(cfg: ExperimentConfig, basis) -> states.DensityMatrix:
    if cfg.matrix_file:
        return states.validate_density(read_matrix(cfg.matrix_file))
    if cfg.witness:
        return states.witness_state(cfg.witness, cfg.d, j_star=cfg.j_star, beta=cfg.beta)
    if cfg.state_class:
        g = basis.g_vectors
        if g is None and cfg.state_class == "low_rank_sparse_vec":
            b = int(round(np.log2(cfg.d)))
            g = bases.haar_wavelet_vectors(cfg.d) if 2 ** b == cfg.d else np.eye(cfg.d)
        spec = states.StateClassSpec(class_name=cfg.state_class, s=cfg.s, r=cfg.r,
                                     gamma=cfg.gamma, g_vectors=g)
        return states.sample_class(spec, cfg.d, cfg.seed)
    return states.validate_density(np.eye(cfg.d, dtype=complex) / cfg.d)


def _build_design(cfg: ExperimentConfig, basis) -> bases.SamplingDesign:
    if cfg.design_mode == "fixed":
        return bases.SamplingDesign.fixed()
    p = basis.size
    pi = cfg.pi if cfg.pi is not None else np.full(p, 1.0 / p)
    xi = cfg.xi if cfg.xi is not None else pi
    return bases.SamplingDesign.random(pi, xi)


# --- tasks -------------------------------------------------------------------


def _task_simulate(cfg, basis, state, design, out, artifacts, checks):
    n = cfg.n if cfg.n is not None else (basis.size if design.mode == "fixed" else 0)
    dataset = measurement.run_tomography(state, basis, design, n, cfg.m, cfg.seed,
                                         detail=cfg.detail)
    path = os.path.join(out, "tomography.csv")
    measurement.write_dataset_csv(dataset, path)
    artifacts.append(path)
    if dataset.individuals is not None:
        ipath = os.path.join(out, "individuals.csv")
        measurement.write_individuals_csv(dataset, ipath)
        artifacts.append(ipath)
    coarse = regression.simulate_coarse(state, basis, design, n, cfg.m, cfg.seed)
    cpath = os.path.join(out, "coarse.csv")
    regression.write_coarse_csv(coarse, cpath)
    artifacts.append(cpath)
    fine = regression.simulate_fine(state, basis, design, n, cfg.m, cfg.seed)
    fpath = os.path.join(out, "fine.csv")
    regression.write_fine_csv(fine, fpath)
    artifacts.append(fpath)


def _task_translate(cfg, basis, state, design, out, artifacts, checks):
    n = cfg.n if cfg.n is not None else (basis.size if design.mode == "fixed" else 0)
    dataset = measurement.run_tomography(state, basis, design, n, cfg.m, cfg.seed)
    translated = equivalence.translate_qst_to_regression(dataset, cfg.seed)
    tpath = os.path.join(out, "translated_fine.csv")
    regression.write_fine_csv(translated, tpath)
    artifacts.append(tpath)
    back = equivalence.translate_regression_to_qst(translated, cfg.m, basis)
    exact = len(back.records) == len(dataset.records) and all(
        np.array_equal(rec.counts, orig.counts)
        for rec, orig in zip(back.records, dataset.records))
    payload = {"roundtrip_exact": bool(exact), "dropped": back.dropped,
               "records": len(dataset.records)}
    jpath = os.path.join(out, "translate.json")
    diagnostics.write_report_json(payload, jpath)
    artifacts.append(jpath)
    checks.append({"name": "kernel-roundtrip", "anchor": "kernel-pair",
                   "passed": bool(exact and back.dropped == 0)})


def _task_distances(cfg, basis, state, design, out, artifacts, checks):
    points = [(theta, int(m)) for theta in cfg.thetas for m in cfg.m_grid]

    def one(point):
        theta, m = point
        hel = equivalence.hellinger_perturbed_vs_gaussian(m, theta)
        tv = equivalence.tv_perturbed_vs_gaussian(m, theta, cfg.tv_samples, cfg.seed)
        return hel, tv

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(one, points))
    else:
        results = [one(pt) for pt in points]

    rows, estimates = [], []
    ok_all = True
    for (theta, m), (hel, tv) in zip(points, results):
        ok = tv.value <= hel.value + hel.error_bar + tv.error_bar
        ok_all &= ok
        rows.append({"theta": theta, "m": m, "hellinger": hel.value,
                     "hellinger_err": hel.error_bar, "tv": tv.value,
                     "tv_err": tv.error_bar, "tv_le_hellinger": bool(ok)})
        estimates.extend([hel, tv])
    jpath = os.path.join(out, "distances.json")
    diagnostics.write_report_json({"grid": rows}, jpath)
    artifacts.append(jpath)
    fpath = os.path.join(out, "distance_fixtures.json")
    equivalence.write_distance_json(estimates, fpath)
    artifacts.append(fpath)
    checks.append({"name": "tv-below-hellinger", "anchor": "tv-hellinger-inequality",
                   "passed": bool(ok_all)})


def _task_zeta(cfg, basis, state, design, out, artifacts, checks):
    names = cfg.witnesses or ([cfg.witness] if cfg.witness else [])
    wit = [states.witness_state(nm, cfg.d, j_star=cfg.j_star, beta=cfg.beta)
           for nm in names]
    for path in cfg.witness_files:
        wit.append(states.validate_density(read_matrix(path)))
        names.append(os.path.basename(path))
    if not wit:
        wit, names = [state], ["configured-state"]
    weights = None
    if design.mode == "random":
        weights = [design.weights_regression, design.weights_tomography]
    c_bounds = (cfg.c0, cfg.c1) if cfg.c0 is not None and cfg.c1 is not None else None
    report = diagnostics.zeta_fraction(wit, basis, weights=weights,
                                       tol=cfg.active_tol, state_labels=names,
                                       c_bounds=c_bounds)
    payload = {
        "zeta": report.zeta,
        "fractions": list(report.fractions),
        "counts": list(report.counts),
        "states": list(report.state_labels),
        "active_trace_min": report.c3_min,
        "active_trace_max": report.c3_max,
    }
    if c_bounds is not None:
        payload["c3_bounds"] = list(c_bounds)
        payload["c3_ok"] = report.c3_ok
        checks.append({"name": "c3-trace-window", "anchor": "active-trace-window",
                       "passed": bool(report.c3_ok)})
    if design.mode == "random":
        payload["gamma_p"] = diagnostics.gamma_p(design.weights_regression,
                                                 design.weights_tomography)
    jpath = os.path.join(out, "zeta.json")
    diagnostics.write_report_json(payload, jpath)
    artifacts.append(jpath)


def _task_corollaries(cfg, basis, state, design, out, artifacts, checks):
    results = corollary_suite(cfg.d, cfg.seed, samples=cfg.class_samples)
    jpath = os.path.join(out, "corollaries.json")
    diagnostics.write_report_json({"checks": results}, jpath)
    artifacts.append(jpath)
    for res in results:
        checks.append({"name": res["name"], "anchor": res["anchor"],
                       "passed": res["passed"]})


def _task_transfer(cfg, basis, state, design, out, artifacts, checks):
    report = estimator_transfer_sweep(state, basis, cfg.m_grid, cfg.seed,
                                      replications=cfg.replications)
    jpath = os.path.join(out, "transfer.json")
    diagnostics.write_report_json(report, jpath)
    artifacts.append(jpath)
    cpath = os.path.join(out, "transfer.csv")
    with open(cpath, "w", encoding="ascii") as fh:
        fh.write("m,risk_counts,risk_gaussian,gap,gap_se\n")
        for row in report["sweep"]:
            fh.write(f"{row['m']},{row['risk_counts']:.17g},{row['risk_gaussian']:.17g},"
                     f"{row['gap']:.17g},{row['gap_se']:.17g}\n")
    artifacts.append(cpath)
    checks.append({"name": "risk-gap-monotone", "anchor": "estimator-transfer",
                   "passed": report["monotone"]})


def _task_scaling(cfg, basis, state, design, out, artifacts, checks):
    ok_all = True
    for i, theta in enumerate(cfg.thetas):
        report = equivalence.scaling_study(theta, cfg.m_grid)
        cpath = os.path.join(out, f"scaling_{i}.csv")
        equivalence.write_scaling_csv(report, cpath)
        artifacts.append(cpath)
        jpath = os.path.join(out, f"scaling_{i}.json")
        equivalence.write_scaling_json(report, jpath)
        artifacts.append(jpath)
        ok_all &= report.passed
    checks.append({"name": "hellinger-slope-band", "anchor": "perturbed-count-scaling",
                   "passed": bool(ok_all)})


_TASK_FNS = {
    "simulate": _task_simulate,
    "translate": _task_translate,
    "distances": _task_distances,
    "zeta": _task_zeta,
    "corollaries": _task_corollaries,
    "estimator_transfer": _task_transfer,
    "scaling": _task_scaling,
}


def run(cfg: ExperimentConfig) -> ReportBundle:
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    basis = _build_basis(cfg)
    state = _build_state(cfg, basis)
    design = _build_design(cfg, basis)
    artifacts, checks = [], []
    _TASK_FNS[cfg.task](cfg, basis, state, design, out, artifacts, checks)
    manifest = {
        "task": cfg.task,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "versions": {"tomolab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "config": cfg.raw_text,
        "artifacts": [os.path.basename(a) for a in artifacts],
        "checks": checks,
    }
    mpath = os.path.join(out, "manifest.json")
    diagnostics.write_report_json(manifest, mpath)
    return ReportBundle(manifest=manifest, artifacts=artifacts + [mpath], checks=checks)


# --- estimator transfer --------------------------------------------------------


def estimator_transfer(rho, basis, n: int, m: int, seed: int,
                       replications: int = 600) -> dict:
    """Compare coefficient estimators fed by counts vs by Gaussian samples.

    Fixed design over an orthogonal family (n = p): each replication
    estimates every expansion coefficient by the per-observable average
    outcome, once from the counted experiment and once from the Gaussian one,
    normalizing by the member's squared norm.  Reports per-coefficient
    squared errors and the paired gap in total squared risk.
    """
    if basis.kind not in ("hermitian", "pauli", "gvector"):
        raise TomolabError("estimator transfer requires an orthogonal family")
    p = basis.size
    if n != p:
        raise TomolabError(f"fixed design requires n = p = {p}")
    mat = rho.matrix if isinstance(rho, states.DensityMatrix) else np.asarray(rho)
    rng = substream(seed, 4)  # own stream family, disjoint from the simulators
    norms = np.array([trace_product(b, b).real for b in basis.matrices])
    alpha = np.array([trace_product(b, mat).real for b in basis.matrices]) / norms
    err_counts = np.empty((replications, p))
    err_gauss = np.empty((replications, p))
    for j in range(p):
        theta = measurement.cell_probabilities(states.DensityMatrix(mat), basis, j)
        lam = basis.decompositions[j].eigenvalues
        counts = rng.multinomial(m, theta, size=replications)
        n_avg = counts @ lam / m
        est_c = n_avg / norms[j]
        mean = trace_product(basis.matrices[j], mat).real
        sd = np.sqrt(regression.noise_variance_coarse(mat, basis.matrices[j]) / m)
        est_g = (mean + sd * rng.standard_normal(replications)) / norms[j]
        err_counts[:, j] = (est_c - alpha[j]) ** 2
        err_gauss[:, j] = (est_g - alpha[j]) ** 2
    risk_c = err_counts.sum(axis=1)
    risk_g = err_gauss.sum(axis=1)
    diff = risk_c - risk_g
    gap_se = float(diff.std(ddof=1) / np.sqrt(replications))
    return {
        "m": m,
        "replications": replications,
        "per_j_sq_error_counts": err_counts.mean(axis=0).tolist(),
        "per_j_sq_error_gaussian": err_gauss.mean(axis=0).tolist(),
        "risk_counts": float(risk_c.mean()),
        "risk_gaussian": float(risk_g.mean()),
        "gap": float(abs(diff.mean())),
        "gap_se": gap_se,
    }


def estimator_transfer_sweep(rho, basis, m_grid, seed: int, replications: int = 600) -> dict:
    """Run the transfer comparison across a repetition grid; check the gap shrinks."""
    sweep = [estimator_transfer(rho, basis, basis.size, int(m), seed, replications)
             for m in m_grid]
    monotone = all(
        sweep[i + 1]["gap"] <= sweep[i]["gap"] + sweep[i]["gap_se"] + sweep[i + 1]["gap_se"]
        for i in range(len(sweep) - 1))
    return {"sweep": sweep, "monotone": bool(monotone)}


# --- corollary verification suite ------------------------------------------------


def corollary_suite(d: int, seed: int, samples: int = 20, tol: float = 1e-9) -> list:
    """The four witness-and-count checks over the built-in families at dimension d.

    The two counting checks (sparse entries, sparse-vector mixtures) evaluate
    the nominal bounds d*s_d and 8*r*gamma^2 + 2*r*gamma; each result also
    reports the observed maximum count so discrepancies stay visible.
    """
    results = []
    p = d * d

    # sparse-entry states against the hermitian family
    herm = bases.build_basis("hermitian", d)
    worst = {}
    for s in (1, 2, 4):
        max_count, violations, corrected_ok = 0, 0, True
        for i in range(samples):
            st = states.sample_class(states.StateClassSpec("entry_sparse", s=s), d,
                                     seed + 1000 * s + i)
            s_d = int(np.sum(np.abs(np.diag(st.matrix)) > tol))
            count = diagnostics.active_index_set(st, herm, tol).nondegenerate_count
            max_count = max(max_count, count)
            violations += count > d * s_d
            corrected_ok &= count <= 2 * d * s_d - s_d * s_d
        worst[f"s{s}"] = {"max_count": max_count, "bound_rule": f"{d}*s_d per state",
                          "violations": int(violations), "samples": samples,
                          "corrected_rule_ok": bool(corrected_ok),
                          "ok": violations == 0}
    results.append({
        "name": "sparse-entry-count", "anchor": "corollary1",
        "passed": all(v["ok"] for v in worst.values()),
        "details": worst,
    })

    # the one-direction line state against the Pauli family
    pauli = bases.build_basis("pauli", d) if (d & (d - 1)) == 0 else None
    if pauli is not None:
        ok = True
        detail = {}
        for beta in (0.1, 0.5, 0.9):
            st = states.pauli_line_state(d, 1, beta)
            report = diagnostics.active_index_set(st, pauli, tol)
            zeta = diagnostics.zeta_fraction([st], pauli, tol=tol).zeta
            dec1 = pauli.decompositions[0]
            trace_id = dec1.cell_traces(st.matrix)[0]
            ok &= abs(trace_id - 1.0) <= tol
            ok &= report.nondegenerate_count == p - 1
            ok &= abs(zeta - (p - 1) / p) <= tol
            detail[str(beta)] = {"nondegenerate": report.nondegenerate_count,
                                 "zeta": zeta}
        results.append({"name": "pauli-line-witness", "anchor": "corollary2",
                        "passed": bool(ok), "details": detail})

        # the tilted product state
        st = states.tilted_product_state(int(round(np.log2(d))))
        ok = True
        lo, hi = np.inf, -np.inf
        for j in range(1, p):
            tr = pauli.decompositions[j].cell_traces(st.matrix)
            ok &= tr[0] >= 0.5 - tol and tr[1] >= 1.0 / 7.0 - tol
            lo, hi = min(lo, tr.min()), max(hi, tr.max())
        zeta = diagnostics.zeta_fraction([st], pauli, tol=tol).zeta
        ok &= abs(zeta - (p - 1) / p) <= tol
        results.append({"name": "tilted-product-witness", "anchor": "corollary3",
                        "passed": bool(ok),
                        "details": {"zeta": zeta, "min_trace": lo, "max_trace": hi}})

    # sparse-vector mixtures against a g-vector family
    b = int(round(np.log2(d)))
    g = bases.haar_wavelet_vectors(d) if 2 ** b == d else np.eye(d)
    gbasis = bases.build_basis("gvector", d, g_vectors=g)
    worst = {}
    for (r, gam) in ((1, 1), (2, 2)):
        max_count, violations, corrected_ok = 0, 0, True
        bound = 8 * r * gam * gam + 2 * r * gam
        for i in range(samples):
            spec = states.StateClassSpec("low_rank_sparse_vec", r=r, gamma=gam, g_vectors=g)
            st = states.sample_class(spec, d, seed + 7000 * r + 100 * gam + i)
            count = diagnostics.active_index_set(st, gbasis, tol).nondegenerate_count
            max_count = max(max_count, count)
            violations += count > bound
            # union g-support of the eigenvectors gives the per-family
            # at-least-one-endpoint pair count, plus the diagonal members
            evals, evecs = np.linalg.eigh(st.matrix)
            coeffs = g.T @ evecs[:, evals > tol]
            u = int(np.sum(np.any(np.abs(coeffs) > tol, axis=1)))
            corrected = 2 * (u * d - u * (u + 1) // 2) + u
            corrected_ok &= count <= corrected
        worst[f"r{r}g{gam}"] = {"max_count": max_count, "bound": bound,
                                "violations": int(violations), "samples": samples,
                                "corrected_rule_ok": bool(corrected_ok),
                                "ok": violations == 0}
    results.append({
        "name": "sparse-vector-count", "anchor": "corollary4",
        "passed": all(v["ok"] for v in worst.values()),
        "details": worst,
    })
    return results


# --- entry point -----------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tomolab",
                                     description="config-driven tomography/regression lab")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute the task in a config file")
    runp.add_argument("--config", required=True)
    runp.add_argument("--threads", type=int, default=None)
    runp.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg.threads = max(1, args.threads)
        if args.out is not None:
            cfg.out_dir = args.out
        bundle = run(cfg)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (TomolabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for check in bundle.checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']} ({check['anchor']})")
    print(f"artifacts in {cfg.out_dir}")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
