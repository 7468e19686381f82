"""Experiment runners: each turns a :class:`SweepConfig` into a :class:`SweepResult`.

First-pair curves use the closed-form series, which scales to large cutoffs.
Anything that needs the residual field (uncertainty function, second pair,
decay, staggered entry) runs on the dense two-cavity state and is limited to
``n_max <= DENSE_N_MAX``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np

from ..dynamics import (
    apply_cavity_decay,
    closed_form_elements,
    field_after_pair,
    max_over_tau2,
    pair_state_from_field,
)
from ..errors import ConfigError, ConvergenceError
from ..measures import (
    boundary_curve,
    boundary_negativity,
    covariance_matrix,
    distance_to_boundary,
    linear_entropy,
    negativity,
    simon_delta,
)
from ..qubits import QubitPairMatrix
from ..squeezing import (
    SqueezeParams,
    assemble_cavity_state_closed_form,
    auto_n_max,
    prepare_cavity_state_oracle,
    series_tables,
    truncation_weight,
)
from .config import SweepConfig, grid_values
from .results import SweepResult

DENSE_N_MAX = 45
ORACLE_N_MAX = 30
CONVERGENCE_START = 5
CONVERGENCE_STEP = 5

CURVE_COLUMNS = (
    "r", "sin2_theta", "n_max", "tau1", "delta_tau", "kappa_tbar",
    "eps_npt", "s_l", "eps_boundary", "delta_ns", "eps_npt_34", "tau2_star", "is_peak",
)
FIG3_COLUMNS = CURVE_COLUMNS + ("boundary_distance",)
FIG5_COLUMNS = CURVE_COLUMNS + ("eps_npt_34_decay", "tau2_star_decay")
PREPARE_COLUMNS = (
    "r", "sin2_theta", "n_max", "truncation_weight", "mean_photons_a", "mean_photons_b",
    "photon_covariance", "delta_ns", "oracle_max_diff",
)
BOUNDARY_COLUMNS = ("family", "p", "s_l", "eps_npt", "eps_boundary")
CONVERGENCE_COLUMNS = ("r", "n_max", "truncation_weight", "max_change", "selected")


# ---------------------------------------------------------------- helpers

def _pool_map(fn, tasks, jobs):
    """``map`` over a process pool; output order always follows ``tasks``."""
    tasks = list(tasks)
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _n_max_for(cfg: SweepConfig, r: float) -> int:
    if cfg.n_max == "auto":
        return auto_n_max(r, cfg.tol("truncation"))
    return int(cfg.n_max)


def _params(cfg: SweepConfig, r: float) -> SqueezeParams:
    # raises TruncationError when a fixed n_max is too small for r
    return SqueezeParams.from_mixing(r, cfg.sin2_theta, _n_max_for(cfg, r), cfg.tol("truncation"))


def _require_dense(params: SqueezeParams, what: str):
    if params.n_max > DENSE_N_MAX:
        raise ConfigError(
            f"{what} needs the dense cavity state, limited to n_max <= {DENSE_N_MAX} "
            f"(r={params.r} resolved to {params.n_max})",
            "n_max",
        )


@lru_cache(maxsize=4)
def _cavity(r, theta, n_max, tol):
    return assemble_cavity_state_closed_form(SqueezeParams(r, theta, n_max, tol))


def _key(p: SqueezeParams):
    return (p.r, p.theta, p.n_max, p.tol_trunc)


def _pair_metrics(pair: QubitPairMatrix):
    return negativity(pair), linear_entropy(pair)


def peak_flags(values) -> list:
    """Local maxima of a sampled curve (``None`` entries are skipped).

    A point is a peak if it is positive, strictly above its left neighbour and
    not below its right one; grid ends count their single neighbour only.  On
    a plateau only the first point is flagged, i.e. ties go to the smallest tau.
    """
    v = [-math.inf if x is None else x for x in values]
    out = []
    for i, x in enumerate(v):
        left = v[i - 1] if i > 0 else -math.inf
        right = v[i + 1] if i + 1 < len(v) else -math.inf
        out.append(int(x > 0 and x > left and x >= right))
    return out


def grid_argmax(taus, values):
    """Discrete argmax, ties to the smallest tau."""
    best_t, best = None, -math.inf
    for t, x in zip(taus, values):
        if x is not None and x > best:
            best_t, best = t, x
    return best_t, best


def _resolved(cfg: SweepConfig) -> dict:
    # where the output goes does not affect it, so it stays out of the header
    out = cfg.to_dict()
    del out["output_path"]
    return out


def _base_metadata(cfg: SweepConfig, params_by_r: dict) -> dict:
    return {
        "config": _resolved(cfg),
        "n_max": {repr(r): p.n_max for r, p in params_by_r.items()},
        "truncation_weight": {repr(r): p.weight for r, p in params_by_r.items()},
        "tolerances": dict(cfg.tolerances),
    }


# ---------------------------------------------------------------- point workers

def _dense_point(task):
    """All field-route quantities at one ``(r, tau1)``; ``None`` where not requested."""
    key, tau1, delta_tau, want_delta, tau2_grid, kappas = task
    out = {"eps_npt": None, "s_l": None, "delta_ns": None, "second": []}
    if tau1 < delta_tau:
        return out
    rho = _cavity(*key)
    tau_b = tau1 - delta_tau
    out["eps_npt"], out["s_l"] = _pair_metrics(pair_state_from_field(rho, tau1, tau_b))
    if not want_delta and tau2_grid is None:
        return out
    field = field_after_pair(rho, tau1, tau_b)
    if want_delta:
        out["delta_ns"] = simon_delta(covariance_matrix(field), partial_transposed=True)
    if tau2_grid is not None:
        for kappa in kappas:
            out["second"].append(max_over_tau2(apply_cavity_decay(field, kappa), tau2_grid))
    return out


def _closed_form_curve(params: SqueezeParams, taus):
    A, B, C, D, F = closed_form_elements(params.r, params.theta, taus, params.n_max, params.tol_trunc)
    eps, s_l = [], []
    for a, b, c, d, f in zip(A, B, C, D, F):
        e, s = _pair_metrics(QubitPairMatrix.from_elements(a, b, c, d, f))
        eps.append(e)
        s_l.append(s)
    return eps, s_l


def _curve_rows(cfg, jobs, want_delta=False, tau2=False, kappas=(0.0,), force_dense=False):
    """Rows of :data:`CURVE_COLUMNS` per ``(r, tau1)`` plus the per-r params."""
    taus = [float(t) for t in grid_values(cfg.tau1_grid)]
    dt = cfg.delta_tau or 0.0
    tau2_grid = tuple(float(t) for t in grid_values(cfg.tau2_grid)) if tau2 else None
    params_by_r = {r: _params(cfg, r) for r in cfg.r_values}
    dense = force_dense or want_delta or tau2 or dt > 0
    points = {}
    if dense:
        for p in params_by_r.values():
            _require_dense(p, "this experiment")
        tasks = [(_key(p), t, dt, want_delta, tau2_grid, kappas)
                 for p in params_by_r.values() for t in taus]
        res = _pool_map(_dense_point, tasks, jobs)
        for i, r in enumerate(cfg.r_values):
            points[r] = res[i * len(taus):(i + 1) * len(taus)]
    else:
        for r, p in params_by_r.items():
            eps, s_l = _closed_form_curve(p, taus)
            points[r] = [{"eps_npt": e, "s_l": s, "delta_ns": None, "second": []} for e, s in zip(eps, s_l)]

    rows, extra = [], []
    for r in cfg.r_values:
        p = params_by_r[r]
        pts = points[r]
        flags = peak_flags([q["eps_npt"] for q in pts])
        for t, q, flag in zip(taus, pts, flags):
            t34, e34 = q["second"][0] if q["second"] else (None, None)
            eps_b = None if q["s_l"] is None else float(boundary_negativity(q["s_l"]))
            rows.append([
                r, cfg.sin2_theta, p.n_max, t, dt, kappas[0] if tau2 else None,
                q["eps_npt"], q["s_l"], eps_b, q["delta_ns"], e34, t34, flag,
            ])
            extra.append(q["second"][1:])
    return rows, extra, params_by_r, taus


def _peak_metadata(cfg, rows, columns):
    i_r, i_t, i_e, i_p = (columns.index(c) for c in ("r", "tau1", "eps_npt", "is_peak"))
    peaks, argmax = {}, {}
    for r in cfg.r_values:
        sub = [row for row in rows if row[i_r] == r]
        peaks[repr(r)] = [row[i_t] for row in sub if row[i_p]]
        t, e = grid_argmax([row[i_t] for row in sub], [row[i_e] for row in sub])
        argmax[repr(r)] = {"tau1": t, "eps_npt": e}
    return {"peaks": peaks, "argmax": argmax}


# ---------------------------------------------------------------- experiments

def run_fig2(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """First-pair negativity versus tau1 for each r, with local peaks flagged."""
    rows, _, params_by_r, _ = _curve_rows(config, jobs)
    meta = _base_metadata(config, params_by_r)
    meta.update(_peak_metadata(config, rows, CURVE_COLUMNS))
    meta["route"] = "field" if config.delta_tau else "closed_form"
    return SweepResult("fig2", CURVE_COLUMNS, rows, meta)


def run_fig3(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Trajectories in the (linear entropy, negativity) plane against the frontier."""
    rows, _, params_by_r, _ = _curve_rows(config, jobs)
    i_s, i_e, i_r, i_b = (CURVE_COLUMNS.index(c) for c in ("s_l", "eps_npt", "r", "eps_boundary"))
    valid = [row for row in rows if row[i_e] is not None]
    dist = distance_to_boundary(np.array([row[i_s] for row in valid]), np.array([row[i_e] for row in valid]))
    it = iter(dist)
    out = [row + [float(next(it)) if row[i_e] is not None else None] for row in rows]
    meta = _base_metadata(config, params_by_r)
    meta["min_boundary_distance"] = {
        repr(r): min(row[-1] for row in out if row[i_r] == r and row[-1] is not None)
        for r in config.r_values
    }
    meta["max_boundary_excess"] = max(row[i_e] - row[i_b] for row in valid)
    return SweepResult("fig3", FIG3_COLUMNS, out, meta)


def run_fig4(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Uncertainty function of the residual field after the first pair."""
    rows, _, params_by_r, _ = _curve_rows(config, jobs, want_delta=True)
    meta = _base_metadata(config, params_by_r)
    meta.update(_peak_metadata(config, rows, CURVE_COLUMNS))
    i_r, i_d = CURVE_COLUMNS.index("r"), CURVE_COLUMNS.index("delta_ns")
    meta["negative_fraction"] = {}
    for r in config.r_values:
        d = [row[i_d] for row in rows if row[i_r] == r and row[i_d] is not None]
        meta["negative_fraction"][repr(r)] = sum(x < 0 for x in d) / len(d)
    return SweepResult("fig4", CURVE_COLUMNS, rows, meta)


def run_fig5(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Second-pair negativity maximized over tau2, per first-pair time tau1.

    With ``kappa_tbar`` set the field is damped between the pairs and the
    damped optimum fills the ``*_decay`` columns.
    """
    if config.tau2_grid is None:
        raise ConfigError("the second pair needs a tau2 grid", "tau2_grid")
    kappas = (0.0,) if config.kappa_tbar is None else (0.0, config.kappa_tbar)
    rows, extra, params_by_r, _ = _curve_rows(config, jobs, want_delta=True, tau2=True, kappas=kappas)
    out = []
    for row, ex in zip(rows, extra):
        t, e = ex[0] if ex else (None, None)
        row = list(row)
        row[CURVE_COLUMNS.index("kappa_tbar")] = config.kappa_tbar
        out.append(row + [e, t])
    meta = _base_metadata(config, params_by_r)
    # reference: best first-pair negativity over the same tau2 grid
    tau2 = [float(t) for t in grid_values(config.tau2_grid)]
    meta["first_pair_max"] = {}
    for r, p in params_by_r.items():
        eps, _ = _closed_form_curve(p, tau2)
        t, e = grid_argmax(tau2, eps)
        meta["first_pair_max"][repr(r)] = {"tau": t, "eps_npt": e}
    return SweepResult("fig5", FIG5_COLUMNS, out, meta)


def run_sweep(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Generic grid over r and tau1 with every optional stage the config switches on."""
    dense_ok = all(_params(config, r).n_max <= DENSE_N_MAX for r in config.r_values)
    want_delta = dense_ok
    tau2 = config.tau2_grid is not None
    kappas = (config.kappa_tbar or 0.0,)
    rows, _, params_by_r, _ = _curve_rows(config, jobs, want_delta=want_delta, tau2=tau2, kappas=kappas)
    meta = _base_metadata(config, params_by_r)
    meta.update(_peak_metadata(config, rows, CURVE_COLUMNS))
    meta["route"] = "field" if (want_delta or tau2 or config.delta_tau) else "closed_form"
    return SweepResult("sweep", CURVE_COLUMNS, rows, meta)


def _prepare_point(task):
    key, with_delta, with_oracle = task
    r, theta, n_max, tol = key
    params = SqueezeParams(r, theta, n_max, tol)
    P, _ = series_tables(r, theta, n_max)
    n = np.arange(n_max + 1)
    tr = P.sum()
    na, nb = (P.sum(axis=1) @ n) / tr, (P.sum(axis=0) @ n) / tr
    cov = (n @ P @ n) / tr - na * nb
    delta = diff = None
    if with_delta:
        rho = _cavity(*key)
        delta = simon_delta(covariance_matrix(rho), partial_transposed=True)
        if with_oracle:
            diff = float(np.max(np.abs(prepare_cavity_state_oracle(params).matrix - rho.matrix)))
    return [r, params.sin2_theta, n_max, params.weight, float(na), float(nb), float(cov), delta, diff]


def run_prepare(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Photon statistics of the prepared cavity state; both preparation routes are compared when small."""
    params_by_r = {r: _params(config, r) for r in config.r_values}
    tasks = [(_key(p), p.n_max <= DENSE_N_MAX, p.n_max <= ORACLE_N_MAX) for p in params_by_r.values()]
    rows = _pool_map(_prepare_point, tasks, jobs)
    return SweepResult("prepare", PREPARE_COLUMNS, rows, _base_metadata(config, params_by_r))


def run_boundary(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Both frontier families sampled on the ``p`` grid."""
    p_grid = grid_values(config.p_grid)
    pts = boundary_curve(p_grid)
    rows = [[b.family, b.p, b.s_l, b.eps, float(boundary_negativity(b.s_l))] for b in pts]
    mems = [row for row in rows if row[0] == "mems"]
    meta = {"config": _resolved(config), "max_family_gap": max(abs(row[3] - row[4]) for row in mems)}
    return SweepResult("boundary", BOUNDARY_COLUMNS, rows, meta)


def _scan_quantities(r, theta, n_max, taus):
    # truncation check disabled: the scan itself measures the cutoff error
    A, B, C, D, F = closed_form_elements(r, theta, taus, n_max, tol_trunc=1.0)
    eps, s_l = [], []
    for a, b, c, d, f in zip(A, B, C, D, F):
        pair = QubitPairMatrix.from_elements(a, b, c, d, f)
        eps.append(negativity(pair))
        s_l.append(linear_entropy(pair))
    return np.concatenate([A, B, C, np.abs(D), eps, s_l])


def _convergence_scan(task):
    """Scan steps ``(n_max, weight, change)`` for one r; the last one met the tolerance, or none did."""
    r, theta, taus, tol, cap = task
    steps = []
    n = CONVERGENCE_START
    prev = _scan_quantities(r, theta, n, taus)
    while n + CONVERGENCE_STEP <= cap:
        nxt = _scan_quantities(r, theta, n + CONVERGENCE_STEP, taus)
        change = float(np.max(np.abs(nxt - prev)))
        steps.append((n, truncation_weight(r, n), change))
        if change < tol:
            return steps, True
        n, prev = n + CONVERGENCE_STEP, nxt
    return steps, False


def run_convergence(config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Raise ``n_max`` in steps of 5 until first-pair results move by less than the tolerance.

    Compares ``A, B, C, |D|``, negativity and linear entropy over the tau1
    grid at ``n_max`` and ``n_max + 5``; the smaller cutoff is selected.
    Raises :class:`ConvergenceError` if ``n_max_cap`` is reached first.
    """
    taus = grid_values(config.tau1_grid)
    theta = math.asin(math.sqrt(config.sin2_theta))
    tol = config.tol("convergence")
    tasks = [(r, theta, taus, tol, config.n_max_cap) for r in config.r_values]
    scans = _pool_map(_convergence_scan, tasks, jobs)
    rows, chosen = [], {}
    for r, (steps, ok) in zip(config.r_values, scans):
        if not ok:
            last = steps[-1][2] if steps else float("nan")
            raise ConvergenceError(
                f"r={r}: no convergence below {tol:g} by n_max cap {config.n_max_cap} "
                f"(last change {last:.3e})"
            )
        for i, (n, w, change) in enumerate(steps):
            rows.append([r, n, w, change, int(i == len(steps) - 1)])
        chosen[repr(r)] = steps[-1][0]
    meta = {"config": _resolved(config), "selected_n_max": chosen, "tolerances": dict(config.tolerances)}
    return SweepResult("convergence", CONVERGENCE_COLUMNS, rows, meta)


RUNNERS = {
    "prepare": run_prepare,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "sweep": run_sweep,
    "boundary": run_boundary,
    "convergence": run_convergence,
}


def run_experiment(config: SweepConfig, jobs: int = 1) -> SweepResult:
    return RUNNERS[config.experiment](config, jobs)
