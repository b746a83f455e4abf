"""Convergence, conditioning and quantum-versus-classical studies.

Every study returns a :class:`StudyReport` whose rows carry the measured
quantities next to the theoretical bounds and their ratio, so that
"measured <= C * bound" claims can be audited without fixing ``C``.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from ..assembly import (
    assemble_collocation,
    assemble_evaluation,
    assemble_rhs,
    normalize_for_encoding,
)
from ..geometry import Domain, make_point_set, point_set_for_fill_distance
from ..kernel import make_wendland
from ..quantum.pipeline import (
    padded_dilation,
    prepare_solution_state,
    qlsa_solve,
    solution_probability_bound,
)
from ..quantum.state import fidelity, normalize, state_distance
from ..solver import (
    condition_number,
    conjugate_gradient,
    l2_relative_error,
    manufactured_solution,
    solve_system,
)
from .config import StudyConfig
from .io import write_json

__all__ = [
    "StudyReport",
    "fit_slope",
    "spread",
    "run_convergence_study",
    "run_conditioning_study",
    "run_qlsa_comparison",
]

KAPPA_LIMIT = 2500


@dataclass
class StudyReport:
    name: str
    study: str
    config: dict
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)

    @property
    def ok_rows(self):
        return [r for r in self.rows if not r.get("failed")]

    def column(self, key):
        return np.array([r[key] for r in self.ok_rows], dtype=float)

    def columns(self):
        cols = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_csv(self, path):
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, restval="")
            w.writeheader()
            for row in self.rows:
                w.writerow({k: _cell(v) for k, v in row.items()})

    def to_dict(self):
        return {
            "name": self.name,
            "study": self.study,
            "config": self.config,
            "fits": self.fits,
            "rows": self.rows,
        }

    def write(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = f"{self.name}_{self.study}"
        self.to_csv(out_dir / f"{stem}.csv")
        write_json(out_dir / f"{stem}.json", self.to_dict())
        return out_dir / f"{stem}.csv", out_dir / f"{stem}.json"


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return str(v)
    return v


def fit_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 2:
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def spread(values):
    """``max / min`` of positive values."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return None
    return float(values.max() / values.min())


def _linear_r2(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 2:
        return None
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    tot = np.sum((y - y.mean()) ** 2)
    return float(1.0 - resid @ resid / tot) if tot > 0 else 1.0


def _levels(cfg: StudyConfig):
    if cfg.n_ladder:
        return [("n", int(n)) for n in cfg.n_ladder]
    return [("h", float(h)) for h in cfg.h_ladder]


def _points_for(cfg: StudyConfig, level):
    kind, value = level
    domain = Domain(cfg.d)
    if kind == "n":
        return make_point_set(domain, value, seed_skip=cfg.seed_skip)
    if cfg.level_rule == "power":
        return make_point_set(domain, int(math.ceil((1.0 / value) ** cfg.d)), seed_skip=cfg.seed_skip)
    return point_set_for_fill_distance(domain, value, seed_skip=cfg.seed_skip)


def _base_row(idx, level, pts, delta, system=None):
    row = {
        "level": idx,
        "target": level[1],
        "N": pts.n,
        "n_interior": pts.n_interior,
        "h": pts.h,
        "q": pts.q,
        "c_qu": pts.c_qu,
        "delta": delta,
    }
    if system is not None:
        row["s"] = system.sparsity
    return row


def _quantum_columns(system, evaluation, b, pts, kernel, cfg, c_classical):
    """Run the simulated pipeline on one system and return the extra row entries."""
    A_hat, eta = normalize_for_encoding(system)
    b_state = normalize(b).real
    M = evaluation.M.toarray()
    sv = sla.svdvals(M)
    cond_M = float(sv[0] / sv[-1])
    eps_L = cfg.eps_L if cfg.eps_L is not None else min(0.49, cfg.eps / cond_M)
    res = qlsa_solve(A_hat, b_state, eps_L=eps_L, p=cfg.p, c_T=cfg.c_T)
    dil = padded_dilation(evaluation.M_hat)
    peak = evaluation.scale * evaluation.delta ** kernel.d
    prep = prepare_solution_state(dil, None, res.c_state)
    n = pts.n
    u_tilde = normalize(prep.u_state[:n])
    u_bar = normalize(M @ c_classical)
    u_true = normalize(manufactured_solution(kernel.d)[0](pts.points))
    lb = solution_probability_bound(pts.q, evaluation.delta, kernel.tau, kernel.d, peak, prep.sparsity)
    rbf_term = state_distance(u_true, u_bar)
    q_term = state_distance(u_bar, u_tilde)
    total = state_distance(u_true, u_tilde)
    budget = rbf_term + 2.0 * cond_M * eps_L + (res.eps_int if np.isfinite(res.eps_int) else 0.0)
    return {
        "cond_M": cond_M,
        "eps_L": eps_L,
        "c_fidelity": res.fidelity,
        "c_distance": res.distance,
        "qlsa_probability": res.success_probability,
        "mu0_abs": abs(res.mu0),
        "mu1_abs": abs(res.mu1),
        "eps_int": res.eps_int,
        "filter_degree_ell": res.resources["filter_degree_ell"],
        "evolution_time": res.resources["evolution_time"],
        "repetitions": res.resources["amplification_repetitions"],
        "q_sparsity": res.resources["sparsity"],
        "q_kappa": res.resources["kappa"],
        "prep_probability": prep.success_probability,
        "prep_bound": lb,
        "prep_sparsity": prep.sparsity,
        "u_fidelity": fidelity(u_tilde, u_bar),
        "err_rbf": rbf_term,
        "err_quantum": q_term,
        "err_total": total,
        "triangle_ok": bool(total <= rbf_term + q_term + 1e-10),
        "err_budget": budget,
        "budget_ok": bool(total <= budget),
    }


def run_convergence_study(cfg: StudyConfig, method="direct") -> StudyReport:
    """L2 error of the collocation solution against ``prod sin(pi x_j)`` over a ladder."""
    kernel = make_wendland(cfg.d, cfg.k)
    u, f, g = manufactured_solution(cfg.d)
    report = StudyReport(cfg.name, "convergence", cfg.to_dict())
    quantum = cfg.solver in ("quantum-sim", "both")
    for idx, level in enumerate(_levels(cfg)):
        row = {"level": idx, "target": level[1]}
        try:
            pts = _points_for(cfg, level)
            delta = cfg.delta_for(pts.h)
            system = assemble_collocation(kernel, pts, delta)
            b = assemble_rhs(f, g, pts, delta)
            ev = assemble_evaluation(kernel, pts, delta)
            res = solve_system(
                system.with_rhs(b), ev, method=method, tol=cfg.tol, compute_kappa=pts.n <= KAPPA_LIMIT
            )
            row = _base_row(idx, level, pts, delta, system)
            row.update(
                {
                    "kappa": res.kappa,
                    "iterations": res.iterations,
                    "residual": res.residual,
                    "l2_error": l2_relative_error(res.u_bar_at_points, u(pts.points)),
                    "runtime_ns": res.runtime_ns,
                }
            )
            if quantum and pts.n <= cfg.quantum_max_n:
                row.update(_quantum_columns(system, ev, b, pts, kernel, cfg, res.c))
        except Exception as exc:  # recorded per row, study continues
            row.update({"failed": True, "error": f"{type(exc).__name__}: {exc}"})
        report.rows.append(row)
    ok = report.ok_rows
    if len(ok) >= 2:
        report.fits["slope"] = fit_slope(report.column("h"), report.column("l2_error"))
        report.fits["expected_order"] = cfg.tau - 2 if cfg.beta is None else cfg.beta - 2
    return report


def _conditioning_row(kernel, pts, delta):
    d, tau = kernel.d, kernel.tau
    system = assemble_collocation(kernel, pts, delta)
    ev = assemble_evaluation(kernel, pts, delta)
    kappa = condition_number(system.A)
    kappa_raw = float(np.linalg.cond(system.A_raw.toarray()))
    sv = sla.svdvals(ev.M.toarray())
    sig_min = float(sv[-1])
    cond_M = float(sv[0] / sv[-1])
    r = delta / pts.q
    q = pts.q
    kappa_bound = (1 + r) ** d * r ** (2 * tau - d)
    s_bound = (1 + r) ** d
    sigma_bound = q ** (-d) * (q / delta) ** (2 * tau)
    condM_bound = system.sparsity * r ** (2 * tau - d)
    return system, {
        "delta_over_q": r,
        "kappa": kappa,
        "kappa_raw": kappa_raw,
        "kappa_bound": kappa_bound,
        "kappa_ratio": kappa / kappa_bound,
        "s_bound": s_bound,
        "s_ratio": system.sparsity / s_bound,
        "s_ok": bool(system.sparsity <= 2 * s_bound),
        "sigma_min_M": sig_min,
        "sigma_bound": sigma_bound,
        "sigma_ratio": sig_min / sigma_bound,
        "cond_M": cond_M,
        "condM_bound": condM_bound,
        "condM_ratio": cond_M / condM_bound,
    }


def run_conditioning_study(cfg: StudyConfig) -> StudyReport:
    """Condition numbers, sparsity and ``M`` bounds over a ``delta / q`` ladder.

    With ``delta_ladder`` the points are fixed (``n_ladder[0]`` interior points,
    or the first ``h_ladder`` level) and ``delta`` varies; otherwise ``delta``
    is fixed and the points are refined along the ladder.
    """
    kernel = make_wendland(cfg.d, cfg.k)
    report = StudyReport(cfg.name, "conditioning", cfg.to_dict())
    if cfg.delta_ladder:
        base = _levels(cfg)[0]
        pts = _points_for(cfg, base)
        plan = [(base, pts, float(delta)) for delta in cfg.delta_ladder]
    else:
        plan = []
        for level in _levels(cfg):
            pts = _points_for(cfg, level)
            plan.append((level, pts, cfg.delta_for(pts.h)))
    for idx, (level, pts, delta) in enumerate(plan):
        row = {"level": idx, "target": level[1]}
        try:
            t0 = time.perf_counter_ns()
            system, extra = _conditioning_row(kernel, pts, delta)
            row = _base_row(idx, level, pts, delta, system)
            row.update(extra)
            row["runtime_ns"] = time.perf_counter_ns() - t0
        except Exception as exc:
            row.update({"failed": True, "error": f"{type(exc).__name__}: {exc}"})
        report.rows.append(row)
    if report.ok_rows:
        for key in ("kappa_ratio", "condM_ratio", "sigma_ratio"):
            vals = report.column(key)
            report.fits[f"{key}_spread"] = spread(vals)
            report.fits[f"{key}_max"] = float(vals.max())
            report.fits[f"{key}_min"] = float(vals.min())
        # fitted constants: smallest C with measured <= C * bound on the ladder
        report.fits["C_kappa"] = float(report.column("kappa_ratio").max())
        report.fits["C_condM"] = float(report.column("condM_ratio").max())
        report.fits["C_sigma"] = float(report.column("sigma_ratio").min())
        report.fits["s_ok_all"] = all(r["s_ok"] for r in report.ok_rows)
        report.fits["kappa_slope"] = fit_slope(report.column("delta_over_q"), report.column("kappa"))
        report.fits["kappa_bound_slope"] = fit_slope(
            report.column("delta_over_q"), report.column("kappa_bound")
        )
    return report


def run_qlsa_comparison(cfg: StudyConfig) -> StudyReport:
    """Classical CG against the simulated pipeline on identical systems."""
    kernel = make_wendland(cfg.d, cfg.k)
    u, f, g = manufactured_solution(cfg.d)
    report = StudyReport(cfg.name, "qlsa", cfg.to_dict())
    for idx, level in enumerate(_levels(cfg)):
        row = {"level": idx, "target": level[1]}
        try:
            pts = _points_for(cfg, level)
            if pts.n > max(cfg.quantum_max_n, 64):
                raise ValueError(f"N = {pts.n} too large for the full simulated pipeline")
            delta = cfg.delta_for(pts.h)
            system = assemble_collocation(kernel, pts, delta)
            b = assemble_rhs(f, g, pts, delta)
            ev = assemble_evaluation(kernel, pts, delta)
            t0 = time.perf_counter_ns()
            c, iters, resid = conjugate_gradient(system.A, b, tol=cfg.tol)
            cg_ns = time.perf_counter_ns() - t0
            row = _base_row(idx, level, pts, delta, system)
            row.update(
                {
                    "kappa": condition_number(system.A),
                    "cg_iterations": iters,
                    "cg_residual": resid,
                    "cg_runtime_ns": cg_ns,
                    "l2_error": l2_relative_error(ev.M @ c, u(pts.points)),
                }
            )
            row.update(_quantum_columns(system, ev, b, pts, kernel, cfg, c))
        except Exception as exc:
            row.update({"failed": True, "error": f"{type(exc).__name__}: {exc}"})
        report.rows.append(row)
    ok = report.ok_rows
    if ok:
        report.fits["min_u_fidelity"] = float(report.column("u_fidelity").min())
        report.fits["budget_ok_all"] = all(r["budget_ok"] for r in ok)
        report.fits["triangle_ok_all"] = all(r["triangle_ok"] for r in ok)
    if len(ok) >= 2:
        work = report.column("q_sparsity") * report.column("q_kappa") * np.log(1.0 / report.column("eps_L"))
        report.fits["ell_vs_work_r2"] = _linear_r2(work, report.column("filter_degree_ell"))
    return report
