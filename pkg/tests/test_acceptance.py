"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v`` (a summary block lists PASS/FAIL
per criterion) or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

import oracles
from rbfqlsa.assembly import (
    assemble_collocation,
    assemble_evaluation,
    assemble_rhs,
    normalize_for_encoding,
    preconditioner,
)
from rbfqlsa.geometry import Domain, PointSet, generate_halton, make_point_set, separation_distance
from rbfqlsa.harness.complexity import complexity_exponents
from rbfqlsa.harness.config import StudyConfig
from rbfqlsa.harness.studies import run_conditioning_study, run_convergence_study
from rbfqlsa.kernel import make_wendland, radial_bilaplacian, radial_laplacian
from rbfqlsa.quantum.adiabatic import schedule_f
from rbfqlsa.quantum.encoding import (
    block_encode_H0,
    block_encode_H1,
    block_encode_projector,
    block_encode_sparse,
    build_H0,
    build_H1,
)
from rbfqlsa.quantum.filtering import FilterSpec, eval_filter
from rbfqlsa.quantum.pipeline import (
    padded_dilation,
    prepare_solution_state,
    qlsa_solve,
    solution_probability_bound,
)
from rbfqlsa.quantum.state import fidelity, next_power_of_two, normalize, pad_system
from rbfqlsa.solver import manufactured_solution

try:
    from conftest import ACCEPTANCE_RESULTS
except ImportError:  # run as a script
    ACCEPTANCE_RESULTS = {}


def record(num, ok, detail):
    ACCEPTANCE_RESULTS[num] = (bool(ok), detail)
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return bool(ok), detail


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def poisson_system(d, n_interior, delta, k=2):
    pts = make_point_set(Domain(d), n_interior)
    K = make_wendland(d, k)
    u, f, g = manufactured_solution(d)
    system = assemble_collocation(K, pts, delta)
    b = assemble_rhs(f, g, pts, delta)
    return pts, K, system.with_rhs(b), assemble_evaluation(K, pts, delta)


def single_block_system(d, count, delta, role):
    """Halton points that all carry the same functional (``"B"``: identity, ``"I"``: Laplacian)."""
    X = generate_halton(count, Domain(d))
    empty = np.empty((0, d))
    q = separation_distance(X)
    pts = PointSet(empty, X, 0.0, q, {}) if role == "B" else PointSet(X, empty, 0.0, q, {})
    K = make_wendland(d, 2)
    u, f, _ = manufactured_solution(d)
    system = assemble_collocation(K, pts, delta)
    b = assemble_rhs(f, u, pts, delta)
    return system.with_rhs(b)


# ---------------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(2024)
    worst_lap = worst_bilap = 0.0
    with Timer() as t:
        for d in (1, 2, 3):
            for k in (2, 3):
                K = make_wendland(d, k)
                field = oracles.radial_field(d, k)
                for r in rng.uniform(0.0, 1.0, 100):
                    x = oracles.point_at_radius(r, d, rng)
                    lap_ref = float(oracles.fd_laplacian(field, x, mp.mpf("1e-12")))
                    bil_ref = float(oracles.fd_bilaplacian(field, x, mp.mpf("1e-8")))
                    worst_lap = max(worst_lap, abs(radial_laplacian(K, r) - lap_ref) / abs(lap_ref))
                    worst_bilap = max(worst_bilap, abs(radial_bilaplacian(K, r) - bil_ref) / abs(bil_ref))
    ok = worst_lap < 1e-5 and worst_bilap < 1e-3 and t.elapsed < 10
    return record(
        1, ok, f"max rel err lap {worst_lap:.2e} (<1e-5), bilap {worst_bilap:.2e} (<1e-3), {t.elapsed:.1f}s (<10s)"
    )


def criterion_2():
    cases = [(1, 190, 0.1, 2), (1, 60, 0.5, 3), (2, 150, 0.3, 2), (2, 90, 0.5, 3), (3, 40, 0.7, 2)]
    worst_entry = worst_pap = 0.0
    pattern_ok = True
    sizes = []
    with Timer() as t:
        for d, n, delta, k in cases:
            pts = make_point_set(Domain(d), n)
            system = assemble_collocation(make_wendland(d, k), pts, delta)
            ref = oracles.brute_force_collocation(pts.points, pts.n_interior, delta, d, k)
            got = system.A_raw.toarray()
            nz = ref != 0
            pattern_ok &= bool(np.array_equal(got != 0, nz))
            worst_entry = max(worst_entry, float(np.max(np.abs(got[nz] - ref[nz]) / np.abs(ref[nz]))))
            P = preconditioner(pts.n, pts.n_interior, delta)
            pap = abs(system.A - P @ system.A_raw @ P).max() / abs(system.A).max()
            worst_pap = max(worst_pap, float(pap))
            sizes.append(pts.n)
    ok = pattern_ok and worst_entry < 1e-4 and worst_pap < 1e-12 and max(sizes) <= 200
    return record(
        2,
        ok,
        f"N in {sizes}, sparsity pattern {'equal' if pattern_ok else 'DIFFERS'}, "
        f"max entry rel err {worst_entry:.2e} (<1e-4), |A - P A_raw P| rel {worst_pap:.1e} (<1e-12), {t.elapsed:.1f}s",
    )


def criterion_3():
    slopes = {}
    with Timer() as t:
        for d in (1, 2):
            cfg = StudyConfig(d=d, k=2, delta=0.9, h_ladder=[0.2, 0.1, 0.05, 0.025], name=f"acc{d}")
            rep = run_convergence_study(cfg)
            assert len(rep.ok_rows) == 4, [r.get("error") for r in rep.rows]
            slopes[d] = rep.fits["slope"]
    ok = slopes[1] >= 1.25 and slopes[2] >= 1.25 and t.elapsed < 120
    return record(3, ok, f"slope d=1 {slopes[1]:.3f}, d=2 {slopes[2]:.3f} (>=1.25), {t.elapsed:.1f}s (<120s)")


def criterion_4():
    ladders = {1: [8, 16, 32, 64, 128], 2: [32, 64, 128, 256, 512]}
    parts, ok = [], True
    with Timer() as t:
        for d, ladder in ladders.items():
            cfg = StudyConfig(d=d, k=2, delta=0.5, n_ladder=ladder, name=f"acc{d}")
            rep = run_conditioning_study(cfg)
            fits = rep.fits
            k_sp, m_sp, s_ok = fits["kappa_ratio_spread"], fits["condM_ratio_spread"], fits["s_ok_all"]
            ok &= len(rep.ok_rows) >= 4 and k_sp < 10 and m_sp < 10 and s_ok
            r = rep.column("delta_over_q")
            parts.append(
                f"d={d}: delta/q {r.min():.1f}..{r.max():.1f}, kappa-ratio spread {k_sp:.3g}, "
                f"cond(M)-ratio spread {m_sp:.3g} (<10), s<=2(1+delta/q)^d {s_ok}"
            )
    ok = ok and t.elapsed < 120
    return record(4, ok, "; ".join(parts) + f", {t.elapsed:.1f}s")


def criterion_5():
    rng = np.random.default_rng(5)
    worst_block = worst_unit = 0.0
    with Timer() as t:
        for n in (4, 8, 16):
            M = oracles.random_sparse_symmetric(n, 0.3, rng)
            M = M + (np.abs(M).sum(axis=1).max()) * np.eye(n)  # diagonally dominant SPD
            A_hat = M / np.linalg.eigvalsh(M)[-1]
            b = normalize(rng.normal(size=n)).real
            s = next_power_of_two(int((A_hat != 0).sum(axis=1).max()))
            U_A = block_encode_sparse(A_hat, s)
            P = block_encode_projector(b)
            H0 = block_encode_H0(b)
            H1 = block_encode_H1(U_A, b)
            D, D2 = n, 2 * n
            checks = [
                (U_A.U[:D, :D], A_hat / s),
                (P.U[:D, :D], np.eye(n) - np.outer(b, b)),
                (H0.U[:D2, :D2], build_H0(b)),
                (H1.U[:D2, :D2], build_H1(A_hat, b) / s),
            ]
            worst_block = max([worst_block] + [float(np.abs(x - y).max()) for x, y in checks])
            worst_unit = max([worst_unit] + [e.unitarity_error() for e in (U_A, P, H0, H1)])
    ok = worst_block < 1e-12 and worst_unit < 1e-10 and t.elapsed < 30
    return record(
        5, ok, f"max block err {worst_block:.1e} (<1e-12), unitarity err {worst_unit:.1e} (<1e-10), {t.elapsed:.1f}s"
    )


def criterion_6():
    worst_ratio = 0.0
    zero_exact = True
    bounded = True
    with Timer() as t:
        x_all = np.linspace(-1.0, 1.0, 20001)
        for gap in (0.05, 0.1, 0.2):
            xs = x_all[np.abs(x_all) >= gap]
            for ell in range(10, 81):
                spec = FilterSpec.from_degree(ell, gap)
                zero_exact &= eval_filter(0.0, spec) == 1.0
                vals = np.abs(eval_filter(xs, spec))
                worst_ratio = max(worst_ratio, float(vals.max()) / (2 * math.exp(-math.sqrt(2) * ell * gap)))
                bounded &= bool(np.abs(eval_filter(x_all, spec)).max() <= 1.0)
    ok = zero_exact and worst_ratio <= 1.0 and bounded and t.elapsed < 10
    return record(
        6,
        ok,
        f"R(0)=1 exactly {zero_exact}, max |R|/bound on gap set {worst_ratio:.3f} (<=1), "
        f"|R|<=1 on [-1,1] {bounded}, {t.elapsed:.1f}s (<10s)",
    )


def _qlsa_check(system):
    A_hat, _ = normalize_for_encoding(system)
    kappa = float(np.linalg.cond(A_hat.toarray()))
    res = qlsa_solve(A_hat, normalize(system.b).real, eps_L=1e-4)
    ref = oracles.dense_solution_state(system.A.toarray(), system.b)
    return kappa, fidelity(res.c_state, ref), res.success_probability, res


def criterion_7():
    rows = []
    with Timer() as t:
        # boundary-only and interior-only systems: the only N <= 16 collocation systems with kappa <= 50
        for d, delta, role in [(1, 0.2, "B"), (1, 0.5, "I"), (2, 0.5, "B"), (2, 0.5, "I")]:
            system = single_block_system(d, 16, delta, role)
            rows.append((f"{d}D-{role}", system.n) + _qlsa_check(system)[:3])
        # mixed Poisson systems (kappa far above 50)
        for d, n, delta in [(1, 6, 0.5), (1, 14, 0.3), (2, 4, 0.6)]:
            _, _, system, _ = poisson_system(d, n, delta)
            rows.append((f"{d}D-Poisson", system.n) + _qlsa_check(system)[:3])
    small = [r for r in rows if r[2] <= 50]
    ok_small = all(r[3] >= 1 - 2e-4 and r[4] >= 0.1 for r in small) and len(small) >= 1
    ok_all = all(r[3] >= 1 - 2e-4 and r[4] >= 0.1 for r in rows)
    ok = ok_small and ok_all and t.elapsed < 300
    summary = ", ".join(f"{name} N={n} kappa={k:.3g} 1-F={1 - F:.1e} p={p:.3f}" for name, n, k, F, p in rows)
    return record(7, ok, f"{summary}, {t.elapsed:.1f}s (<300s)")


def criterion_8():
    rows = []
    with Timer() as t:
        for d, n, delta in [(1, 6, 0.5), (1, 14, 0.3)]:
            pts, K, system, ev = poisson_system(d, n, delta)
            A_hat, _ = normalize_for_encoding(system)
            res = qlsa_solve(A_hat, normalize(system.b).real, eps_L=1e-4)
            prep = prepare_solution_state(padded_dilation(ev.M_hat), None, res.c_state)
            u_tilde = normalize(prep.u_state[: pts.n])
            c = np.linalg.solve(system.A.toarray(), system.b)
            u_bar = normalize(ev.M @ c)
            C = ev.scale * delta**d
            bound = solution_probability_bound(pts.q, delta, K.tau, d, C, prep.sparsity)
            rows.append((pts.n, fidelity(u_tilde, u_bar), prep.success_probability, bound))
    ok = all(F >= 1 - 1e-3 and p >= 0.5 * lb for _, F, p, lb in rows) and t.elapsed < 60
    summary = ", ".join(f"N={n} 1-F={1 - F:.1e} p={p:.3e} >= 0.5*bound={0.5 * lb:.3e}" for n, F, p, lb in rows)
    return record(8, ok, f"{summary}, {t.elapsed:.1f}s (<60s)")


def criterion_9():
    rng = random.Random(9)
    with Timer() as t:
        rows_ok = True
        for d in range(1, 30):
            for tau in (Fraction(3), Fraction(7, 2), Fraction(d, 2) + 3, Fraction(11, 3)):
                m3 = complexity_exponents(d, tau, 3)
                rows_ok &= m3.classical_exponent == 3 + 3 * d / tau + d
                rows_ok &= m3.quantum_exponent == 12 + 3 * d / tau
                rows_ok &= m3.q_advantage == (d > 9)
                m4 = complexity_exponents(d, tau, 4)
                rows_ok &= m4.classical_exponent == 2 + 2 * d / tau + Fraction(d, 2)
                rows_ok &= m4.quantum_exponent == 8 + 2 * d / tau
                rows_ok &= m4.q_advantage == (d > 12)
        agree = 0
        for _ in range(1000):
            d = rng.randint(1, 200)
            tau = Fraction(rng.randint(1, 400), rng.randint(1, 20))
            beta = 2 + Fraction(rng.randint(1, 400), rng.randint(1, 20))
            m = complexity_exponents(d, tau, beta)
            agree += m.q_advantage == (m.classical_exponent > m.quantum_exponent)
    ok = rows_ok and agree == 1000 and t.elapsed < 1
    return record(9, ok, f"table rows exact {rows_ok}, predicate agrees {agree}/1000, {t.elapsed:.2f}s (<1s)")


def criterion_10():
    with Timer() as t:
        v = np.linspace(0.0, 1.0, 1000)
        end_err = 0.0
        monotone = True
        ode_err = 0.0
        for kappa in (2.0, 10.0, 100.0):
            for p in (1.1, 1.5, 1.9):
                f = schedule_f(v, kappa, p)
                end_err = max(end_err, abs(f[0]), abs(f[-1] - 1.0))
                monotone &= bool(np.all(np.diff(f) > 0))
                ref = oracles.schedule_ode(v, kappa, p)
                ode_err = max(ode_err, float(np.abs(f - ref).max()))
    ok = end_err <= 1e-12 and monotone and ode_err <= 1e-6 and t.elapsed < 5
    return record(
        10,
        ok,
        f"endpoint err {end_err:.1e} (<=1e-12), monotone {monotone}, ODE max err {ode_err:.1e} (<=1e-6), "
        f"{t.elapsed:.2f}s (<5s)",
    )


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(criterion):
    ok, detail = criterion()
    assert ok, detail


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
