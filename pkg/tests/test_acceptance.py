"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Long-running criteria carry the ``slow`` marker; ``pytest -m "not slow"``
skips them. Tolerances and grids are the pinned acceptance values.
"""

import math
import time

import numpy as np
import pytest

from edgechaos import seeding
from edgechaos.complexity import c_closed_form, c_quadrature, kac_rice_mc
from edgechaos.equilibria import find_equilibria, grid_oracle, mean_count
from edgechaos.fakir import (
    REFERENCE_SLOPE, initial_state, integrate_particle, fakir_lyapunov, sample_landscape,
    slope_experiment,
)
from edgechaos.lyapunov import benettin, critical_exponent, lyapunov_curve, max_lyapunov_benettin
from edgechaos.netmodel import TANH, jacobian_at, vector_field
from edgechaos.randmat import eigenvalues, sample_matrix
from edgechaos.stats import fit_power_law

EDGE_SIGMAS = [1.05, 1.1, 1.15, 1.2, 1.25, 1.3]
EDGE_PARAMS = {"dt": 0.1, "transient": 100.0, "t_total": 800.0}
EXPONENT, EXPONENT_TOL = 2.0, 0.3


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail, elapsed=None, budget=None):
        ok = bool(ok) and (budget is None or elapsed < budget)
        timing = "" if elapsed is None else f" [{elapsed:.1f}s / {budget:.0f}s]"
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}{timing}")
        return ok
    return emit


def test_criterion_1_closed_form_complexity(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for sigma in (1.2, 1.5, 2.0, 3.0):
        q = c_quadrature(sigma, n_points=1_000_000, seed=0)
        c = c_closed_form(sigma)
        z = abs(c - q.value) / q.stderr
        ok &= z <= 3.0
        parts.append(f"sigma={sigma} c={c:.6f} quad={q.value:.6f} z={z:.2f}")
    c2 = c_closed_form(2.0)
    ok &= abs(c2 - 0.318147) < 5e-7 and c2 == math.log(2) - 0.375
    assert report("criterion 1 closed-form complexity", ok, "; ".join(parts),
                  time.perf_counter() - t0, 60)


@pytest.mark.slow
def test_criterion_2_logdet_concentration(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for sigma in (0.5, 1.5, 2.0):
        est = kac_rice_mc(500, sigma, n_matrices=50, seed=0)
        target = c_closed_form(sigma)
        ok &= abs(est.value - target) <= 0.02
        parts.append(f"sigma={sigma} mean={est.value:.5f} target={target:.5f}")
    assert report("criterion 2 log-det concentration", ok, "; ".join(parts),
                  time.perf_counter() - t0, 600)


def test_criterion_3_uniqueness_below_criticality(report):
    t0 = time.perf_counter()
    est = mean_count(0.5, 8, n_matrices=50, n_starts=200, seed=0)
    ok = all(c == 1 for c in est.counts)
    assert report("criterion 3 uniqueness below criticality", ok,
                  f"counts={sorted(set(est.counts))} over {len(est.counts)} matrices",
                  time.perf_counter() - t0, 60)


def test_criterion_4_small_n_oracle(report):
    t0 = time.perf_counter()
    agree, odd = 0, True
    sigmas = (0.5, 2.0, 3.0)
    for i in range(100):
        n = 1 + i % 2
        sigma = sigmas[(i // 2) % 3]
        J = sample_matrix(n, sigma, seeding.derive_seed(0, i))
        found = len(find_equilibria(J, n_starts=200, seed=i))
        oracle = grid_oracle(J)
        agree += found == oracle
        odd &= found % 2 == 1 and oracle % 2 == 1
    ok = agree >= 95 and odd
    assert report("criterion 4 small-n oracle equivalence", ok,
                  f"agreement {agree}/100, all counts odd={odd}", time.perf_counter() - t0, 300)


@pytest.mark.slow
def test_criterion_5_count_growth(report):
    t0 = time.perf_counter()
    means = [mean_count(2.0, n, n_matrices=50, n_starts=200, seed=0).mean for n in (2, 4, 6, 8)]
    ok = all(b > a for a, b in zip(means, means[1:]))
    assert report("criterion 5 count growth at sigma=2", ok,
                  "means n=2,4,6,8: " + ", ".join(f"{m:.2f}" for m in means),
                  time.perf_counter() - t0, 900)


@pytest.fixture(scope="module")
def edge_run():
    t0 = time.perf_counter()
    curve = lyapunov_curve(EDGE_SIGMAS, 1000, 10, EDGE_PARAMS, seed=0)
    below = lyapunov_curve([0.9], 1000, 3, EDGE_PARAMS, seed=0)
    return curve, below, time.perf_counter() - t0


def _edge_exponent(curve):
    means = [p.mean for p in curve.points]
    if min(means) <= 0:
        return None
    return critical_exponent(curve)[0]


@pytest.mark.slow
def test_criterion_6_critical_scaling(report, edge_run):
    curve, below, elapsed = edge_run
    means = {p.sigma: p.mean for p in curve.points}
    exponent = _edge_exponent(curve)
    fit_ok = exponent is not None and abs(exponent - EXPONENT) <= EXPONENT_TOL
    bracket_ok = below.points[0].mean < 0 < means[1.1]
    detail = ("means " + ", ".join(f"{s}:{m:.5f}" for s, m in means.items())
              + f"; mean(0.9)={below.points[0].mean:.5f}; exponent="
              + ("undefined (non-positive mean)" if exponent is None else f"{exponent:.3f}")
              + f"; bracket ok={bracket_ok}")
    assert report("criterion 6 critical scaling of chaos", fit_ok and bracket_ok, detail,
                  elapsed, 3600)


@pytest.mark.slow
def test_criterion_7_large_sigma(report):
    t0 = time.perf_counter()
    sigmas = [5.0, 15.0, 50.0]
    curve = lyapunov_curve(sigmas, 500, 2, {"dt": 0.01, "transient": 100.0, "t_total": 1000.0},
                           seed=0)
    ratios = [p.mean / math.log(p.sigma) for p in curve.points]
    variation = max(ratios) / min(ratios) - 1.0 if min(ratios) > 0 else math.inf
    assert report("criterion 7 large-sigma regime", variation < 0.5,
                  "lambda/log(sigma): " + ", ".join(f"{r:.4f}" for r in ratios)
                  + f"; variation max/min-1={variation:.3f}", time.perf_counter() - t0, 1800)


@pytest.mark.slow
def test_criterion_8_topological_dynamical_match(report, edge_run):
    curve = edge_run[0]
    c_exp = fit_power_law([(s - 1.0, c_closed_form(s)) for s in EDGE_SIGMAS])[0]
    l_exp = _edge_exponent(curve)
    ok = (abs(c_exp - EXPONENT) <= EXPONENT_TOL and l_exp is not None
          and abs(l_exp - EXPONENT) <= EXPONENT_TOL)
    detail = f"complexity exponent={c_exp:.3f}; lyapunov exponent=" + (
        "undefined" if l_exp is None else f"{l_exp:.3f}")
    assert report("criterion 8 topological-dynamical match", ok, detail)


@pytest.mark.slow
def test_criterion_9_fakir_slope(report):
    t0 = time.perf_counter()
    res = slope_experiment([5, 10, 20, 40, 80], n_landscapes=100, seed=0)
    ok = (res.slope > 0 and res.r2 > 0.9
          and REFERENCE_SLOPE / 3 <= res.slope <= REFERENCE_SLOPE * 3)
    assert report("criterion 9 fakir experiment", ok,
                  "means " + ", ".join(f"{m:.4f}" for m in res.means)
                  + f"; slope={res.slope:.4f} per ln k, r2={res.r2:.3f}, "
                  f"reference band [{REFERENCE_SLOPE / 3:.2f}, {REFERENCE_SLOPE * 3:.2f}]",
                  time.perf_counter() - t0, 3600)


def _odd_closure():
    for i in range(5):
        eq = find_equilibria(sample_matrix(6, 2.0, i), n_starts=100, seed=i)
        roots = np.array(eq.roots)
        for r in roots:
            if np.min(np.linalg.norm(roots + r, axis=1)) > 1e-6:
                return False
    return True


def _conjugate_closed():
    for i in range(5):
        z = eigenvalues(sample_matrix(200, 1.3, i)).eigenvalues
        if not np.allclose(np.sort_complex(z), np.sort_complex(z.conj()), atol=1e-9):
            return False
    return True


def _jacobian_fd():
    J = sample_matrix(30, 1.5, 1)
    x = seeding.gaussian(2, 30)
    A = jacobian_at(J, TANH, x)
    h = 1e-6
    fd = np.column_stack([(vector_field(J, TANH, x + h * e) - vector_field(J, TANH, x - h * e))
                          / (2 * h) for e in np.eye(30)])
    return np.max(np.abs(A - fd)) < 1e-5


def _benettin_linear():
    rng = seeding.make_rng(3)
    D = np.diag([0.3, -0.2, -1.0, 0.1])
    P = rng.standard_normal((4, 4))
    A = P @ D @ np.linalg.inv(P)
    lam, _, _ = benettin(lambda x, v: (A @ x, A @ v), np.zeros(4), np.ones(4), 0.01, 20.0, 400.0)
    return abs(lam - 0.3) < 1e-3


def _energy_drift():
    l = sample_landscape(20, seed=11)
    tr = integrate_particle(l, initial_state(l, seed=1), dt=1e-3, t_end=1e4, store_every=1000)
    return tr.max_energy_drift < 1e-4


def _determinism():
    checks = [
        lambda: seeding.gaussian(5, (7, 3)),
        lambda: sample_matrix(50, 1.2, 9).entries,
        lambda: c_quadrature(1.5, n_points=10_000, seed=4).value,
        lambda: kac_rice_mc(40, 1.5, n_matrices=5, seed=4).value,
        lambda: np.array(find_equilibria(sample_matrix(4, 2.0, 3), n_starts=50, seed=2).roots),
        lambda: max_lyapunov_benettin(sample_matrix(30, 2.0, 1), dt=0.05, transient=5.0,
                                      t_total=30.0, seed=3).value,
        lambda: fakir_lyapunov(sample_landscape(10, seed=6), seed=2, transient=10.0, t_total=100.0),
    ]
    return all(np.array_equal(f(), f()) for f in checks)


def test_criterion_10_property_suites(report):
    t0 = time.perf_counter()
    results = {
        "odd-pair closure": _odd_closure(),
        "conjugate-closed spectra": _conjugate_closed(),
        "jacobian vs finite differences": _jacobian_fd(),
        "benettin on linear systems": _benettin_linear(),
        "symplectic energy drift": _energy_drift(),
        "seeded determinism": _determinism(),
    }
    ok = all(results.values())
    assert report("criterion 10 property suites", ok,
                  "; ".join(f"{k}={v}" for k, v in results.items()),
                  time.perf_counter() - t0, 300)
