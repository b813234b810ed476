"""Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria". The Monte Carlo criteria
(4, 5, 7, 8) run at 10^5 trials and take a few minutes in total.
"""

import filecmp
import math
import os

import numpy as np
import pytest

from fdd2d.analytic import (
    DuplexMode,
    SystemParams,
    closed_form_se_interference_limited,
    interference_limited_argument,
    laplace_interference,
    laplace_interference_alpha4,
    outage_probability,
    spectral_efficiency,
)
from fdd2d.caching import (
    CollaborationProbabilities,
    ZipfModel,
    _serve_probability,
    build_caching_profile,
    lambda_serve_explicit,
    zipf_pmf,
)
from fdd2d.cli import main
from fdd2d.experiments import ExperimentConfig, validate_collaboration, validate_link_grid
from fdd2d.numerics import QuadratureSpec
from fdd2d.simulation import SimConfig, estimate_spectral_efficiency

ACCEPTANCE_TRIALS = 100_000
HD, FD = DuplexMode.HD, DuplexMode.FD


def params(**kw):
    values = dict(lam=1e-3, mu=0.3, alpha=4.0, beta=1e-5, rho_d=0.1, sigma2=0.0, theta_d=10.0, r_d=10.0)
    values.update(kw)
    return SystemParams(**values)


@pytest.fixture(scope="module")
def link_report():
    # One SINR sample set per (lambda, beta, mode), shared by criteria 4 and 5.
    return validate_link_grid(ExperimentConfig(trials=ACCEPTANCE_TRIALS, seed=1))


@pytest.fixture(scope="module")
def collab_report():
    return validate_collaboration(ExperimentConfig(mu=0.3, trials=ACCEPTANCE_TRIALS, seed=1))


def test_criterion_01_binomial_sum(record_acceptance):
    worst = 0.0
    for n_users in range(1, 61):
        for f in (0.0, 0.01, 0.1, 0.5, 0.9, 1.0):
            worst = max(worst, abs(float(_serve_probability(f, n_users)) - lambda_serve_explicit(f, n_users)))
    assert record_acceptance(1, worst <= 1e-12, f"closed form vs explicit binomial sum, max abs diff {worst:.2e}")


def test_criterion_02_zipf_and_caching(record_acceptance):
    worst = 0.0
    for m in (1, 10, 1000):
        for gamma in (0.0, 0.8, 1.2, 2.0):
            worst = max(worst, abs(zipf_pmf(ZipfModel(m, gamma)).sum() - 1.0))
    exact_one = True
    for m in (1, 10, 1000):
        for cache in sorted({1, min(3, m), min(10, m), m}):
            for n_users in (1, 2, 5, 50, 100, 1000):
                f_hit = build_caching_profile(ZipfModel(m, 1.2), cache, n_users).f_hit
                exact_one &= (f_hit == 1.0) == (n_users * cache >= m)
    ok = worst <= 1e-12 and exact_one
    assert record_acceptance(2, ok, f"pmf sum max error {worst:.1e}; f_hit == 1 exactly iff N*X >= m: {exact_one}")


def test_criterion_03_laplace_alpha4(record_acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        s = 10 ** rng.uniform(-2, 7)
        p = params(lam=10 ** rng.uniform(-6, -1), mu=rng.uniform(0, 1))
        collab = CollaborationProbabilities(p_hd=rng.uniform(0, 1), p_fd=0.0)
        general = float(laplace_interference(s, p, HD, collab))
        special = float(laplace_interference_alpha4(s, p, HD, collab))
        worst = max(worst, abs(general - special) / special)
    assert record_acceptance(3, worst <= 1e-12, f"general vs alpha=4 Laplace on 100 tuples, max rel diff {worst:.2e}")


@pytest.mark.slow
def test_criterion_04_outage_oracle(link_report, record_acceptance):
    points = [p for p in link_report.points if p.check == "outage"]
    worst = max(points, key=lambda p: abs(p.z_score))
    ok = len(points) == 24 and all(abs(p.z_score) <= 3 for p in points)
    assert record_acceptance(
        4, ok, f"{len(points)} outage points at {ACCEPTANCE_TRIALS} trials, max |z| {abs(worst.z_score):.2f} ({worst.label})"
    )


@pytest.mark.slow
def test_criterion_05_se_oracle(link_report, record_acceptance):
    points = [p for p in link_report.points if p.check == "se"]
    ok = len(points) == 12 and all(abs(p.rel_diff) <= 0.02 or abs(p.z_score) <= 3 for p in points)
    worst_rel = max(abs(p.rel_diff) for p in points)
    worst_z = max(abs(p.z_score) for p in points)
    assert record_acceptance(
        5, ok, f"{len(points)} SE points, max rel diff {worst_rel:.4f}, max |z| {worst_z:.2f}"
    )


def test_criterion_06_closed_form_se(record_acceptance):
    spec = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-14)
    worst = 0.0
    for t in (0.1, 1.0, 5.0, 20.0):
        # lambda chosen so that T = (pi^2/2) mu P lambda R_d^2 hits the target with P = 0.3
        lam = t / ((math.pi**2 / 2) * 0.3 * 0.3 * 10.0**2)
        p = params(lam=lam, beta=0.0)
        collab = CollaborationProbabilities(0.3, 0.3)
        assert interference_limited_argument(p, HD, collab) == pytest.approx(t, rel=1e-12)
        for mode in (HD, FD):
            quad = spectral_efficiency(p, mode, collab, spec)
            closed = closed_form_se_interference_limited(p, mode, collab)
            worst = max(worst, abs(closed - quad) / quad)
    assert record_acceptance(6, worst <= 1e-6, f"positive-T Si/ci form vs quadrature, max rel diff {worst:.2e}")


@pytest.mark.slow
def test_criterion_07_collaboration_oracle(collab_report, record_acceptance):
    points = collab_report.points
    worst = max(points, key=lambda p: abs(p.z_score))
    within = all(abs(p.z_score) <= 3 for p in points)
    crossovers = [n for n in collab_report.notes if "crossover" in n]
    crossed = len(crossovers) == 4 and all(n.startswith("PASS") for n in crossovers)
    for note in crossovers:
        print(note)
    assert record_acceptance(
        7, within and crossed,
        f"{len(points)} points at {ACCEPTANCE_TRIALS} trials, max |z| {abs(worst.z_score):.2f} ({worst.label}); "
        f"crossover in analytic and empirical columns: {crossed}",
    )


@pytest.mark.slow
def test_criterion_08_kappa_doubling(record_acceptance):
    same = CollaborationProbabilities(0.3, 0.3)
    p = params(beta=0.0)
    hd, fd = spectral_efficiency(p, HD, same), spectral_efficiency(p, FD, same)
    analytic_rel = abs(fd - 2 * hd) / (2 * hd)
    # independent seeds so the empirical check is not trivially exact
    est_hd = estimate_spectral_efficiency(SimConfig(p, HD, same, trials=ACCEPTANCE_TRIALS, master_seed=11))
    est_fd = estimate_spectral_efficiency(SimConfig(p, FD, same, trials=ACCEPTANCE_TRIALS, master_seed=12))
    z = (est_fd.value - 2 * est_hd.value) / math.hypot(est_fd.std_error, 2 * est_hd.std_error)
    ok = analytic_rel <= 1e-12 and abs(z) <= 3
    assert record_acceptance(8, ok, f"analytic FD/(2 HD) rel diff {analytic_rel:.1e}; empirical z {z:+.2f}")


def test_criterion_09_monotonicity(record_acceptance):
    collab = CollaborationProbabilities(0.3, 0.2)
    sweeps = {
        "lam": np.logspace(-5, -2, 5),
        "mu": np.linspace(0.0, 1.0, 5),
        "theta_d": 10 ** (np.linspace(-10, 20, 5) / 10),
        "beta": np.logspace(-8, -2, 5),
        "sigma2": np.logspace(-14, -8, 5),
    }
    failures = []
    for mode in (HD, FD):
        for name, values in sweeps.items():
            outs = [outage_probability(params(**{"sigma2": 1e-12, name: float(v)}), mode, collab) for v in values]
            if not all(b >= a for a, b in zip(outs, outs[1:])):
                failures.append(f"outage/{name}/{mode.value}")
        ses = [spectral_efficiency(params(lam=float(v)), mode, collab) for v in sweeps["lam"]]
        if not all(b <= a for a, b in zip(ses, ses[1:])):
            failures.append(f"se/lam/{mode.value}")
    ses = [spectral_efficiency(params(beta=float(v)), FD, collab) for v in sweeps["beta"]]
    if not all(b <= a for a, b in zip(ses, ses[1:])):
        failures.append("se/beta/fd")
    assert record_acceptance(9, not failures, "outage and SE monotone on 5-point sweeps" + (
        "" if not failures else f"; violations: {failures}"))


def test_criterion_10_power_invariance(record_acceptance):
    collab = CollaborationProbabilities(0.3, 0.2)
    worst = 0.0
    for beta in (0.0, 1e-6, 1e-5, 1e-2):
        for mode in (HD, FD):
            ref = outage_probability(params(beta=beta, rho_d=1e-3), mode, collab)
            for rho in np.logspace(-3, 0, 10):
                out = outage_probability(params(beta=beta, rho_d=float(rho)), mode, collab)
                worst = max(worst, abs(out - ref) / ref)
    assert record_acceptance(10, worst <= 1e-12, f"outage over 3 decades of rho_d, max rel drift {worst:.1e}")


def test_criterion_11_figures_deterministic(tmp_path, record_acceptance):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["figures", "--seed", "7", "--out", str(first)]) == 0
    assert main(["figures", "--seed", "7", "--out", str(second)]) == 0
    names = sorted(os.listdir(first))
    csvs = [n for n in names if n.endswith(".csv")]
    _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    ok = len(csvs) == 5 and not mismatch and not errors
    assert record_acceptance(11, ok, f"{len(csvs)} CSVs and {len(names) - len(csvs)} other files byte-identical across runs")
