"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``criterion N: PASS|FAIL ...`` line; the lines are
also repeated in the terminal summary.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from resodecay import battery
from resodecay.decay import (
    ChannelRates, late_time_slope, survival_curve, survival_probability, truncated_lorentzian,
)
from resodecay.errors import NegativeTime
from resodecay.fit import fit_decay, fit_lineshape, width_lifetime_ratio
from resodecay.gamow import (
    GamowKet, catastrophe_probe, compose, eigenvalue_residual, evolved_pairing, gamow_pairing,
    lifetime_from_pairings,
)
from resodecay.hardy import RationalHardyFunction as R
from resodecay.simulate import bin_counts, sample_decays, sample_lineshape
from resodecay.smatrix import ResonanceParams, SMatrix, born_amplitude, laurent_coefficients

FUNCS = battery.standard_wave_functions()
POLES = battery.standard_poles()


def report(n, ok, detail, elapsed, budget):
    ok = ok and elapsed < budget
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.2f} s / {budget:g} s]"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_01_lifetime_width_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for g in FUNCS.values():
        for z in POLES.values():
            ket = GamowKet(z)
            ts = np.linspace(0.0, 10.0 / ket.gamma, 21)
            tau = lifetime_from_pairings(ts, [evolved_pairing(g, ket, t) for t in ts])
            worst = max(worst, abs(tau * ket.gamma - 1.0))
    assert len(FUNCS) >= 5 and len(POLES) >= 3
    assert report(1, worst <= 1e-6, f"max |tau Gamma - 1| = {worst:.2e} (tol 1e-6)",
                  time.perf_counter() - t0, 10)


def test_criterion_02_gamow_route_agreement():
    t0 = time.perf_counter()
    worst = max(gamow_pairing(g, GamowKet(z)).relative_discrepancy
                for g in FUNCS.values() for z in POLES.values())
    assert report(2, worst <= 1e-6, f"max residue/quadrature discrepancy = {worst:.2e} (tol 1e-6)",
                  time.perf_counter() - t0, 10)


def test_criterion_03_complex_eigenvalue():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for g in FUNCS.values():
        if g.decay_order < 2:
            continue
        for z in POLES.values():
            if battery.pole_separation(g, z) < 1.0:
                continue
            worst = max(worst, eigenvalue_residual(g, GamowKet(z)))
            count += 1
    assert count >= 10
    assert report(3, worst <= 1e-6, f"max eigenvalue residual = {worst:.2e} over {count} cases (tol 1e-6)",
                  time.perf_counter() - t0, 10)


def test_criterion_04_semigroup_and_catastrophe():
    t0 = time.perf_counter()
    comp, growth = 0.0, math.inf
    for g in FUNCS.values():
        for z in POLES.values():
            ket = GamowKet(z)
            t1, t2 = 0.7 / ket.gamma, 1.3 / ket.gamma
            v12 = evolved_pairing(g, ket, t1 + t2)
            comp = max(comp, abs(compose(ket, evolved_pairing(g, ket, t1), t2) - v12) / abs(v12))
            m50, m100 = catastrophe_probe(g, ket, -1.0 / ket.gamma, [50 * ket.gamma, 100 * ket.gamma])
            growth = min(growth, m100 / m50)
    ok = comp <= 1e-10 and growth >= 1e3
    assert report(4, ok, f"composition error {comp:.2e} (tol 1e-10); min probe ratio 100G/50G = {growth:.3g} (>= 1e3)",
                  time.perf_counter() - t0, 30)


def test_criterion_05_weisskopf_wigner_deviation():
    t0 = time.perf_counter()
    gamma = 1.0
    rho = truncated_lorentzian(100.0 * gamma, gamma)
    tau = 1.0 / gamma
    curve = survival_curve(rho, np.linspace(0.0, 5.0 * tau, 201))
    sup = float(np.max(np.abs(curve.deviation)))
    slope, late = late_time_slope(rho, 30 * tau, 100 * tau)
    ok = sup <= 5e-3 and abs(slope + 2.0) <= 0.1
    assert report(5, ok, f"sup deviation {sup:.2e} (<= 5e-3); log-log slope {slope:.4f} on {late.size} points (-2 +- 0.1)",
                  time.perf_counter() - t0, 60)


def _qawf_probability(rho, t):
    """``|int rho(E) exp(-i E t) dE|**2`` by scipy's Fourier quadrature (an outside route)."""
    integrate = pytest.importorskip("scipy.integrate")
    if t == 0.0:
        return integrate.quad(rho, 0.0, np.inf, epsabs=0, epsrel=1e-13)[0] ** 2
    w = abs(t)
    c = integrate.quad(rho, 0.0, np.inf, weight="cos", wvar=w, epsabs=1e-12, limlst=200)[0]
    s = integrate.quad(rho, 0.0, np.inf, weight="sin", wvar=w, epsabs=1e-12, limlst=200)[0]
    return c * c + s * s


def test_criterion_06_time_symmetry_vs_semigroup():
    t0 = time.perf_counter()
    rho = truncated_lorentzian(2.0, 0.2)
    ts = np.linspace(0.0, 10.0 / rho.gamma, 50)
    sym = outside = 0.0
    for t in ts:
        p_pos = survival_probability(rho, t)[1]
        p_neg = survival_probability(rho, -t)[1]
        sym = max(sym, abs(p_neg - p_pos))
        outside = max(outside, abs(p_neg - _qawf_probability(rho, -t)))
    rejects = True
    for t in ts[1:]:
        try:
            evolved_pairing(FUNCS["simple"], GamowKet(POLES["canonical"]), -t)
            rejects = False
        except NegativeTime:
            pass
    ok = sym <= 1e-8 and outside <= 1e-8 and rejects
    assert report(6, ok, f"max |P(-t) - P(t)| = {sym:.2e}, P(-t) vs outside Fourier quadrature {outside:.2e} "
                         f"(tol 1e-8); evolved_pairing rejects t < 0: {rejects}",
                  time.perf_counter() - t0, 30)


def test_criterion_07_laurent_extraction():
    t0 = time.perf_counter()
    gamma = 0.2
    S = SMatrix.unitary(2.0, gamma)
    lc = laurent_coefficients(S, S.pole)
    err = max(abs(lc[-1] + 1j * gamma), abs(lc[0] - 1.0), abs(lc[1]))
    assert report(7, err <= 1e-10, f"max |R_k - closed form| = {err:.2e} (tol 1e-10)",
                  time.perf_counter() - t0, 5)


def test_criterion_08_born_pole_extraction():
    t0 = time.perf_counter()
    S = SMatrix.unitary(2.0, 0.2)
    pairs = [
        (R.single(1 + 1j, 1), R.single(2 + 0.5j, 1)),
        (FUNCS["two_poles"], FUNCS["double_pole"]),
        (FUNCS["three_poles"], FUNCS["mixed"]),
    ]
    worst = 0.0
    for psi, phi in pairs:
        a = born_amplitude(psi, phi, S, "direct")
        b = born_amplitude(psi, phi, S, "pole-extracted")
        worst = max(worst, abs(a - b) / abs(a))
    assert report(8, worst <= 1e-6, f"max direct vs pole+background discrepancy = {worst:.2e} (tol 1e-6)",
                  time.perf_counter() - t0, 30)


# end-to-end replicas ------------------------------------------------------------

E_R, GAMMA, HBAR = 2.0, 0.2, 1.0
X_EDGES = np.linspace(1.0, 3.0, 101)
T_EDGES = np.linspace(0.0, 10.0 * HBAR / GAMMA, 101)
CHANNELS = ChannelRates((0.25 * GAMMA / HBAR, 0.75 * GAMMA / HBAR))


def replica(seed):
    t0 = time.perf_counter()
    xev = sample_lineshape(100_000, ResonanceParams(E_R, GAMMA), window=(1.0, 3.0), seed=seed)
    dev = sample_decays(100_000, CHANNELS, seed=seed)
    lf = fit_lineshape(bin_counts(xev, X_EDGES))
    df = fit_decay(bin_counts(dev, T_EDGES), events=dev)
    rep = width_lifetime_ratio(lf, df, HBAR)
    se_l, se_d = lf.standard_errors, df.standard_errors
    pulls = {
        "E_R": (lf.e_r - E_R) / se_l["E_R"],
        "Gamma": (lf.gamma - GAMMA) / se_l["Gamma"],
        "tau": (df.tau - HBAR / GAMMA) / se_d["tau"],
    }
    return rep, pulls, time.perf_counter() - t0


@pytest.fixture(scope="module")
def replicas():
    t0 = time.perf_counter()
    runs = [replica(seed) for seed in range(100)]
    return runs, time.perf_counter() - t0


def test_criterion_09_end_to_end(replicas):
    runs, _ = replicas
    inside = sum(abs(rep.pull) <= 3.0 for rep, _, _ in runs)
    slowest = max(dt for _, _, dt in runs)
    assert report(9, inside >= 95, f"|pull| <= 3 in {inside}/100 replicas (>= 95); slowest replica",
                  slowest, 60)


def test_criterion_10_estimator_calibration(replicas):
    runs, total = replicas
    parts, ok = [], True
    for key in ("E_R", "Gamma", "tau"):
        x = np.array([p[key] for _, p, _ in runs])
        m, s = float(x.mean()), float(x.std(ddof=1))
        ok &= -0.15 <= m <= 0.15 and 0.8 <= s <= 1.25
        parts.append(f"{key} mean {m:+.3f} sd {s:.3f}")
    assert report(10, ok, "; ".join(parts) + " (mean in +-0.15, sd in [0.8, 1.25])", total, 600)


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    outputs = []
    for run in ("a", "b"):
        cwd = tmp_path / run
        cwd.mkdir()
        proc = subprocess.run([sys.executable, "-m", "resodecay.cli", "ratio", "--seed", "42", "--out", "out"],
                              cwd=cwd, capture_output=True)
        assert proc.returncode == 0, proc.stderr
        files = sorted(os.listdir(cwd / "out"))
        outputs.append({name: (cwd / "out" / name).read_bytes() for name in files})
    same = outputs[0] == outputs[1] and len(outputs[0]) >= 7
    assert report(11, same, f"{len(outputs[0])} output files byte-identical across two runs",
                  time.perf_counter() - t0, 120)
