"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <id> PASS|FAIL`` line with the
measured quantities before asserting, so ``pytest -v -s`` (or the captured
output of a failure) shows every verdict.
"""

from __future__ import annotations

import math
import time
import warnings
from collections import defaultdict

import numpy as np
import pytest
from conftest import params_at_ratio

from plasmongate import units
from plasmongate.cli import main
from plasmongate.conductivity import Material, plasma_frequency
from plasmongate.dispersion import expand_mode, trace_branch
from plasmongate.gate import GateSettings, SweepGrid, containment_probability, evaluate_gate_point, optimize_q_curve, sweep_map
from plasmongate.io import load_config
from plasmongate.rates import gamma1_intrinsic
from plasmongate.ribbon import RibbonGrid, solve_modes
from plasmongate.scattering import (
    GaussianPulse,
    ScatterParams,
    absorption_length_from,
    absorption_length_relative,
    r_coeff,
    reflection_at_ratio,
    t_coeff,
    wavepacket_oracle,
)


@pytest.fixture
def verdict(capsys):
    t0 = time.perf_counter()

    def report(cid: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid} {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f} s): {detail}")
        assert ok, detail

    return report


def test_criterion_01_plasma_frequency(verdict):
    errs = {ef: plasma_frequency(Material(ef)) / (5 * ef / 3) - 1 for ef in (0.05, 0.1, 0.2)}
    ok = all(abs(e) < 0.01 for e in errs.values())
    verdict("1", ok, "rel. deviation from 5/3 E_F: " + ", ".join(f"{k}: {v:+.2e}" for k, v in errs.items()))


def test_criterion_02_drude_absorption(verdict):
    worst = 0.0
    for ratio in (0.01, 0.03, 0.1, 0.3, 0.9):
        w = 0.08
        g = ratio * w
        val = gamma1_intrinsic(w, Material(0.1, drude_rate=g), "drude")
        worst = max(worst, abs(val / (g * (1 + ratio**2)) - 1))
    w = 0.1
    g1 = gamma1_intrinsic(w, Material(0.1, drude_rate=w / 100), "drude")
    close = abs(g1 / (w / 100) - 1)
    ok = worst <= 1e-10 and close <= 1e-4 + 1e-12
    verdict("2", ok, f"max rel. error vs closed form {worst:.1e}; |gamma1/gamma_D - 1| = {close:.2e} at gamma_D = omega/100")


def test_criterion_03_reflection_benchmark(verdict):
    R = reflection_at_ratio(1e3) ** 2
    sp = params_at_ratio(1e3)
    R_k = r_coeff(sp.k_p, sp) ** 2
    ok = abs(R - 0.98755) <= 1e-5 and abs(R_k - 0.98755) <= 1e-5
    verdict("3", ok, f"R = {R:.8f} (closed form), {R_k:.8f} (r at k_p)")


def test_criterion_04_oracle_equivalence(verdict):
    rows, ok = [], True
    phase = math.nan
    for ratio in (0.1, 1.0, 10.0):
        sp = params_at_ratio(ratio)
        res = wavepacket_oracle(sp, GaussianPulse(sp.k_p, 8.0 * sp.lambda_p))
        r = r_coeff(sp.k_p, sp)
        R, T = r * r, (1 + r) ** 2
        dR, dT = res.reflection / R - 1, res.transmission / T - 1
        ok &= abs(dR) <= 0.01 and abs(dT) <= 0.01
        rows.append(f"ratio {ratio:g}: R_num {res.reflection:.5g} vs R {R:.5g} ({dR:+.1%}), T_num {res.transmission:.5g} vs T {T:.5g} ({dT:+.1%})")
        if ratio == 10.0:
            phase = res.reflected_phase
    ok &= abs(phase - math.pi) <= 0.05
    verdict("4", ok, "; ".join(rows) + f"; phase {phase:.4f} rad")


def test_criterion_05_identity_suite(verdict):
    rng = np.random.default_rng(20260101)
    worst_forms, worst_tr, n_ok, lossless_ok = 0.0, 0.0, 0, True
    while n_ok < 100:
        k = rng.uniform(0.005, 0.5)
        m = rng.uniform(0.05, 20.0)
        v_g = rng.uniform(0.0, 0.5)
        g2 = 10 ** rng.uniform(-5, -1)
        a = absorption_length_from(v_g, m, k, g2)
        if a < 0:
            continue
        b = absorption_length_relative(v_g - units.HBAR * k / m, m, k, g2)
        scale = 2.0 / g2 * (2.0 * v_g / k + units.HBAR / m)
        worst_forms = max(worst_forms, abs(a - b) / scale)
        sp = ScatterParams(k, v_g, v_g - units.HBAR * k / m, m, g2)
        r, t = r_coeff(k, sp), t_coeff(k, sp)
        worst_tr = max(worst_tr, abs((t - r) - 1.0))
        if not r * r + t * t < 1:
            lossless_ok = False
        free = ScatterParams(k, v_g, sp.v_bar, m, 0.0)
        if r_coeff(k, free) ** 2 + t_coeff(k, free) ** 2 != 1.0:
            lossless_ok = False
        n_ok += 1
    ok = worst_forms <= 1e-12 and worst_tr == 0.0 and lossless_ok
    verdict("5", ok, f"t - r - 1 max {worst_tr:.1e}; lambda_a forms max rel. diff {worst_forms:.1e}; R + T < 1 iff gamma2 > 0: {lossless_ok}")


def test_criterion_06_eigensolver_convergence(verdict):
    a = solve_modes(RibbonGrid(20.0, 100), 1.0)
    b = solve_modes(RibbonGrid(20.0, 200), 1.0)
    d = {
        "eta": np.abs(a.etas / b.etas - 1),
        "xi1": np.abs(a.xi1 / b.xi1 - 1),
        "xi3": np.abs(a.xi3 / b.xi3 - 1),
    }
    ok = all(np.all(v < 0.01) for v in d.values()) and b.node_counts == (0, 1, 2)
    detail = "; ".join(f"{k} " + "/".join(f"{x:.2%}" for x in v) for k, v in d.items())
    verdict("6", ok, f"N=100 vs 200 changes ({detail}); node counts {b.node_counts}")


def test_criterion_07_dispersion_structure(verdict):
    cfg = load_config()
    g, m = RibbonGrid(20.0), Material(0.1)
    wp = plasma_frequency(m)
    lo, hi = cfg.dispersion.kW_min / 20.0, cfg.dispersion.kW_max / 20.0
    parts, ok = [], True
    with warnings.catch_warnings():
        # the n = 2 dip is reported through a warning and through br.monotone
        warnings.simplefilter("ignore", RuntimeWarning)
        for n in (1, 2, 3):
            br = trace_branch(n, lo, hi, cfg.dispersion.n_points, g, m)
            full = len(br) == cfg.dispersion.n_points
            below = bool(np.all(br.omega < wp))
            ok &= full and below and br.monotone
            parts.append(f"n={n}: {len(br)} pts, below plasma {below}, monotone {br.monotone}")
    worst = 0.0
    for n in (2, 3):
        le = expand_mode(n, 0.05, g, m)
        for kw in np.linspace(0.8, 1.2, 9):
            k = kw / 20.0
            v = expand_mode(n, k, g, m).v_g
            worst = max(worst, abs((le.v_g + units.HBAR * (k - le.k_p) / le.mass) / v - 1))
    ok &= worst < 0.05
    verdict("7", ok, f"kW in [{cfg.dispersion.kW_min}, {cfg.dispersion.kW_max}]: " + "; ".join(parts) + f"; quadratic v_g max deviation {worst:.2%}")


@pytest.fixture(scope="module")
def full_map():
    return sweep_map(SweepGrid(), GateSettings(n=2))


def test_criterion_08_gate_map_properties(verdict, full_map):
    pts = full_map
    # (a) F constant along W * E_F = const
    groups = defaultdict(list)
    for p in pts:
        if math.isfinite(p.F) and p.gamma2 > 0:
            groups[round(p.W * p.E_F, 9)].append(p.F)
    spreads = [max(v) - min(v) for v in groups.values() if len(v) > 1]
    iso = max(spreads)
    # (b) unmasked high fidelity region
    high = [p for p in pts if not p.masked and p.F > 0.9]
    # (c) reconstruction
    recon = max(
        abs(p.P_succ - p.F * math.exp(-2 * p.gamma1 / units.HBAR * p.L / p.v_g) * containment_probability(p.L, p.sigma, p.delta_l))
        for p in pts
        if not p.masked
    )
    # (d) optimum versus Q
    rows, monotone = optimize_q_curve(load_config().quality.Q_list, settings=GateSettings(n=2))
    by_q = {r.Q: r.P_succ for r in rows}
    ratio = by_q[1000.0] / by_q[150.0]
    ok = iso < 1e-6 and len(high) > 0 and recon < 1e-12 and monotone and ratio > 1.5
    verdict(
        "8",
        ok,
        f"(a) max F spread on {len(spreads)} isolines {iso:.1e}; (b) {len(high)} unmasked points with F > 0.9;"
        f" (c) max reconstruction error {recon:.1e}; (d) monotone {monotone}, P*(1000)/P*(150) = {ratio:.2f}",
    )


def test_criterion_09_containment_limits(verdict):
    s = 20.0
    far = containment_probability(1e4 * s, s)
    four = containment_probability(4 * s, s)
    p = evaluate_gate_point(20.0, 0.1, GateSettings(n=2))
    L = p.sigma
    a = evaluate_gate_point(20.0, 0.1, GateSettings(n=2), L=L).P_succ
    b = evaluate_gate_point(20.0, 0.1, GateSettings(n=2, delta_l=0.1 * L), L=L).P_succ
    shift = abs(b - a) / a
    ok = abs(far - 1) < 1e-12 and abs(four - math.erf(1.0)) <= 1e-12 and shift < 0.01
    verdict("9", ok, f"P_p(inf) - 1 = {far - 1:.1e}; P_p(4 sigma) - erf(1) = {four - math.erf(1):.1e}; P_succ shift at dL = 0.1 L: {shift:.3%}")


def test_criterion_10_determinism(verdict, tmp_path):
    a, b = tmp_path / "t1", tmp_path / "t2"
    ca = main(["gate-map", "--out", str(a), "--threads", "1", "--seedless"])
    cb = main(["gate-map", "--out", str(b), "--threads", "2", "--seedless"])
    same = (a / "gate_map.csv").read_bytes() == (b / "gate_map.csv").read_bytes()
    n_rows = len((a / "gate_map.csv").read_text().splitlines()) - 2
    verdict("10", ca == cb == 0 and same, f"exit codes {ca}/{cb}; {n_rows} rows; byte-identical across --threads 1/2: {same}")
