"""Command-line interface: ``plasmongate {modes,rates,scatter,gate-map,optimize}``.

Exit codes: 0 success, 2 configuration error, 3 infeasible physics,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, units
from .conductivity import Material
from .dispersion import BRANCH_COLUMNS, branch_rows, branch_velocities, expand_mode, trace_branch
from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    InsufficientModesError,
    InvalidNormalizationError,
    NoSolutionError,
    ResolutionError,
)
from .gate import GATE_COLUMNS, evaluate_gate_point, optimize_q_curve, sweep_map
from .io import RunManifest, input_digests, load_config, write_csv
from .rates import gamma1_table, gamma2_table
from .ribbon import RibbonGrid, _eigenmodes, mode_table, solve_modes
from .scattering import (
    GaussianPulse,
    ScatterParams,
    fidelity,
    fidelity_table,
    nonadmissible_weight,
    r_coeff,
    wavepacket_oracle,
)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("plasmongate")

CONVENTIONS = {
    "containment": "P_p = 1/2 [erf((dL + L/2)/(2 sigma)) - erf((dL - L/2)/(2 sigma))], sigma = W/delta_k",
    "pulse": "psi(k) = (sigma/sqrt(pi))^(1/2) exp(-(k - k0)^2 sigma^2 / 2), k0 = kW/W",
    "gamma1": "hbar*gamma1 = hbar*omega_p / Q",
    "mask": "non_admissible when lambda_a < 0; nonadmissible_weight reported per row",
}


class Infeasible(Exception):
    pass


def _out_dir(args, cfg) -> Path:
    d = Path(args.out or cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    if (d / "manifest.json").exists():
        (d / "manifest.json").unlink()
    return d


def cmd_modes(cfg, out: Path, args):
    m = cfg.material_model()
    grid = RibbonGrid(cfg.geometry.width, cfg.grid.n_points)
    W = grid.width
    k_lo, k_hi = cfg.dispersion.kW_min / W, cfg.dispersion.kW_max / W
    outputs, vg_rows = [], []
    for n in range(1, cfg.mode.n_max + 1):
        br = trace_branch(n, k_lo, k_hi, cfg.dispersion.n_points, grid, m)
        v = branch_velocities(br)
        path = write_csv(out / f"branch_n{n}.csv", "branch", BRANCH_COLUMNS, branch_rows(br, v))
        outputs.append(path.name)
        if n >= 2:
            # quadratic model around the operating point
            k_p = cfg.mode.kW / W
            le = expand_mode(n, k_p, grid, m)
            for k, vg in zip(br.k_grid, v):
                vq = le.v_g + units.HBAR * (k - k_p) / le.mass
                vg_rows.append((n, float(k), float(k * W), float(vg), float(vq)))
    if vg_rows:
        cols = ("n", "k_nm_inv", "kW", "v_g_nm_fs", "v_g_quadratic_nm_fs")
        outputs.append(write_csv(out / "group_velocity.csv", "group_velocity", cols, vg_rows).name)
    modes = solve_modes(grid, cfg.mode.kW, cfg.mode.n_max)
    cols = ("theta",) + tuple(f"phi_{i + 1}" for i in range(len(modes)))
    outputs.append(write_csv(out / "mode_profiles.csv", "mode_profiles", cols, mode_table(modes, grid)).name)
    eta_cols = ("n", "q", "eta", "node_count", "xi1_nm", "xi3_nm")
    eta_rows = [
        (i + 1, modes.q, float(modes.etas[i]), modes.node_counts[i], float(modes.xi1[i]), float(modes.xi3[i]))
        for i in range(len(modes))
    ]
    outputs.append(write_csv(out / "mode_eigenvalues.csv", "mode_eigenvalues", eta_cols, eta_rows).name)
    return outputs, {"branches": cfg.mode.n_max}


def cmd_rates(cfg, out: Path, args):
    m = cfg.material_model()
    ef = m.fermi_energy
    if m.drude_rate == 0:
        m = Material(ef, ef / 100.0, m.fermi_velocity, m.eps_eff)
        log.info("drude_rate is 0; gamma1 table uses hbar*gamma_D = E_F/100")
    omegas = np.linspace(0.05 * ef, 1.9 * ef, 80)
    outputs = [
        write_csv(
            out / "gamma1.csv",
            "gamma1",
            ("hbar_omega_eV", "gamma1_drude_eV", "gamma1_lrpa_eV"),
            gamma1_table(omegas, m),
        ).name
    ]
    grid = RibbonGrid(cfg.geometry.width, cfg.grid.n_points)
    rows = []
    ks = np.linspace(cfg.dispersion.kW_min, cfg.dispersion.kW_max, cfg.dispersion.n_points) / grid.width
    for n in range(2, cfg.mode.n_max + 1):
        rows += [(n,) + r for r in gamma2_table(n, ks, grid, m.lossless(), cfg.sigma3_model())]
    cols = ("n", "hbar_omega_eV", "k_nm_inv", "gamma2_nm_fs", "gamma2_normalised")
    outputs.append(write_csv(out / "gamma2.csv", "gamma2", cols, rows).name)
    return outputs, {"gamma1_rows": len(omegas), "gamma2_rows": len(rows)}


def cmd_scatter(cfg, out: Path, args):
    m = cfg.material_model().lossless()
    W = cfg.geometry.width
    s = cfg.gate_settings()
    p = evaluate_gate_point(W, m.fermi_energy, s, L=cfg.geometry.length)
    if p.mask == "no_solution":
        raise Infeasible(f"mode n={s.n} has no solution at kW={s.kW}")
    g2 = p.gamma2
    if cfg.scatter.gamma2 is not None:
        g2 = cfg.scatter.gamma2
    sp = ScatterParams(k_p=p.k_p, v_g=p.v_g, v_bar=p.v_bar, mass=p.mass, gamma2=g2)
    if cfg.scatter.ratio is not None:
        # choose gamma2 so that lambda_p / lambda_a hits the requested ratio
        lam_a_g2 = 2.0 * (2.0 * p.v_g / abs(p.k_p) - units.HBAR / p.mass)
        g2 = lam_a_g2 * cfg.scatter.ratio / sp.lambda_p
        sp = ScatterParams(k_p=p.k_p, v_g=p.v_g, v_bar=p.v_bar, mass=p.mass, gamma2=g2)
    if sp.gamma2 > 0 and sp.lambda_a < 0:
        raise Infeasible(f"non-admissible operating point: lambda_a = {sp.lambda_a:.6g} nm < 0")
    pulse = GaussianPulse.for_ribbon(p.k_p, W, s.delta_k)
    outputs = [
        write_csv(out / "scatter.csv", "scatter", ("k_nm_inv", "r", "t", "R", "T", "admissible"), fidelity_table(pulse, sp)).name
    ]
    r0 = r_coeff(p.k_p, sp)
    F = fidelity(pulse, sp) if sp.gamma2 > 0 else 0.0
    ratio = sp.lambda_p / sp.lambda_a if sp.lambda_a not in (0.0, math.inf) else (math.inf if sp.lambda_a == 0 else 0.0)
    summary = {
        "k_p_nm_inv": p.k_p,
        "lambda_p_nm": sp.lambda_p,
        "lambda_a_nm": sp.lambda_a,
        "lambda_p_over_lambda_a": ratio,
        "gamma2_nm_fs": sp.gamma2,
        "r_kp": r0,
        "R": r0 * r0,
        "T": (1.0 + r0) ** 2,
        "F": F,
        "nonadmissible_weight": nonadmissible_weight(pulse, sp),
    }
    counters = {}
    if args.oracle or cfg.scatter.oracle:
        narrow = GaussianPulse(p.k_p, cfg.scatter.oracle_sigma * sp.lambda_p)
        res = wavepacket_oracle(sp, narrow)
        summary.update({"R_num": res.reflection, "T_num": res.transmission, "reflected_phase": res.reflected_phase})
        outputs.append(
            write_csv(out / "oracle_history.csv", "oracle_history", ("t_fs", "norm", "R", "T"), res.history).name
        )
        counters.update({"oracle_steps": res.n_steps, "oracle_dx_nm": res.dx, "oracle_dt_fs": res.dt})
    outputs.append(write_csv(out / "scatter_summary.csv", "scatter_summary", tuple(summary), [tuple(summary.values())]).name)
    return outputs, counters


def _gate_row(p):
    return tuple(getattr(p, c) for c in GATE_COLUMNS)


def cmd_gate_map(cfg, out: Path, args):
    rows = sweep_map(cfg.sweep_grid(), cfg.gate_settings(), threads=args.threads)
    path = write_csv(out / "gate_map.csv", "gate_map", GATE_COLUMNS, [_gate_row(p) for p in rows])
    n_ok = sum(not p.masked for p in rows)
    counters = {"points": len(rows), "unmasked": n_ok}
    if n_ok == 0:
        raise Infeasible("every sweep point is masked", [path.name], counters)
    return [path.name], counters


def cmd_optimize(cfg, out: Path, args):
    rows = []
    monotone = {}
    for n in cfg.optimize.modes:
        res, mono = optimize_q_curve(
            cfg.quality.Q_list,
            E_F=cfg.material.fermi_energy,
            settings=cfg.gate_settings(n=int(n)),
            W_range=(cfg.sweep.W_min, cfg.sweep.W_max),
            W_step=cfg.sweep.W_step,
            refine_iterations=cfg.optimize.refine_iterations,
        )
        monotone[int(n)] = mono
        rows += [(int(n), r.Q, r.P_succ, r.W, r.L, r.L_over_sigma, r.F, r.mask) for r in res]
    cols = ("n", "Q", "P_succ", "W_nm", "L_nm", "L_over_sigma", "F", "mask")
    path = write_csv(out / "optimize.csv", "optimize", cols, rows)
    return [path.name], {"monotone_in_Q": monotone}


COMMANDS = {
    "modes": cmd_modes,
    "rates": cmd_rates,
    "scatter": cmd_scatter,
    "gate-map": cmd_gate_map,
    "optimize": cmd_optimize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plasmongate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seedless", action="store_true", help="fail if any random number generator was consulted")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "scatter":
            p.add_argument("--oracle", action="store_true", help="also run the wavepacket oracle")
    return parser


def _rng_state():
    state = np.random.get_state()
    return state[1].tobytes(), state[2]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "oracle"):
        args.oracle = False
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args, cfg)
    rng_before = _rng_state()
    t0 = time.perf_counter()
    code, outputs, counters = EXIT_OK, [], {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            outputs, counters = COMMANDS[args.command](cfg, out, args)
        except Infeasible as exc:
            code = EXIT_INFEASIBLE
            msg = exc.args[0]
            if len(exc.args) > 2:
                outputs, counters = exc.args[1], exc.args[2]
            print(f"infeasible: {msg}", file=sys.stderr)
        except (NoSolutionError, InsufficientModesError, InvalidNormalizationError) as exc:
            code = EXIT_INFEASIBLE
            print(f"infeasible: {exc}", file=sys.stderr)
        except ConfigError as exc:
            code = EXIT_CONFIG
            print(f"config error: {exc}", file=sys.stderr)
        except (ConvergenceError, BracketError, ResolutionError, FloatingPointError, np.linalg.LinAlgError) as exc:
            code = EXIT_NUMERIC
            print(f"numerical failure: {exc}", file=sys.stderr)
    rng_used = _rng_state() != rng_before
    if args.seedless and rng_used:
        print("error: a random number generator was consulted", file=sys.stderr)
        code = code or EXIT_NUMERIC
    counters = dict(counters)
    cache = _eigenmodes.cache_info()
    counters.update(
        {
            "wall_clock_s": round(time.perf_counter() - t0, 3),
            "eigensolves": cache.misses,
            "eigensolve_cache_hits": cache.hits,
            "warnings": sorted({f"{w.category.__name__}: {w.message}" for w in caught})[:50],
            "rng_consulted": rng_used,
            "exit_code": code,
        }
    )
    for w in caught:
        log.warning("%s: %s", w.category.__name__, w.message)
    cfg_echo = asdict(cfg)
    RunManifest(
        command=args.command,
        config=cfg_echo,
        sigma3_provenance=cfg.sigma3_model().provenance,
        outputs=list(outputs),
        counters=counters,
        input_digests=input_digests(cfg),
        conventions=CONVENTIONS,
    ).write(out)
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
