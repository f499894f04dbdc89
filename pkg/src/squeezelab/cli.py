"""Command-line front end: experiment orchestration, CSV/JSON/SVG emission.

Subcommands map one-to-one onto the library's reproduction targets:
parametric ellipses, squeezing-angle noise maps, atom-number sweeps, joint
measurement distributions, Monte Carlo shot histograms, Allan-deviation
runs and the single-ensemble phase-sensitivity study.

Exit status: 0 success, 2 usage error, 3 resource-limit error,
4 numerical/singular-configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

_ANGLE_RE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*(pi)?\s*(?:/\s*(\d*\.?\d+))?\s*$")

_CONFIG_KEYS = ("n_atoms", "phi", "delta_eff", "t_free", "t_cycle", "contrast",
                "omega0", "n_alpha", "n_beta")


def parse_angle(text: str) -> float:
    """Angles in radians; 'pi' shorthand accepted ('pi/4', '1.016pi', '3pi/16')."""
    match = _ANGLE_RE.match(text)
    if not match or (not match.group(1) and not match.group(2)):
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}")
    coefficient, pi_part, divisor = match.groups()
    value = float(coefficient) if coefficient not in ("", "+", "-") else float(coefficient + "1")
    if pi_part:
        value *= math.pi
    if divisor:
        value /= float(divisor)
    return value


def parse_angle_list(text: str) -> list[float]:
    return [parse_angle(token) for token in text.split(",") if token.strip()]


def parse_int_list(text: str) -> list[int]:
    return [int(token) for token in text.split(",") if token.strip()]


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 256x256, got {text!r}") from exc


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a JSON object")
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
    return data


def _resolve(flag_value, config: dict, key: str, default):
    """Precedence: command-line flag > config file > built-in default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _apply_thread_cap(threads: int | None) -> None:
    cap = threads
    if cap is None:
        env = os.environ.get("SQUEEZELAB_THREADS")
        cap = int(env) if env else None
    if cap is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMEXPR_NUM_THREADS"):
            os.environ[var] = str(cap)


def _prepare_out_dir(path_text: str) -> Path:
    out = Path(path_text)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output path not writable: {out} ({exc})") from exc
    return out


def _angles_for_kind(kind: str, n_atoms: int, grid_shape: tuple[int, int]):
    """Squeezing angles at the differential-noise minimum (css needs none)."""
    from .optimizer import AngleGrid, minimize_dpd

    if kind == "css":
        return None
    result = minimize_dpd(kind, n_atoms, AngleGrid(*grid_shape))
    return result


def _preparation(kind: str, min_result):
    from .twopixel import PreparationSpec

    if kind == "css":
        return PreparationSpec.css_spec()
    if kind == "sss1":
        return PreparationSpec.sss1_spec(min_result.alpha_star, min_result.beta_star)
    return PreparationSpec.sss2_spec(min_result.alpha_star, min_result.beta_star)


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_ellipse(args, config: dict) -> int:
    import numpy as np

    from . import __version__
    from .output import RunManifest, write_csv
    from .plotting import plot_ellipse
    from .ramsey import RamseyConfig, analytic_ellipse_point, ellipse_geometry, fit_ellipse
    from .sampler import SeededRng, sample_counts
    from .twopixel import PreparationSpec

    n = int(_resolve(args.n, config, "n_atoms", 50))
    contrast = float(_resolve(None, config, "contrast", 1.0))
    t_free = float(_resolve(None, config, "t_free", 1.0))
    deltas = args.delta_grid
    phis = np.arange(args.phi_steps) * (2.0 * math.pi / args.phi_steps)
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(
        command="ellipse",
        config={"n_atoms": n, "contrast": contrast, "t_free": t_free,
                "delta_grid": deltas, "phi_steps": args.phi_steps,
                "mc_shots": args.mc_shots},
        seed=args.seed, tool_version=__version__)

    curve_rows, geometry_rows, fit_rows = [], [], []
    curves, mc_points = {}, {}
    mc_rows = []
    for k, delta in enumerate(deltas):
        pts = np.array([analytic_ellipse_point(phi, delta, contrast) for phi in phis])
        curves[delta] = pts
        curve_rows.extend((delta, phi, p1, p2) for phi, (p1, p2) in zip(phis, pts))
        geo = ellipse_geometry(delta, contrast)
        geometry_rows.append((delta, geo.a, geo.b, geo.e, geo.orientation))
        samples = pts
        if args.mc_shots > 0:
            rng = SeededRng(args.seed, stream=k)
            sampled = []
            for j, phi in enumerate(phis):
                cfg = RamseyConfig(n_atoms=n, preparation=PreparationSpec.css_spec(),
                                   phi=float(phi), delta_eff=delta / t_free, t_free=t_free)
                m1, m2 = sample_counts(cfg, args.mc_shots, rng.substream(j))
                sampled.append((float(np.mean(m1)) / n, float(np.mean(m2)) / n))
            sampled = np.array(sampled)
            mc_points[delta] = sampled
            mc_rows.extend((delta, phi, p1, p2) for phi, (p1, p2) in zip(phis, sampled))
            samples = sampled
        fitted = fit_ellipse(samples)
        fit_rows.append((delta, fitted.a, fitted.b, fitted.e, fitted.orientation))

    write_csv(manifest.add_output(out / "ellipse_curves.csv"),
              ["delta", "phi", "p1_frac", "p2_frac"], curve_rows)
    write_csv(manifest.add_output(out / "ellipse_geometry.csv"),
              ["delta", "a", "b", "e", "orientation"], geometry_rows)
    write_csv(manifest.add_output(out / "ellipse_fit.csv"),
              ["delta", "a", "b", "e", "orientation"], fit_rows)
    if mc_rows:
        write_csv(manifest.add_output(out / "ellipse_montecarlo.csv"),
                  ["delta", "phi", "p1_frac", "p2_frac"], mc_rows)
    plot_ellipse(manifest.add_output(out / "ellipse.svg"), curves, mc_points or None)
    manifest.write(out)
    return 0


def _cmd_noise_map(args, config: dict) -> int:
    from . import __version__
    from .optimizer import AngleGrid, scan_noise_map
    from .output import RunManifest, write_csv
    from .plotting import plot_noise_maps

    n = int(_resolve(args.n, config, "n_atoms", 50))
    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="noise-map",
                           config={"kind": args.kind, "n_atoms": n,
                                   "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=None, tool_version=__version__)
    grid = AngleGrid(n_alpha, n_beta)
    noise = scan_noise_map(args.kind, n, grid)
    alphas, betas = grid.alphas(), grid.betas()
    rows = [(alphas[ia], betas[ib], noise.dp_total[ia, ib], noise.dp_pixel[ia, ib],
             noise.dp_d[ia, ib])
            for ia in range(n_alpha) for ib in range(n_beta)]
    write_csv(manifest.add_output(out / "noise_map.csv"),
              ["alpha", "beta", "dp_total", "dp_pixel", "dp_d"], rows)
    plot_noise_maps(manifest.add_output(out / "noise_map.svg"), alphas, betas,
                    {r"$\Delta P$": noise.dp_total, r"$\Delta P_k$": noise.dp_pixel,
                     r"$\Delta P_d$": noise.dp_d})
    manifest.write(out)
    return 0


def _cmd_sweep_n(args, config: dict) -> int:
    from . import __version__
    from .optimizer import AngleGrid, minimize_dpd
    from .output import RunManifest, write_csv, write_json
    from .plotting import plot_sweep

    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="sweep-n",
                           config={"kind": args.kind, "n_list": args.n_list,
                                   "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=None, tool_version=__version__)
    grid = AngleGrid(n_alpha, n_beta)
    rows, summary = [], []
    for n in args.n_list:
        res = minimize_dpd(args.kind, n, grid)
        rows.append((n, res.alpha_star, res.beta_star, res.value, res.ratio_to_css,
                     res.gain_db, res.time_reduction))
        summary.append({"n_atoms": n, "alpha_star": res.alpha_star,
                        "beta_star": res.beta_star, "min_dp_d": res.value,
                        "ratio_to_css": res.ratio_to_css, "gain_db": res.gain_db,
                        "time_reduction": res.time_reduction})
    write_csv(manifest.add_output(out / "sweep.csv"),
              ["n_atoms", "alpha_star", "beta_star", "min_dp_d", "ratio_to_css",
               "gain_db", "time_reduction"], rows)
    write_json(manifest.add_output(out / "sweep_summary.json"),
               {"kind": args.kind, "results": summary})
    plot_sweep(manifest.add_output(out / "sweep.svg"),
               [r[0] for r in rows], [r[4] for r in rows], args.kind)
    manifest.write(out)
    return 0


def _cmd_distribution(args, config: dict) -> int:
    from . import __version__
    from .output import RunManifest, write_csv, write_json
    from .plotting import plot_heatmap
    from .ramsey import free_evolution, second_pulse
    from .twopixel import joint_distribution, prepare

    n = int(_resolve(args.n, config, "n_atoms", 50))
    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="distribution",
                           config={"kind": args.kind, "n_atoms": n,
                                   "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=None, tool_version=__version__)
    min_result = _angles_for_kind(args.kind, n, (n_alpha, n_beta))
    spec = _preparation(args.kind, min_result)
    state = second_pulse(free_evolution(prepare(spec, n), math.pi / 2, 0.0))
    prob = joint_distribution(state)
    m = state.space.m_values
    rows = [(m[i], m[j], prob[i, j]) for i in range(len(m)) for j in range(len(m))]
    write_csv(manifest.add_output(out / "distribution.csv"), ["m1", "m2", "p"], rows)
    summary = {"kind": args.kind, "n_atoms": n}
    if min_result is not None:
        summary.update({"alpha_star": min_result.alpha_star,
                        "beta_star": min_result.beta_star,
                        "ratio_to_css": min_result.ratio_to_css})
    write_json(manifest.add_output(out / "distribution_summary.json"), summary)
    plot_heatmap(manifest.add_output(out / "distribution.svg"), m, prob,
                 f"measured p(M1, M2), {args.kind}, N={n}")
    manifest.write(out)
    return 0


def _cmd_montecarlo(args, config: dict) -> int:
    from . import __version__
    from .output import RunManifest, write_csv, write_json
    from .plotting import plot_histogram
    from .ramsey import RamseyConfig
    from .sampler import SeededRng, histogram, monte_carlo_ramsey

    n = int(_resolve(args.n, config, "n_atoms", 50))
    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    t_free = float(_resolve(None, config, "t_free", 1.0))
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="montecarlo",
                           config={"kind": args.kind, "n_atoms": n, "trials": args.trials,
                                   "t_free": t_free, "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=args.seed, tool_version=__version__)
    min_result = _angles_for_kind(args.kind, n, (n_alpha, n_beta))
    cfg = RamseyConfig(n_atoms=n, preparation=_preparation(args.kind, min_result),
                       t_free=t_free)
    shots = monte_carlo_ramsey(cfg, args.trials, SeededRng(args.seed))
    write_csv(manifest.add_output(out / "shots.csv"),
              ["m1", "m2", "p_d", "delta_est"],
              [(s.m1, s.m2, s.p_d, s.delta_est) for s in shots])
    hist = histogram([s.p_d for s in shots], 1.0)
    write_csv(manifest.add_output(out / "histogram.csv"), ["bin_center", "count"], hist)
    import numpy as np

    sample_std = float(np.std([s.p_d for s in shots], ddof=1))
    write_json(manifest.add_output(out / "montecarlo_summary.json"),
               {"kind": args.kind, "n_atoms": n, "trials": args.trials,
                "sample_std_p_d": sample_std})
    plot_histogram(manifest.add_output(out / "montecarlo.svg"),
                   [h[0] for h in hist], [h[1] for h in hist],
                   f"{args.kind}, N={n}, {args.trials} shots")
    manifest.write(out)
    return 0


def _cmd_allan(args, config: dict) -> int:
    from . import __version__
    from .allan import allan_deviation, analytic_allan, fit_white_noise, simulate_series
    from .output import RunManifest, write_csv, write_json
    from .plotting import plot_allan
    from .ramsey import OMEGA0_DEFAULT, RamseyConfig, free_evolution, second_pulse
    from .sampler import SeededRng
    from .twopixel import prepare, projection_stats

    n = int(_resolve(args.n, config, "n_atoms", 50))
    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    t_cycle = float(_resolve(args.t_cycle, config, "t_cycle", 1.0))
    t_free = float(_resolve(None, config, "t_free", min(1.0, t_cycle)))
    omega0 = float(_resolve(None, config, "omega0", OMEGA0_DEFAULT))
    delta_eff = float(_resolve(None, config, "delta_eff", 0.0))
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="allan",
                           config={"kind": args.kind, "n_atoms": n, "cycles": args.cycles,
                                   "t_free": t_free, "t_cycle": t_cycle, "omega0": omega0,
                                   "delta_eff": delta_eff,
                                   "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=args.seed, tool_version=__version__)
    min_result = _angles_for_kind(args.kind, n, (n_alpha, n_beta))
    cfg = RamseyConfig(n_atoms=n, preparation=_preparation(args.kind, min_result),
                       delta_eff=delta_eff, t_free=t_free, t_cycle=t_cycle, omega0=omega0)
    series = simulate_series(cfg, args.cycles, SeededRng(args.seed))
    ladder, block = [], 1
    while block <= args.cycles // 8:
        ladder.append(block)
        block *= 2
    curve = allan_deviation(series, ladder)
    fitted = fit_white_noise(curve)
    stats = projection_stats(second_pulse(free_evolution(
        prepare(cfg.preparation, n), cfg.phi, cfg.delta_phase)))
    analytic = analytic_allan(stats.dp_d, n, t_free, t_cycle, omega0)
    write_csv(manifest.add_output(out / "series.csv"), ["cycle", "delta_est"],
              list(enumerate(series.values)))
    write_csv(manifest.add_output(out / "allan_curve.csv"), ["tau_s", "sigma_y"],
              list(zip(curve.taus, curve.sigmas)))
    sql_dpd = math.sqrt(n / 2.0)
    ratio = stats.dp_d / sql_dpd
    write_json(manifest.add_output(out / "allan_summary.json"),
               {"kind": args.kind, "n_atoms": n, "cycles": args.cycles,
                "fitted_coefficient": fitted, "analytic_coefficient": analytic,
                "dp_d": stats.dp_d, "ratio_to_css": ratio,
                "gain_db": math.inf if ratio == 0 else 10.0 * math.log10(1.0 / ratio)})
    plot_allan(manifest.add_output(out / "allan.svg"), curve.taus, curve.sigmas,
               fitted, analytic)
    manifest.write(out)
    return 0


def _cmd_phase(args, config: dict) -> int:
    import numpy as np

    from . import __version__
    from .errors import SingularConfigurationError
    from .optimizer import (AngleGrid, minimize_phase_over_beta,
                            minimize_phase_sensitivity, phase_sensitivity)
    from .output import RunManifest, write_csv, write_json
    from .plotting import plot_phase

    n = int(_resolve(args.n, config, "n_atoms", 100))
    n_alpha, n_beta = args.grid or (int(_resolve(None, config, "n_alpha", 256)),
                                    int(_resolve(None, config, "n_beta", 256)))
    alpha = args.alpha
    out = _prepare_out_dir(args.out)
    manifest = RunManifest(command="phase",
                           config={"n_atoms": n, "alpha": alpha,
                                   "n_alpha": n_alpha, "n_beta": n_beta},
                           seed=None, tool_version=__version__)
    betas = np.arange(n_beta) * (2.0 * math.pi / n_beta)
    rows = []
    for beta in betas:
        try:
            value = phase_sensitivity(n, alpha, float(beta))
        except SingularConfigurationError:
            value = math.inf
        rows.append((float(beta), value, value * math.sqrt(n)))
    write_csv(manifest.add_output(out / "phase_curve.csv"),
              ["beta", "dphi", "dphi_over_sql"], rows)
    beta_star, fixed_min = minimize_phase_over_beta(n, alpha, n_beta)
    free_min = minimize_phase_sensitivity(n, AngleGrid(n_alpha, n_beta))
    write_json(manifest.add_output(out / "phase_summary.json"), {
        "n_atoms": n, "alpha": alpha,
        "fixed_alpha_min": {"beta_star": beta_star, "dphi": fixed_min,
                            "ratio_to_sql": fixed_min * math.sqrt(n),
                            "ratio_to_hl": fixed_min * n},
        "free_min": {"alpha_star": free_min.alpha_star, "beta_star": free_min.beta_star,
                     "dphi": free_min.value, "ratio_to_sql": free_min.ratio_to_sql,
                     "ratio_to_hl": free_min.ratio_to_hl},
    })
    plot_phase(manifest.add_output(out / "phase.svg"), [r[0] for r in rows],
               [r[1] for r in rows], n)
    manifest.write(out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeezelab",
        description="Synchronous differential Ramsey comparison simulator")
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded: bool = True, gridded: bool = True):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="JSON config file (flags take precedence)")
        p.add_argument("--threads", type=int,
                       help="cap BLAS parallelism (fallback: SQUEEZELAB_THREADS)")
        if seeded:
            p.add_argument("--seed", type=int, default=1, help="rng seed (default 1)")
        if gridded:
            p.add_argument("--grid", type=parse_grid,
                           help="angle grid as AxB (default 256x256)")

    p = sub.add_parser("ellipse", help="parametric excitation-fraction ellipses")
    p.add_argument("--n", type=int, help="atoms per pixel (default 50)")
    p.add_argument("--delta-grid", type=parse_angle_list,
                   default=[math.pi / 16, math.pi / 8, 3 * math.pi / 16, math.pi / 4],
                   help="comma-separated differential phases, e.g. pi/16,pi/8")
    p.add_argument("--phi-steps", type=int, default=64, help="pulse phases per curve")
    p.add_argument("--mc-shots", type=int, default=0,
                   help="Monte Carlo shots per phase for the symbol overlay")
    common(p, gridded=False)
    p.set_defaults(handler=_cmd_ellipse)

    p = sub.add_parser("noise-map", help="projection-noise maps over (alpha, beta)")
    p.add_argument("--kind", required=True, choices=("sss1", "sss2"))
    p.add_argument("--n", type=int, help="atoms per pixel (default 50)")
    common(p, seeded=False)
    p.set_defaults(handler=_cmd_noise_map)

    p = sub.add_parser("sweep-n", help="minimum differential noise vs atom number")
    p.add_argument("--kind", required=True, choices=("sss1", "sss2"))
    p.add_argument("--n-list", required=True, type=parse_int_list,
                   help="comma-separated atom numbers, e.g. 1,2,10,50")
    common(p, seeded=False)
    p.set_defaults(handler=_cmd_sweep_n)

    p = sub.add_parser("distribution", help="measured joint distribution p(M1, M2)")
    p.add_argument("--kind", required=True, choices=("css", "sss1", "sss2"))
    p.add_argument("--n", type=int, help="atoms per pixel (default 50)")
    common(p, seeded=False)
    p.set_defaults(handler=_cmd_distribution)

    p = sub.add_parser("montecarlo", help="single-shot sampling and P_d histogram")
    p.add_argument("--kind", required=True, choices=("css", "sss1", "sss2"))
    p.add_argument("--n", type=int, help="atoms per pixel (default 50)")
    p.add_argument("--trials", type=int, default=10000)
    common(p)
    p.set_defaults(handler=_cmd_montecarlo)

    p = sub.add_parser("allan", help="cycle series, Allan deviation and white-noise fit")
    p.add_argument("--kind", required=True, choices=("css", "sss1", "sss2"))
    p.add_argument("--n", type=int, help="atoms per pixel (default 50)")
    p.add_argument("--cycles", type=int, default=100000)
    p.add_argument("--t-cycle", type=float, help="cycle time in s (default 1)")
    common(p)
    p.set_defaults(handler=_cmd_allan)

    p = sub.add_parser("phase", help="single-ensemble phase sensitivity vs beta")
    p.add_argument("--n", type=int, help="ensemble size (default 100)")
    p.add_argument("--alpha", type=parse_angle, default=1.016 * math.pi,
                   help="twist angle (default 1.016pi)")
    common(p, seeded=False)
    p.set_defaults(handler=_cmd_phase)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "ellipse" and args.phi_steps < 4:
        parser.error("--phi-steps must be at least 4")
    if args.command == "montecarlo" and args.trials < 1:
        parser.error("--trials must be at least 1")
    if args.command == "allan" and args.cycles < 16:
        parser.error("--cycles must be at least 16")
    _apply_thread_cap(args.threads)

    from .errors import (EllipseFitError, ResourceLimitError,
                         SingularConfigurationError)

    try:
        config = _load_config(args.config)
        return args.handler(args, config)
    except ResourceLimitError as exc:
        print(f"squeezelab: resource limit: {exc}", file=sys.stderr)
        return 3
    except (SingularConfigurationError, EllipseFitError) as exc:
        print(f"squeezelab: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"squeezelab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"squeezelab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
