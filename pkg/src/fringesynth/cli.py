"""Command-line front end: synth, pattern, simulate, analyze.

Every command writes its artifacts plus a ``manifest.json`` into ``--out``.
Failures exit non-zero and print one JSON object ``{"error": <category>,
"message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from . import formats
from .analysis import fit_amplitude, fringe_period, phases_per_fringe, visibility
from .compiler import compile_settings, expand_roots, factor_state, rootset_from_settings
from .errors import FringeSynthError, InsufficientFringesError, InvalidInputError
from .fourier import (
    SmoothingMode,
    TargetKind,
    apply_smoothing,
    builtin_coefficients,
    coefficients_from_samples,
)
from .model import DEFAULT_ALPHA, Pattern, PhaseGrid, SourceConfig, ideal_pattern, product_pattern
from .simul import NoiseConfig, multiply_counts, simulate_counts

DEFAULT_POINTS = 215

EXIT_CODES = {
    "invalid_input": 3,
    "format_error": 4,
    "no_convergence": 5,
    "insufficient_fringes": 6,
}

TARGETS = ("rect", "saw", "noon", "file")


# ---------------------------------------------------------------------------
# helpers


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(args, out: Path, inputs: List[str], config: Optional[dict] = None, seed=None) -> None:
    data = {
        "command": args.command,
        "argv": list(args.argv),
        "inputs": inputs,
        "config": config,
        "config_digest": formats.config_digest(config) if config is not None else None,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "tool_version": __version__,
    }
    formats.write_json(out / "manifest.json", data)


def _target_spec(args):
    target = args.target_opt or args.target
    n = args.n_opt if args.n_opt is not None else args.n
    return target, n


def _coefficients(args):
    """Coefficient vector for a target given on the command line."""
    target, n = _target_spec(args)
    if target not in TARGETS:
        raise InvalidInputError(f"target must be one of {TARGETS}, got {target!r}")
    if n is None:
        raise InvalidInputError("photon number N is required (positional or --n)")
    if target == "file":
        if not args.samples:
            raise InvalidInputError("target 'file' needs --samples <csv>")
        coeffs = coefficients_from_samples(formats.read_samples(args.samples), n)
    else:
        kind = {"rect": TargetKind.RECT, "saw": TargetKind.SAW_SQRT, "noon": TargetKind.NOON}[target]
        coeffs = builtin_coefficients(kind, n)
    return apply_smoothing(coeffs, SmoothingMode(args.smoothing))


def _rootset(args, inputs: List[str]):
    """Root set from --roots, --settings, or a built-in target, in that order of preference."""
    if getattr(args, "roots", None):
        inputs.append(args.roots)
        return formats.read_roots(args.roots)
    if getattr(args, "settings", None):
        inputs.append(args.settings)
        return rootset_from_settings(formats.read_settings(args.settings))
    if getattr(args, "samples", None):
        inputs.append(args.samples)
    return factor_state(_coefficients(args))


def _grid(args) -> PhaseGrid:
    if args.points is None or args.points <= 0:
        raise InvalidInputError(f"--points must be positive, got {args.points}")
    return PhaseGrid.uniform(args.points)


def _print_settings(settings) -> None:
    print(f"{'n':>3}  {'rho_deg':>8}  {'theta_deg':>9}  {'norm':>8}")
    for k, s in enumerate(settings, start=1):
        print(f"{k:>3}  {s.rho_deg:8.2f}  {s.theta_deg:9.2f}  {s.norm:8.5f}")


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    out = _out_dir(args)
    coeffs = _coefficients(args)
    rs = factor_state(coeffs)
    settings = compile_settings(rs)
    formats.write_coefficients(out / "coefficients.csv", coeffs)
    formats.write_roots(out / "roots.json", out / "roots.csv", rs)
    formats.write_settings_csv(out / "settings.csv", settings)
    formats.write_settings_json(out / "settings.json", settings)
    _manifest(args, out, [args.samples] if args.samples else [])
    target, n = _target_spec(args)
    print(f"# {target} N={n} smoothing={args.smoothing}: {len(settings)} projectors")
    _print_settings(settings)
    return 0


def cmd_pattern(args) -> int:
    out = _out_dir(args)
    inputs: List[str] = []
    rs = _rootset(args, inputs)
    if args.roots or args.settings:
        coeffs = expand_roots(rs)
    else:
        coeffs = _coefficients(args)
    grid = _grid(args)
    src = SourceConfig(rs.N, args.alpha)
    ideal = ideal_pattern(coeffs, grid, src)
    prod = product_pattern(rs, grid, src)
    fit = fit_amplitude(ideal, prod)
    formats.write_pattern(
        out / "pattern.csv",
        ideal,
        extra={"product": prod.values, "product_aligned": fit.amplitude * prod.values},
    )
    _manifest(args, out, inputs, {"alpha": args.alpha, "points": args.points})
    rel = np.max(np.abs(ideal.values - fit.amplitude * prod.values)) / max(np.max(ideal.values), 1e-300)
    print(f"wrote {out / 'pattern.csv'}: {len(grid)} points, N={rs.N}, "
          f"max relative deviation between forms {rel:.2e}")
    return 0


def _noise_config(args) -> NoiseConfig:
    cfg = formats.read_noise_config(args.config) if args.config else NoiseConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    inputs: List[str] = []
    rs = _rootset(args, inputs)
    if args.config:
        inputs.append(args.config)
    cfg = _noise_config(args)
    grid = _grid(args)
    src = SourceConfig(rs.N, args.alpha)
    records = simulate_counts(rs, grid, src, cfg)
    formats.write_counts(out / "counts.csv", records)
    pattern = multiply_counts(records)
    formats.write_pattern(out / "multiplied.csv", pattern)
    config = cfg.to_dict()
    config.update(alpha=args.alpha, points=args.points)
    _manifest(args, out, inputs, config, cfg.seed)
    print(f"wrote {out / 'counts.csv'} ({len(records)} records) and {out / 'multiplied.csv'}")
    return 0


def _model_pattern(args, measured: Pattern) -> Optional[Pattern]:
    target, n = _target_spec(args)
    if target is None and not args.roots and not args.settings:
        return None
    inputs: List[str] = []
    rs = _rootset(args, inputs)
    coeffs = expand_roots(rs) if (args.roots or args.settings) else _coefficients(args)
    grid = PhaseGrid(measured.grid.phis)
    src = SourceConfig(rs.N, DEFAULT_ALPHA)
    at_actual = ideal_pattern(coeffs, PhaseGrid(np.unique(measured.phases)), src)
    values = np.interp(measured.phases, at_actual.grid.phis, at_actual.values)
    return Pattern(grid, values, log10_scale=at_actual.log10_scale)


def _gnuplot_script(csv_name: str, has_model: bool) -> str:
    lines = [
        "# gnuplot script; run: gnuplot -p plot.gp",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'phi (rad)'",
        "set ylabel 'value'",
    ]
    plot = f"plot '{csv_name}' using 1:2 with linespoints pt 7 ps 0.5"
    if has_model:
        plot += f", '{csv_name}' using 1:3 with lines dt 2"
    lines.append(plot)
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    out = _out_dir(args)
    src_path = args.input
    if formats.is_counts_file(src_path):
        measured = multiply_counts(formats.read_counts(src_path))
    else:
        measured = formats.read_pattern(src_path)
    report = visibility(measured, args.prominence)
    result = {"input": src_path, "points": len(measured.grid), "visibility": report.to_dict()}

    model = _model_pattern(args, measured)
    try:
        period = fringe_period(model if model is not None else measured)
    except InsufficientFringesError as exc:
        period = None
        result["period_note"] = str(exc)
    result["fringe_period_rad"] = period
    result["samples_per_fringe"] = phases_per_fringe(measured, period) if period else None
    if measured.zero_count is not None:
        result["zero_count_points"] = int(np.count_nonzero(measured.zero_count))

    columns = {}
    if model is not None:
        fit = fit_amplitude(measured, model)
        scale = float(np.sqrt(np.mean(model.values**2)))
        result["fit"] = {
            "amplitude": fit.amplitude,
            "log10_scale": fit.log10_scale,
            "residual_rms": fit.residual_rms,
            "relative_residual": fit.residual_rms / (fit.amplitude * scale) if fit.amplitude and scale else None,
        }
        columns["model_fit"] = fit.amplitude * model.values
    formats.write_pattern(out / "analysis.csv", Pattern(measured.grid, measured.values,
                                                         log10_scale=measured.log10_scale,
                                                         phi_actual=measured.phi_actual), columns)
    (out / "plot.gp").write_text(_gnuplot_script("analysis.csv", model is not None))
    formats.write_json(out / "report.json", result)
    _manifest(args, out, [src_path])

    print(f"{'fringe':>6}  {'phi_min':>8}  {'phi_max':>8}  {'visibility':>10}")
    for k, (a, b, v) in enumerate(report.fringes, start=1):
        print(f"{k:>6}  {a:8.4f}  {b:8.4f}  {v:10.4f}")
    if report.fringes:
        print(f"v_min {report.v_min:.4f}  v_max {report.v_max:.4f}  v_mean {report.v_mean:.4f}")
    else:
        print("no fringes (monotonic pattern)")
    if period:
        print(f"fringe period {period:.6g} rad, {result['samples_per_fringe']:.3g} samples per fringe")
    if "fit" in result:
        print(f"fit amplitude {result['fit']['amplitude']:.6g}, "
              f"relative residual {result['fit']['relative_residual']:.3g}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_target(p, positional: bool = True) -> None:
    if positional:
        p.add_argument("target", nargs="?", choices=TARGETS, help="built-in target or 'file'")
        p.add_argument("n", nargs="?", type=int, help="photon number N")
    p.add_argument("--target", dest="target_opt", choices=TARGETS)
    p.add_argument("--n", dest="n_opt", type=int)
    p.add_argument("--smoothing", choices=[m.value for m in SmoothingMode], default="none")
    p.add_argument("--samples", help="CSV of (phi, Re g[, Im g]) for target 'file'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fringesynth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="expand, factor and compile projector settings")
    _add_target(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pattern", help="ideal and product-form patterns")
    _add_target(p)
    p.add_argument("--settings", help="settings CSV/JSON from synth")
    p.add_argument("--roots", help="roots.json from synth")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("simulate", help="Monte-Carlo counting experiment")
    _add_target(p)
    p.add_argument("--settings", help="settings CSV/JSON from synth")
    p.add_argument("--roots", help="roots.json from synth")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--config", help="noise configuration JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="visibility report of a pattern or counts CSV")
    p.add_argument("input", help="pattern CSV or counts CSV")
    _add_target(p, positional=False)
    p.add_argument("--settings", help="model from a settings file")
    p.add_argument("--roots", help="model from a roots file")
    p.add_argument("--prominence", type=float, default=0.0,
                   help="ignore extrema less prominent than this fraction of the range")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_analyze, target=None, n=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except FringeSynthError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
