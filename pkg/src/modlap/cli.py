"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis, io as mio, signal, structure
from .lattice import (DIAG, ModulusSchedule, iterate, make_seed, parse_schedule,
                      stencil_by_name, stencil_from_mask)

log = logging.getLogger("modlap")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_RENDER_EXT = {"ascii": ".txt", "pgm": ".pgm", "ppm": ".ppm"}


class UsageError(Exception):
    pass


# option name -> (default, converter); None default means "not set"
_SETTINGS = {
    "seed": ("1", str),
    "nbhd": ("diag", str),
    "sched": ("2222", str),
    "steps": (None, int),
    "cell": ("0,0", str),
    "adjacency": (8, int),
    "density_mode": ("paper", str),
    "seed_side": (3, int),
}


def _parse_seed(spec: str):
    s = spec.strip()
    if s and all(ch.isdigit() or ch == "/" for ch in s):
        return make_seed(s)
    path = Path(s[1:] if s.startswith("@") else s)
    if not path.is_file():
        raise FileNotFoundError(f"seed file not found: {path}")
    return make_seed(path.read_text().splitlines())


def _parse_stencil(spec: str):
    try:
        return stencil_by_name(spec)
    except ValueError:
        path = Path(spec)
        if not path.is_file():
            raise UsageError(f"unknown neighborhood {spec!r} (and no such mask file)") from None
        try:
            return stencil_from_mask(path.read_text().splitlines())
        except ValueError as exc:
            raise UsageError(f"bad neighborhood mask {spec!r}: {exc}") from None


def _parse_cell(spec: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in spec.split(","))
    except ValueError:
        raise UsageError(f"cell must be 'x,y', got {spec!r}") from None
    return x, y


def _int_list(spec: str) -> list[int]:
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {spec!r}") from None


def _resolve(args, default_steps: int):
    """Merge CLI flags over the config file over built-in defaults."""
    conf = mio.read_config(args.config) if getattr(args, "config", None) else {}
    opts = {}
    for key, (default, conv) in _SETTINGS.items():
        value = getattr(args, key, None)
        if value is None and key in conf:
            value = conf[key]
        if value is None:
            value = default_steps if key == "steps" else default
        try:
            opts[key] = conv(value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    if opts["steps"] < 0:
        raise UsageError("steps must be >= 0")
    try:
        opts["seed"] = _parse_seed(opts["seed"])
        opts["sched"] = parse_schedule(opts["sched"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opts["nbhd"] = _parse_stencil(opts["nbhd"])
    opts["cell"] = _parse_cell(opts["cell"])
    if opts["adjacency"] not in (4, 8):
        raise UsageError("adjacency must be 4 or 8")
    try:
        if opts["density_mode"] == "paper":
            opts["density_mode"] = analysis.DensityMode()
        else:
            opts["density_mode"] = analysis.DensityMode(opts["density_mode"], opts["seed_side"],
                                                        opts["nbhd"].radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return opts


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="KEY=VALUE file; explicit flags take precedence")
    p.add_argument("--seed", help="digit rows like 111/101/111, or a seed file path")
    p.add_argument("--nbhd", help="von-neumann, diag, moore, or a 0/1 mask file")
    p.add_argument("--sched", help="2222, 2322, 2n22:N, const:N or explicit:k1,k2,...")
    p.add_argument("--steps", type=int, help="number of iterations")
    p.add_argument("--cell", help="fixed lattice cell x,y for series (default 0,0)")


def cmd_run(args) -> int:
    o = _resolve(args, default_steps=8)
    steps = o["steps"]
    wanted = set(_int_list(args.snapshot_at)) if args.snapshot_at else {steps}
    if any(i < 0 or i > steps for i in wanted):
        raise UsageError("snapshot iterations must lie in [0, steps]")
    snap_dir = Path(args.snapshot_dir) if args.snapshot_dir else None
    render_dir = Path(args.render_dir) if args.render_dir else None
    for d in (snap_dir, render_dir):
        if d is not None:
            d.mkdir(parents=True, exist_ok=True)
    rows = []
    final = None
    for g in iterate(o["seed"], o["nbhd"], o["sched"], steps):
        if args.metrics:
            rows.append(analysis.grid_metrics(g, o["adjacency"], o["density_mode"],
                                              with_dimension=not args.no_dimension))
        if g.iteration in wanted:
            if snap_dir is not None:
                mio.write_snapshot(g, snap_dir / f"state_{g.iteration:04d}.snap")
            if render_dir is not None:
                for fmt in args.render_format:
                    blob = mio.render(g, fmt, args.scale)
                    (render_dir / f"state_{g.iteration:04d}{_RENDER_EXT[fmt]}").write_bytes(blob)
        final = g
    if args.metrics:
        mio.export_metrics_csv(rows, args.metrics)
    count, _ = analysis.connected_components(final, o["adjacency"])
    print(f"schedule={o['sched'].label} stencil={o['nbhd'].name} iteration={final.iteration} "
          f"size={final.width}x{final.height} occupied={final.occupied()} components={count} "
          f"density={mio.format_float(analysis.density(final, o['density_mode']))}")
    if args.print:
        sys.stdout.write(mio.render(final, "ascii").decode("utf-8"))
    return EXIT_OK


def cmd_series(args) -> int:
    o = _resolve(args, default_steps=500)
    states = iterate(o["seed"], o["nbhd"], o["sched"], o["steps"])
    series = signal.series_from_states(states, o["cell"])
    stats = {
        "schedule": o["sched"].label,
        "cell": f"{series.cell[0]},{series.cell[1]}",
        "length": len(series),
        "entropy_bits": signal.shannon_entropy(series),
        "mean": signal.mean(series),
        "variance": signal.variance(series),
    }
    spectrum = signal.dft_amplitude(series) if len(series) >= 4 else None
    if spectrum is not None:
        stats.update(dominant_bin=spectrum.dominant_bin,
                     peak_to_median=spectrum.peak_to_median, flatness=spectrum.flatness)
    try:
        acf = signal.autocorrelation(series, args.max_lag)
    except signal.DegenerateSeriesError:
        acf = None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mio.write_csv(out / "series.csv", ("iteration", "value"), enumerate(series.values))
    if spectrum is not None:
        mio.write_csv(out / "spectrum.csv", ("bin", "amplitude"),
                      ((k, float(a)) for k, a in enumerate(spectrum.amplitudes)))
    mio.write_csv(out / "acf.csv", ("lag", "r"),
                  [] if acf is None else ((k, float(r)) for k, r in enumerate(acf)))
    mio.write_csv(out / "stats.csv", ("key", "value"),
                  ((k, v) for k, v in stats.items()))
    for k, v in stats.items():
        print(f"{k}={mio.format_float(v) if isinstance(v, float) else v}")
    if acf is None:
        print("acf=degenerate (constant series)")
    return EXIT_OK


def _sierpinski_ok(report: structure.SierpinskiReport) -> bool:
    dims = report.dimensions()
    band = [d for i, d in dims.items() if i in (63, 127) and d is not None]
    in_band = any(1.4 <= d <= 1.7 for d in band) if band else True
    return in_band and all(c.d4_symmetric for c in report.checkpoints)


def cmd_verify(args) -> int:
    run_prop = args.proposition or not args.sierpinski
    run_sier = args.sierpinski or not args.proposition
    ledger = []
    if run_prop:
        want = {(0, 0), (16, 0), (0, 16), (16, 16)}
        bad = 0
        for seed in structure.all_binary_seeds(3):
            reports = structure.verify_dissociation(seed, args.kmax)
            first = reports[0]
            ok = (all(r.matched and r.gap >= 13 for r in reports) and first.gap == 13
                  and first.relative_offsets() == want
                  and analysis.density(_iterate_to(seed, 8)) <= 36 / 361)
            bad += not ok
        ledger.append(("proposition", bad == 0, f"511 seeds, k_max={args.kmax}, failures={bad}"))
        for name, seed in (("all-ones", "111/111/111"), ("x", "101/010/101"),
                           ("corner", "100/000/000")):
            for e in structure.appendix_trace(make_seed(seed)):
                ledger.append((f"trace:{name}:{e.step}", e.passed, e.detail))
    if run_sier:
        rep = structure.sierpinski_report(make_seed("1"), DIAG, args.sierpinski_kmax)
        for c in rep.checkpoints:
            dim = "" if c.box_dimension is None else f"{c.box_dimension:.4f}"
            ledger.append((f"sierpinski:i={c.iteration}", c.d4_symmetric,
                           f"dimension={dim} d4={c.d4_symmetric}"))
        ledger.append(("sierpinski:band[1.4,1.7]", _sierpinski_ok(rep), "at i=63 or i=127"))
    for name, ok, detail in ledger:
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    if args.out:
        mio.write_csv(args.out, ("check", "passed", "detail"),
                      ((n, int(ok), d) for n, ok, d in ledger))
    return EXIT_OK if all(ok for _, ok, _ in ledger) else EXIT_VERIFY


def _iterate_to(seed, i):
    *_, last = iterate(seed, DIAG, ModulusSchedule.constant(2), i)
    return last


def cmd_sweep(args) -> int:
    o = _resolve(args, default_steps=500)
    if o["steps"] < 100:
        raise UsageError("sweep needs --steps >= 100")
    header = ("schedule", "n", "entropy_bits", "mean", "variance", "dominant_bin",
              "peak_to_median", "flatness", "box_dimension", "final_density")
    rows = []
    for n in _int_list(args.ns):
        if n < 2:
            raise UsageError("schedule moduli must be >= 2")
        sched = ModulusSchedule.constant(2) if n == 2 else ModulusSchedule.two_n_two_two(n)
        st = signal.style_stats(o["seed"], o["nbhd"], sched, o["steps"], o["cell"])
        sp = st.spectrum
        rows.append((st.schedule, n, st.entropy, st.mean, st.variance, sp.dominant_bin,
                     sp.peak_to_median, sp.flatness, st.box_dimension, st.final_density))
    if args.out:
        mio.write_csv(args.out, header, rows)
    mio.write_csv(sys.stdout, header, rows)
    return EXIT_OK


def cmd_render(args) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for src in args.inputs:
        grid = mio.read_snapshot(src)
        blob = mio.render(grid, args.format, args.scale)
        if args.output and len(args.inputs) == 1:
            Path(args.output).write_bytes(blob)
        elif out_dir is not None:
            (out_dir / (Path(src).stem + _RENDER_EXT[args.format])).write_bytes(blob)
        else:
            sys.stdout.buffer.write(blob)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modlap",
                                     description="Modular Laplacian lattice dynamics toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve a seed and write snapshots, renders and metrics")
    _add_common(p)
    p.add_argument("--snapshot-dir")
    p.add_argument("--snapshot-at", help="comma-separated iterations (default: final only)")
    p.add_argument("--metrics", help="metrics CSV path (one row per iteration)")
    p.add_argument("--render-dir")
    p.add_argument("--render-format", nargs="+", choices=sorted(_RENDER_EXT), default=["pgm"])
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--adjacency", type=int, choices=(4, 8))
    p.add_argument("--density-mode", choices=("paper", "general"))
    p.add_argument("--seed-side", type=int)
    p.add_argument("--no-dimension", action="store_true", help="skip box counting in metrics")
    p.add_argument("--print", action="store_true", help="print the final figure as text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("series", help="fixed-cell series with entropy, spectrum and ACF CSVs")
    _add_common(p)
    p.add_argument("--out-dir", default="series_out")
    p.add_argument("--max-lag", type=int)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("verify", help="seed-copy sweep and Sierpinski checkpoints")
    p.add_argument("--proposition", action="store_true")
    p.add_argument("--sierpinski", action="store_true")
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--sierpinski-kmax", type=int, default=6)
    p.add_argument("--out", help="ledger CSV path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="fixed-cell statistics across 2n22 schedules")
    _add_common(p)
    p.add_argument("--ns", default="2,3,5,7,9")
    p.add_argument("--out", help="CSV path (also printed to stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="convert snapshots to text or PGM/PPM images")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=sorted(_RENDER_EXT), default="pgm")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("-o", "--output")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"modlap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, mio.SnapshotError) as exc:
        print(f"modlap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
