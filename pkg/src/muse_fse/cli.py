"""Command line front end.

    muse-fse pattern --width 512 --height 512 --out mask.pgm
    muse-fse conceal --input lena.pgm --reference lena.pgm --out out.pgm --trace trace.csv
    muse-fse bench --corpus images/ --out results/

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import DEFAULT_SWEEP, benchmark_image, load_corpus, synthetic_corpus
from .conceal import LossPattern, conceal_image, conceal_sequential
from .grid import ExtrapolationConfig
from .imageio import read_image, read_mask, write_mask, write_pgm
from .metrics import saturation_iterations

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

TRACE_HEADER = ["block_id", "iteration", "selected_count", "residual_energy", "psnr_db"]
TRACE_VERSION = "# muse-fse trace v1"
BENCH_HEADER = ["image", "method", "tau", "n_bf", "iterations", "saturation_iterations",
                "psnr_at_saturation", "saturation_psnr", "ratio"]
BENCH_VERSION = "# muse-fse bench v1"

# manifest defaults; flags override manifest entries, which override these
CONCEAL_DEFAULTS = {
    "input": None, "reference": None, "mask": None, "out": None, "trace": None,
    "report": None, "method": "muse", "iterations": 200, "gamma": 0.2, "rho_hat": 0.8,
    "tau": 0.9, "n_bf": 5, "concealed_weight": 0.5, "block_size": 16, "spacing": 64,
    "offset": [24, 24], "frame": 16, "jobs": 1,
}


class UsageError(Exception):
    pass


class IOFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.9g}"


def _read(reader, path):
    try:
        return reader(path)
    except (OSError, ValueError) as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _csv_text(version: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(version + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _add_pattern_args(p, defaults: bool):
    d = CONCEAL_DEFAULTS if defaults else {}
    p.add_argument("--block-size", type=int, default=d.get("block_size"))
    p.add_argument("--spacing", type=int, default=d.get("spacing"))
    p.add_argument("--offset", type=int, nargs=2, metavar=("ROW", "COL"),
                   default=d.get("offset"))
    p.add_argument("--frame", type=int, default=d.get("frame"),
                   help="width of the support frame around each block")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="muse-fse", description="Block-loss concealment by FSE and MuSE.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pattern", help="write an isolated block-loss mask")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    _add_pattern_args(p, defaults=True)
    p.add_argument("--allow-contiguous", action="store_true",
                   help="permit blocks whose support frames overlap other losses")
    p.add_argument("--out", required=True)

    p = sub.add_parser("conceal", help="conceal lost blocks of one image")
    p.add_argument("--manifest", help="JSON file with any of the options below")
    p.add_argument("--input")
    p.add_argument("--reference", help="original image, enables PSNR")
    p.add_argument("--mask", help="loss mask image (0 lost, 255 support); "
                                  "without it the block pattern options apply")
    _add_pattern_args(p, defaults=False)
    p.add_argument("--method", choices=["fse", "muse"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rho-hat", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--n-bf", type=int)
    p.add_argument("--concealed-weight", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--trace", help="per-iteration CSV")
    p.add_argument("--report", help="JSON summary")

    p = sub.add_parser("bench", help="FSE vs MuSE saturation benchmark")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="directory of clean PGM/PNG images")
    src.add_argument("--synthetic", type=int, metavar="COUNT",
                     help="generate COUNT synthetic images from --seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--rho-hat", type=float, default=0.8)
    p.add_argument("--sweep", default="0.9:5",
                   help="comma separated tau:n_bf pairs, or 'default' for the five-point sweep")
    _add_pattern_args(p, defaults=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _pattern(args) -> LossPattern:
    return LossPattern(args.block_size, args.spacing, tuple(args.offset), args.frame)


def cmd_pattern(args) -> int:
    pattern = _pattern(args)
    if not pattern.isolated and not args.allow_contiguous:
        raise UsageError(f"spacing {pattern.spacing} < block size + frame "
                         f"({pattern.block_size + pattern.frame}): blocks are not isolated; "
                         "pass --allow-contiguous to write it anyway")
    if args.width < 1 or args.height < 1:
        raise UsageError("width and height must be positive")
    lost = pattern.mask((args.height, args.width))
    try:
        write_mask(args.out, lost)
    except OSError as exc:
        raise IOFailure(f"cannot write {args.out}: {exc}") from exc
    print(f"{len(pattern.blocks((args.height, args.width)))} blocks -> {args.out}")
    return EXIT_OK


def resolve_manifest(args) -> dict:
    """Effective run settings: flags over manifest over defaults."""
    manifest = dict(CONCEAL_DEFAULTS)
    if args.manifest:
        try:
            loaded = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IOFailure(f"cannot read {args.manifest}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.manifest}: invalid JSON: {exc}") from exc
        unknown = set(loaded) - set(manifest)
        if unknown:
            raise UsageError(f"unknown manifest keys: {sorted(unknown)}")
        manifest.update(loaded)
    for key in CONCEAL_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            manifest[key] = value
    for key in ("input", "out"):
        if manifest[key] is None:
            raise UsageError(f"--{key} is required (flag or manifest)")
    return manifest


def cmd_conceal(args) -> int:
    m = resolve_manifest(args)
    try:
        config = ExtrapolationConfig(gamma=m["gamma"], rho_hat=m["rho_hat"],
                                     iterations=m["iterations"], tau=m["tau"], n_bf=m["n_bf"])
        pattern = LossPattern(m["block_size"], m["spacing"], tuple(m["offset"]), m["frame"])
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if m["jobs"] < 1:
        raise UsageError("--jobs must be positive")
    image = _read(read_image, m["input"])
    reference = _read(read_image, m["reference"]) if m["reference"] else None
    if reference is not None and reference.shape != image.shape:
        raise UsageError(f"reference shape {reference.shape} != input shape {image.shape}")
    if m["mask"]:
        lost = _read(read_mask, m["mask"])
        if lost.shape != image.shape:
            raise UsageError(f"mask shape {lost.shape} != input shape {image.shape}")
        if not 0 <= m["concealed_weight"] <= 1:
            raise UsageError("--concealed-weight must be in [0, 1]")
        out, report = conceal_sequential(image, lost, m["method"], config,
                                         m["concealed_weight"], m["block_size"], m["frame"],
                                         reference)
    else:
        out, report = conceal_image(image, pattern, m["method"], config, reference,
                                    jobs=m["jobs"])
    try:
        write_pgm(m["out"], out)
    except OSError as exc:
        raise IOFailure(f"cannot write {m['out']}: {exc}") from exc

    if m["trace"]:
        rows = []
        for block in report.blocks:
            if block.trace is None:
                continue
            for rec in block.trace:
                rows.append([block.block_id, rec.iteration, rec.selected_count,
                             fmt(rec.residual_energy), fmt(rec.psnr_db)])
        _write_text(m["trace"], _csv_text(TRACE_VERSION, TRACE_HEADER, rows))

    if m["report"]:
        blocks = []
        for b in report.blocks:
            entry = {"block_id": b.block_id, "origin": list(b.origin),
                     "psnr_db": b.psnr_db, "seconds": b.seconds,
                     "fallbacks": 0 if b.trace is None else sum(r.fallback for r in b.trace)}
            if reference is not None and b.trace is not None:
                entry["saturation_iterations"] = saturation_iterations(b.trace.psnr_curve)
            blocks.append(entry)
        summary = {"manifest": m, "aggregate_psnr": report.aggregate_psnr,
                   "seconds": report.seconds, "blocks": blocks}
        if reference is not None and report.blocks and config.iterations > 0:
            summary["saturation_iterations"] = report.saturation_iterations()
        _write_text(m["report"], json.dumps(summary, indent=2, default=_json_default) + "\n")
    if report.aggregate_psnr is not None:
        print(f"aggregate PSNR {report.aggregate_psnr:.2f} dB over {len(report.blocks)} blocks")
    return EXIT_OK


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(type(x))


def parse_sweep(text: str) -> tuple[tuple[float, int], ...]:
    if text == "default":
        return DEFAULT_SWEEP
    sweep = []
    try:
        for item in text.split(","):
            tau, n_bf = item.split(":")
            sweep.append((float(tau), int(n_bf)))
    except ValueError as exc:
        raise UsageError(f"bad --sweep {text!r}; expected tau:n_bf[,tau:n_bf...]") from exc
    return tuple(sweep)


def cmd_bench(args) -> int:
    sweep = parse_sweep(args.sweep)
    pattern = _pattern(args)
    for tau, n_bf in sweep:
        try:
            ExtrapolationConfig(gamma=args.gamma, rho_hat=args.rho_hat,
                                iterations=args.iterations, tau=tau, n_bf=n_bf)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if args.corpus:
        try:
            corpus = load_corpus(args.corpus)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        except OSError as exc:
            raise IOFailure(str(exc)) from exc
    else:
        if args.synthetic < 1:
            raise UsageError("--synthetic must be positive")
        corpus = synthetic_corpus(args.synthetic, args.seed)

    out = Path(args.out)
    curves = out / "curves"
    try:
        curves.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create {curves}: {exc}") from exc

    rows = []
    for name, image in corpus:
        result = benchmark_image(name, image, sweep, args.iterations, args.gamma,
                                 args.rho_hat, pattern, args.jobs)
        for r in [result.fse, *result.muse]:
            sat = r.saturation_iterations
            ratio = None if r.method == "fse" else result.ratio(r)
            rows.append([name, r.method, fmt(r.tau), "" if r.n_bf is None else r.n_bf,
                         args.iterations, sat, fmt(float(r.curve[sat - 1])),
                         fmt(r.saturation_psnr), fmt(ratio)])
            stem = f"{name}__{r.method}" if r.method == "fse" else \
                f"{name}__muse_tau{r.tau:g}_nbf{r.n_bf}"
            _write_text(curves / f"{stem}.csv",
                        _csv_text("# muse-fse curve v1", ["iteration", "psnr_db"],
                                  [[i + 1, fmt(float(v))] for i, v in enumerate(r.curve)]))
        print(f"{name}: FSE {result.fse.saturation_iterations} it, " + ", ".join(
            f"MuSE({r.tau:g},{r.n_bf}) {r.saturation_iterations} it" for r in result.muse))
    _write_text(out / "saturation.csv", _csv_text(BENCH_VERSION, BENCH_HEADER, rows))
    return EXIT_OK


COMMANDS = {"pattern": cmd_pattern, "conceal": cmd_conceal, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"muse-fse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IOFailure as exc:
        print(f"muse-fse: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"muse-fse: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
