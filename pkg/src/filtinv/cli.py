"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure,
4 filter not invertible where an inverse was required.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import imaging_io as io
from .charpoly import Filter, decompose
from .deconv1d import DeconvOptions, Deconvolver, _factor_summary, build_inverse, resolution_report
from .elementary import DEFAULT_EPS_TRUNC, FactorClass, pseudo_inverse
from .exceptions import (
    FiltinvError,
    InputError,
    NotInvertibleError,
    NumericalError,
    UseKernelPathError,
)
from .rl_baseline import DEFAULT_ITERATIONS, RLOptions, compare_methods, richardson_lucy
from .separable2d import Kernel2D, SeparableDeconvolver, blur2d
from .signal import Image, Sequence

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_NOT_INVERTIBLE = 0, 2, 3, 4

DEMOS = ("checkerboard-invertible", "checkerboard-noise", "checkerboard-gaussian")
INVERTIBLE_DEMO_FILTER = (1.0, 2.3, 1.0)
GAUSSIAN_DEMO_SIGMA, GAUSSIAN_DEMO_RADIUS = 1.5, 2
DEFAULT_NOISE_SIGMA = 0.05


def _emit(args, obj: dict, lines: list[str]) -> None:
    if args.json:
        sys.stdout.write(io.dumps_json(obj))
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _fmt_p(p) -> str:
    if isinstance(p, list):
        return f"{p[0]:.10g}{p[1]:+.10g}j"
    return f"{p:.10g}"


def _factor_lines(factors: list[dict]) -> list[str]:
    lines = [f"  {'k':>3}  {'p':>28}  class"]
    for k, f in enumerate(factors, 1):
        lines.append(f"  {k:>3}  {_fmt_p(f['p']):>28}  {f['class']}")
    return lines


def _options(args) -> DeconvOptions:
    return DeconvOptions(eps_trunc=args.eps_trunc, boundary=args.boundary)


# --- subcommands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    f = io.read_filter(args.filter)
    d = decompose(f)
    length = args.length if args.length is not None else 2 * f.order + 1
    rep = resolution_report(d, length)
    obj = {
        "coefficients": [float(c) for c in f.coeffs],
        "gain": d.gain,
        "residual": d.residual,
        "factors": rep.factors,
        "invertibleCount": rep.invertible_count,
        "noninvertibleCount": rep.noninvertible_count,
        "lengthLoss": rep.length_loss,
        "signalLength": rep.signal_length,
        "nyquistBefore": None if rep.nyquist_before is None else str(rep.nyquist_before),
        "nyquistAfter": None if rep.nyquist_after is None else str(rep.nyquist_after),
        "degenerate": rep.degenerate,
    }
    lines = [f"filter order N = {f.order}, gain = {d.gain:.17g}", "factors:"]
    lines += _factor_lines(rep.factors)
    lines += [
        f"invertible: {rep.invertible_count}  non-invertible: {rep.noninvertible_count}",
        f"lengthLoss: {rep.length_loss}",
        f"nyquist (length {length}): {obj['nyquistBefore']} -> {obj['nyquistAfter']}"
        + ("  [degenerate]" if rep.degenerate else ""),
    ]
    _emit(args, obj, lines)
    return EXIT_OK


def cmd_invert(args) -> int:
    f = io.read_filter(args.filter)
    d = decompose(f)
    if args.pseudo_length is not None:
        if d.order != 1 or d.factors[0].klass is not FactorClass.OSCILLATORY:
            raise UseKernelPathError("a pseudo-inverse exists only for a single elementary factor with |p| < 2")
        inv = pseudo_inverse(d.factors[0].p.real, args.pseudo_length)
        inv = type(inv)(Sequence(inv.z.values / d.gain, inv.z.origin), inv.truncation_bound, inv.pseudo, inv.params)
    else:
        inv = build_inverse(d, args.eps_trunc)
    obj = io.inverse_to_obj(inv)
    if args.out:
        io.write_json(args.out, obj)
    lines = [
        f"{'pseudo-inverse' if inv.pseudo else 'inverse'}: {len(inv)} taps, support +/-{inv.support}",
        f"z(0) = {inv.z.at(0):.17g}",
        f"truncation bound = {inv.truncation_bound:.3g}",
    ]
    if args.out:
        lines.append(f"written to {args.out}")
    _emit(args, obj, lines)
    return EXIT_OK


def cmd_deconv(args) -> int:
    y = io.read_signal_csv(args.signal, origin=args.origin)
    dec = Deconvolver(io.read_filter(args.filter), _options(args))
    if args.require_invertible and dec.m:
        raise NotInvertibleError([f.value for f in dec.decomposition.factors if not f.klass.invertible])
    truth = io.read_signal_csv(args.truth, origin=args.origin) if args.truth else None
    out, rep = dec.apply(y, truth)
    io.write_signal_csv(args.out, out)
    obj = rep.to_dict()
    obj["outputStart"] = out.start
    lines = [
        f"restored {len(out)} of {len(y)} samples (t = {out.start} .. {out.stop - 1}) -> {args.out}",
        f"lengthLoss: {rep.length_loss}  partial: {rep.partial}",
    ]
    if rep.interior_rms is not None:
        lines.append(f"interior RMS vs truth: {rep.interior_rms:.6g}")
    _emit(args, obj, lines)
    return EXIT_OK


def _read_kernel_args(args) -> Kernel2D:
    if args.kernel:
        return io.read_kernel(args.kernel)
    if args.cs and args.ct:
        return Kernel2D.outer(io.read_filter(args.cs), io.read_filter(args.ct))
    raise InputError("give a 2D kernel file or both --cs and --ct filter files")


def cmd_deconv2d(args) -> int:
    img = io.read_pgm(args.image)
    k = _read_kernel_args(args)
    dec = SeparableDeconvolver(k, _options(args))
    if args.require_invertible and (dec.row_deconvolver.m or dec.column_deconvolver.m):
        raise NotInvertibleError(
            [f.value for d in (dec.column_deconvolver, dec.row_deconvolver) for f in d.decomposition.factors if not f.klass.invertible]
        )
    truth = io.read_pgm(args.truth) if args.truth else None
    out, rep = dec.apply(img, truth)
    io.write_pgm(args.out, out, maxval=args.maxval)
    obj = rep.to_dict()
    lines = [
        f"restored {out.width}x{out.height} from {img.width}x{img.height} -> {args.out}",
        f"lengthLoss (rows, columns): {rep.length_loss}  partial: {rep.partial}",
    ]
    if rep.interior_rms is not None:
        lines.append(f"interior RMS vs truth: {rep.interior_rms:.6g}")
    _emit(args, obj, lines)
    return EXIT_OK


def cmd_rl(args) -> int:
    img = io.read_pgm(args.image)
    psf = io.read_kernel(args.psf)
    opts = RLOptions(iterations=args.iterations, boundary=args.boundary)
    out = richardson_lucy(img, psf.matrix, opts)
    io.write_pgm(args.out, out, maxval=args.maxval)
    obj = {"iterations": opts.iterations, "boundary": opts.boundary.value, "out": str(args.out)}
    _emit(args, obj, [f"{opts.iterations} Richardson-Lucy iterations -> {args.out}"])
    return EXIT_OK


def demo_kernel(name: str) -> Kernel2D:
    if name == "checkerboard-gaussian":
        g = io.gaussian_filter(GAUSSIAN_DEMO_SIGMA, GAUSSIAN_DEMO_RADIUS)
        return Kernel2D.outer(g, g).normalized()
    return Kernel2D.outer(INVERTIBLE_DEMO_FILTER, INVERTIBLE_DEMO_FILTER).normalized()


def run_demo(name: str, size: int, tile: int, seed: int, noise_sigma: float | None,
             iterations: int, options: DeconvOptions, out_dir, timings: bool = False, maxval: int = 255) -> dict:
    """Blur a checkerboard, restore it both ways and write the four images plus ``comparison.json``."""
    if name not in DEMOS:
        raise InputError(f"unknown demo {name!r}; expected one of {list(DEMOS)}")
    if noise_sigma is None:
        noise_sigma = DEFAULT_NOISE_SIGMA if name == "checkerboard-noise" else 0.0
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    truth = io.checkerboard(size, size, tile)
    k = demo_kernel(name)
    blurred = blur2d(truth, k, options.boundary)
    if noise_sigma > 0:
        noisy = io.add_gaussian_noise(blurred, io.NoiseSpec(noise_sigma, seed))
        # intensities are nonnegative; RL needs that too
        blurred = Image(np.maximum(noisy.pixels, 0.0))
    cmp = compare_methods(truth, blurred, k, RLOptions(iterations=iterations, boundary=options.boundary), options)

    for fname, img in (("original", truth), ("blurred", blurred), ("direct", cmp.direct), ("rl", cmp.rl)):
        io.write_pgm(out_dir / f"{fname}.pgm", img, maxval=maxval)
    record = {
        "demo": name,
        "size": size,
        "tile": tile,
        "seed": seed,
        "noiseSigma": noise_sigma,
        "kernel": k.matrix.tolist(),
    }
    record.update(cmp.to_dict(runtimes=timings))
    io.write_json(out_dir / "comparison.json", record)
    return record


def cmd_demo(args) -> int:
    out = args.out or Path("demo-out") / args.name
    record = run_demo(
        args.name, args.size, args.tile, args.seed, args.noise_sigma,
        args.iterations, _options(args), out, args.timings, args.maxval,
    )
    lines = [
        f"{args.name}: {args.size}x{args.size}, tile {args.tile}, noise sigma {record['noiseSigma']}",
        f"  rmsBlurred {record['rmsBlurred']:.6g}",
        f"  rmsDirect  {record['rmsDirect']:.6g}",
        f"  rmsRL      {record['rmsRL']:.6g}  ({record['iterations']} iterations)",
        f"files written to {out}",
    ]
    _emit(args, record, lines)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report instead of a table")
    common.add_argument("--eps-trunc", type=float, default=DEFAULT_EPS_TRUNC, help="inverse tail cut-off")
    common.add_argument("--boundary", choices=["reflect", "zero", "periodic"], default="reflect")

    parser = argparse.ArgumentParser(prog="filtinv", description="Direct deconvolution with symmetric filters.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="factor a filter and classify its factors")
    p.add_argument("filter", help="filter JSON")
    p.add_argument("--length", type=int, help="signal length for the resolution summary")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("invert", parents=[common], help="write the inverse (or pseudo-inverse) filter")
    p.add_argument("filter")
    p.add_argument("--out", help="inverse JSON path")
    p.add_argument("--pseudo-length", type=int, help="half length of a pseudo-inverse for |p| < 2")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("deconv", parents=[common], help="deconvolve a 1D CSV signal")
    p.add_argument("signal")
    p.add_argument("filter")
    p.add_argument("--out", required=True)
    p.add_argument("--origin", type=int, default=0, help="index of t = 0 in the CSV")
    p.add_argument("--truth", help="reference signal for the interior RMS")
    p.add_argument("--require-invertible", action="store_true", help="exit 4 instead of using the kernel path")
    p.set_defaults(func=cmd_deconv)

    p = sub.add_parser("deconv2d", parents=[common], help="deconvolve a PGM with a separable kernel")
    p.add_argument("image")
    p.add_argument("kernel", nargs="?", help="2D kernel JSON")
    p.add_argument("--cs", help="column filter JSON (alternative to a 2D kernel)")
    p.add_argument("--ct", help="row filter JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="reference PGM for the interior RMS")
    p.add_argument("--maxval", type=int, default=255)
    p.add_argument("--require-invertible", action="store_true")
    p.set_defaults(func=cmd_deconv2d)

    p = sub.add_parser("rl", parents=[common], help="Richardson-Lucy deconvolution of a PGM")
    p.add_argument("image")
    p.add_argument("psf", help="2D kernel JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--maxval", type=int, default=255)
    p.set_defaults(func=cmd_rl)

    p = sub.add_parser("demo", parents=[common], help="checkerboard experiments")
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--tile", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=None, help=f"default {DEFAULT_NOISE_SIGMA} for checkerboard-noise, else 0")
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--out", type=Path, help="output directory (default demo-out/NAME)")
    p.add_argument("--maxval", type=int, default=255)
    p.add_argument("--timings", action="store_true", help="add wall-clock runtimes to comparison.json")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotInvertibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    except UseKernelPathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, FiltinvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
