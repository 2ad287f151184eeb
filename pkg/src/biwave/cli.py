"""Command-line interface: ``biwave <subcommand> [options]``.

Exit codes: 0 success, 2 usage error, 3 invalid configuration or argument
value, 4 file error, 5 invalid input data.
"""

import argparse
import os
import sys

import numpy as np

from . import adaptive, carving, metrics, optics, patterns, phantoms, recon
from .config import ConfigError, RunConfig, parse_bits, parse_bits_list
from .io import atomic_write_text, load_image, write_pgm, write_raw_f64

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_IO, EXIT_DATA = 0, 2, 3, 4, 5


def _family(text):
    try:
        return patterns.PatternFamily.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise ConfigError(f"expected a positive integer, got {v}")
    return v


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _load_scene(path, n=None):
    scene = load_image(path)
    if scene.min() < 0 or scene.max() > 1:
        raise ValueError(f"{path}: scene values must lie in [0, 1]")
    if n is not None and scene.shape != (n, n):
        raise ConfigError(f"--n {n} does not match the {scene.shape} scene in {path}")
    return scene


def _detector(args):
    return optics.DetectorModel(
        bits=parse_bits(args.bits),
        full_scale=None if args.full_scale is None else _float(args.full_scale),
        noise_sigma=_float(args.noise),
        rng_seed=_int(args.seed),
        gain=args.gain,
    )


def cmd_phantom(args):
    p = phantoms.Phantom(phantoms.PhantomKind(args.kind), _float(args.duty), _positive_int(args.n), _int(args.seed), args.text)
    scene = phantoms.generate_phantom(p)
    write_pgm(args.out, (scene * 255).astype(np.uint8))
    print(f"duty_ratio={scene.mean():.6f}")


def cmd_basis(args):
    basis = patterns.make_basis(_family(args.family), _positive_int(args.n), _int(args.seed))
    lines = [patterns.to_rle_line(p) for p in basis]
    if args.pgm_dir:
        os.makedirs(args.pgm_dir, exist_ok=True)
        for p in basis:
            for tag, img in zip(("signed", "plus", "minus"), patterns.pattern_masks_u8(p)):
                write_pgm(os.path.join(args.pgm_dir, f"pattern_{p.index:06d}_{tag}.pgm"), img)
    atomic_write_text(args.out, "\n".join(lines) + "\n")


def cmd_simulate(args):
    scene = _load_scene(args.scene, None if args.n is None else _positive_int(args.n))
    basis = patterns.make_basis(_family(args.family), scene.shape[0], _int(args.seed))
    log = optics.acquire_full(scene, basis, _detector(args))
    log.write(args.out)
    print(f"measured={log.measured_count}")


def cmd_reconstruct(args):
    log = optics.AcquisitionLog.read(args.log)
    img = recon.reconstruct(log)
    write_pgm(args.out, img.values)
    if args.raw:
        write_raw_f64(args.raw, img.values)


def cmd_adaptive(args):
    scene = _load_scene(args.scene, None if args.n is None else _positive_int(args.n))
    basis = patterns.make_basis(_family(args.family), scene.shape[0], _int(args.seed))
    policy = adaptive.AdaptivePolicy(_float(args.tau), _float(args.eps))
    img, log = adaptive.run_adaptive(scene, basis, _detector(args), policy)
    if args.log:
        log.write(args.log)
    if args.out:
        write_pgm(args.out, img.values)
    print(adaptive.format_progress(adaptive.progress_rows(log, basis)))
    print(f"sampling_rate={adaptive.sampling_rate(log):.6f}")


def cmd_sweep(args):
    if args.scene:
        scene = _load_scene(args.scene)
    else:
        p = phantoms.Phantom(phantoms.PhantomKind(args.phantom), _float(args.duty), _positive_int(args.n), _int(args.seed), args.text)
        scene = phantoms.generate_phantom(p)
    fams = [_family(f) for f in args.families.split(",") if f.strip()]
    base = optics.DetectorModel(noise_sigma=_float(args.noise), gain=args.gain)
    result = metrics.dynamic_range_sweep(scene, fams, parse_bits_list(args.bits), base, seed=_int(args.seed))
    if args.out:
        atomic_write_text(args.out, result.to_csv())
    print(result.format_table() if args.table else result.to_csv(), end="\n" if args.table else "")


def cmd_ssim(args):
    x, y = load_image(args.x), load_image(args.y)
    span = float(y.max() - y.min())
    L = _float(args.L) if args.L != "auto" else (span if span > 0 else 1.0)
    params = metrics.SsimParams(L=L, window=args.window, size=_positive_int(args.size), sigma=_float(args.sigma))
    print(f"ssim={metrics.ssim(x, y, params):.12f}")


def cmd_carve(args):
    sil = carving.read_manifest(args.manifest)
    grid = carving.carve(sil, _positive_int(args.G), _float(args.extent))
    carving.export_voxels(grid, args.out, args.format)
    print(f"occupied={int(grid.occupancy.sum())} volume={grid.volume:.9g}")
    if grid.empty_views:
        print(f"empty_views={','.join(repr(a) for a in grid.empty_views)}")


def cmd_silhouettes(args):
    if args.shape == "sphere":
        shape = carving.Sphere(_float(args.r))
    else:
        try:
            a, b, c = (float(v) for v in args.size.split(","))
        except (AttributeError, ValueError):
            raise ConfigError("box needs --size a,b,c") from None
        shape = carving.Box(a, b, c)
    views = _positive_int(args.views)
    angles = [k * _float(args.step) for k in range(views)]
    sil = carving.synth_silhouettes(shape, angles, _positive_int(args.n), _float(args.extent))
    print(carving.write_silhouettes(sil, args.out_dir))


def build_parser():
    parser = argparse.ArgumentParser(prog="biwave", description="Bi-frequency Haar-wavelet ghost imaging simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.required_options = {}
    parser.subcommands = {}

    def add(name, func, help, required=()):
        p = sub.add_parser(name, help=help)
        parser.required_options[name] = required
        parser.subcommands[name] = p
        p.set_defaults(func=func)
        p.add_argument("--seed", default="0")
        p.add_argument("--config", help="key = value file supplying option defaults")
        return p

    def detector_opts(p):
        p.add_argument("--bits", default="unlimited")
        p.add_argument("--noise", default="0")
        p.add_argument("--full-scale", dest="full_scale", default=None)
        p.add_argument("--gain", choices=optics.GAIN_MODES, default="global")

    p = add("phantom", cmd_phantom, "generate a binary test scene", ("out",))
    p.add_argument("--kind", choices=[k.value for k in phantoms.PhantomKind], default="glyph")
    p.add_argument("--duty", default="0.015")
    p.add_argument("--n", default="512")
    p.add_argument("--text", default=None)
    p.add_argument("--out", default=None)

    p = add("basis", cmd_basis, "export a pattern basis", ("n", "out"))
    p.add_argument("--family", default="m")
    p.add_argument("--n", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--pgm-dir", dest="pgm_dir", default=None)

    p = add("simulate", cmd_simulate, "full acquisition of a scene", ("scene", "out"))
    p.add_argument("--scene", default=None)
    p.add_argument("--family", default="m")
    p.add_argument("--n", default=None)
    p.add_argument("--out", default=None)
    detector_opts(p)

    p = add("reconstruct", cmd_reconstruct, "reconstruct an image from a log", ("log", "out"))
    p.add_argument("--log", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--raw", default=None)

    p = add("adaptive", cmd_adaptive, "adaptive sub-Nyquist acquisition", ("scene",))
    p.add_argument("--scene", default=None)
    p.add_argument("--family", default="m")
    p.add_argument("--n", default=None)
    p.add_argument("--tau", default="0")
    p.add_argument("--eps", default="0")
    p.add_argument("--log", default=None)
    p.add_argument("--out", default=None)
    detector_opts(p)

    p = add("sweep", cmd_sweep, "SSIM versus detector bit depth")
    p.add_argument("--scene", default=None)
    p.add_argument("--phantom", choices=[k.value for k in phantoms.PhantomKind], default="glyph")
    p.add_argument("--duty", default="0.15")
    p.add_argument("--n", default="64")
    p.add_argument("--text", default="HELV")
    p.add_argument("--bits", default="1..16")
    p.add_argument("--families", default="biwave,hcgi,rcgi")
    p.add_argument("--noise", default="0")
    p.add_argument("--gain", choices=optics.GAIN_MODES, default="cluster")
    p.add_argument("--table", action="store_true")
    p.add_argument("--out", default=None)

    p = add("ssim", cmd_ssim, "SSIM between two PGM images")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--window", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--size", default="11")
    p.add_argument("--sigma", default="1.5")
    p.add_argument("--L", default="auto")

    p = add("carve", cmd_carve, "space carving from a silhouette manifest", ("manifest", "out"))
    p.add_argument("--manifest", default=None)
    p.add_argument("--G", default="128")
    p.add_argument("--extent", default="1.0")
    p.add_argument("--format", choices=("raw", "obj"), default="raw")
    p.add_argument("--out", default=None)

    p = add("silhouettes", cmd_silhouettes, "synthetic turntable silhouettes", ("out_dir",))
    p.add_argument("--shape", choices=("sphere", "box"), default="sphere")
    p.add_argument("--r", default="0.2")
    p.add_argument("--size", default=None)
    p.add_argument("--views", default="72")
    p.add_argument("--step", default="5")
    p.add_argument("--n", default="256")
    p.add_argument("--extent", default="1.0")
    p.add_argument("--out-dir", dest="out_dir", default=None)
    return parser


def _apply_config(parser, args, argv):
    """Re-parse with config-file values as defaults; CLI flags still win."""
    subparser = parser.subcommands[args.command]
    allowed = {a.dest for a in subparser._actions if a.dest not in ("help", "config", "func")}
    cfg = RunConfig.from_file(args.config, allowed)
    subparser.set_defaults(**cfg.settings)
    return parser.parse_args(argv)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        missing = [o for o in parser.required_options[args.command] if getattr(args, o) is None]
        if missing:
            print(f"biwave: error: missing required option(s): {', '.join('--' + o.replace('_', '-') for o in missing)}", file=sys.stderr)
            return EXIT_USAGE
        args.func(args)
    except ConfigError as exc:
        print(f"biwave: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"biwave: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"biwave: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
