"""Command-line entry point: ``udcscatter <subcommand> ...``.

Exit codes: 0 success, 1 runtime or domain error, 2 usage error.
Results go to stdout, progress and errors to stderr.
"""
import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .imageio import FORMATS, read_image, write_image
from .metrics import hsv_histograms, report
from .optics import NoiseSpec, gen_diffraction_psf, load_kernel, parse_kernel_text, save_kernel
from .pipeline import SynthesisConfig, degrade, restore_classical, synthesize_dataset
from .scatter import ScatteringParams, compute_m, estimate_params
from .tonemap import ToneCurve, clip_quantize

log = logging.getLogger("udcscatter")


def _image_format(path):
    fmt = Path(path).suffix.lower().lstrip(".")
    if fmt not in FORMATS:
        raise ValueError(f"unsupported image extension for {path} (use .pfm, .ppm or .png)")
    return fmt


def _write_ldr(img, path):
    # 8-bit containers get the quantized image, PFM keeps the float values
    if _image_format(path) != "pfm":
        img = clip_quantize(img)
    write_image(img, path)


def cmd_synth(args):
    cfg = SynthesisConfig(
        input_dir=Path(args.input_dir),
        output_dir=Path(args.output_dir),
        kernel_paths=[Path(p) for p in args.kernels],
        pairs_per_patch=args.pairs,
        patch_size=args.patch_size,
        alpha_range=(args.alpha_min, args.alpha_max),
        sigma=args.sigma,
        master_seed=args.seed,
        curve=ToneCurve(c=args.tc_c),
        out_format=args.out_format,
        jobs=args.jobs,
    )
    records = synthesize_dataset(cfg)
    print(f"{len(records)} records written to {Path(args.output_dir) / 'manifest.jsonl'}")
    return 0


def cmd_degrade(args):
    B = read_image(args.input)
    k = load_kernel(args.kernel)
    m = compute_m(B) if args.m_auto else args.m
    p = ScatteringParams(args.alpha, m)
    curve = ToneCurve(c=args.tc_c)
    I, linear = degrade(B, p, k, NoiseSpec(args.sigma, args.seed), curve)
    _write_ldr(I, args.output)
    if args.emit_linear:
        write_image(linear, args.emit_linear, "pfm")
    log.info("degraded %s with alpha=%r m=%r kernel=%s", args.input, p.alpha, p.m, k.id)
    return 0


def cmd_restore(args):
    I = read_image(args.input)
    k = load_kernel(args.kernel)
    B_hat = restore_classical(I, ScatteringParams(args.alpha, args.m), k, ToneCurve(c=args.tc_c), args.eps)
    write_image(B_hat, args.output, "pfm")
    return 0


def cmd_estimate(args):
    est = estimate_params(read_image(args.degraded_lin), read_image(args.clean), load_kernel(args.kernel))
    print(f"alpha={est.alpha!r} m={est.m!r} residual={est.residual!r}")
    return 0


def _pairs(ref, test):
    ref, test = Path(ref), Path(test)
    if ref.is_dir() != test.is_dir():
        raise ValueError("--ref and --test must both be files or both be directories")
    if not ref.is_dir():
        return [(test.stem, ref, test)]
    refs = {p.stem: p for p in ref.iterdir() if p.suffix.lower().lstrip(".") in FORMATS}
    tests = {p.stem: p for p in test.iterdir() if p.suffix.lower().lstrip(".") in FORMATS}
    common = sorted(refs.keys() & tests.keys())
    if not common:
        raise ValueError("no images with matching names in --ref and --test")
    return [(name, refs[name], tests[name]) for name in common]


def cmd_metrics(args):
    psnrs, ssims, tests = [], [], []
    for name, ref_path, test_path in _pairs(args.ref, args.test):
        ref, test = read_image(ref_path), read_image(test_path)
        rep = report(ref, test)
        print(rep.line(name))
        psnrs.append(rep.psnr)
        ssims.append(rep.ssim)
        tests.append(test)
    mean_psnr = float(np.mean(psnrs))
    print(f"mean {'inf' if math.isinf(mean_psnr) else f'{mean_psnr:.6f}'} {float(np.mean(ssims)):.6f}")
    if args.hsv_hist:
        Path(args.hsv_hist).write_text(hsv_histograms(tests, args.bins).to_csv())
    return 0


def _read_mask(path):
    path = Path(path)
    if path.suffix.lower().lstrip(".") in FORMATS:
        return read_image(path).max(axis=2) > 0
    return parse_kernel_text(path.read_text()) > 0


def cmd_psf_gen(args):
    k = gen_diffraction_psf(_read_mask(args.mask), args.size, args.pad_factor, id=Path(args.output).stem)
    save_kernel(k, args.output)
    return 0


def cmd_psf_info(args):
    k = load_kernel(args.kernel)
    kh, kw = k.shape
    taps = k.taps
    ys, xs = np.mgrid[0:kh, 0:kw]
    peak = np.unravel_index(np.argmax(taps), taps.shape)
    print(f"id={k.id}")
    print(f"size={kh}x{kw}")
    print(f"sum={taps.sum()!r}")
    print(f"peak={taps.max()!r} at row={peak[0]} col={peak[1]}")
    print(f"centroid=({(ys * taps).sum()!r}, {(xs * taps).sum()!r})")
    return 0


def cmd_net_selftest(args):
    from .netref import format_report, run_selftest

    checks = run_selftest(seed=args.seed, size=args.size, config=args.config, gcabs=args.gcabs)
    print(format_report(checks))
    return 0 if all(c.passed for c in checks) else 1


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be a nonnegative number")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="udcscatter",
        description="Scattering-aware degradation synthesis and restoration for under-display cameras.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("synth", help="synthesize a paired dataset with a manifest")
    p.add_argument("--input-dir", required=True, help="directory of clean HDR images (.pfm/.ppm/.png)")
    p.add_argument("--output-dir", required=True, help="destination for clean/, degraded/ and manifest.jsonl")
    p.add_argument("--kernels", required=True, nargs="+", help="PSF kernel files (text grid or PFM)")
    p.add_argument("--patch-size", type=_positive_int, default=800, help="square patch side (default 800)")
    p.add_argument("--alpha-min", type=float, default=0.6, help="lower bound of sampled alpha (default 0.6)")
    p.add_argument("--alpha-max", type=float, default=0.9, help="upper bound of sampled alpha (default 0.9)")
    p.add_argument("--sigma", type=_nonneg_float, default=0.0, help="Gaussian noise std in linear units (default 0)")
    p.add_argument("--pairs", type=_positive_int, default=1, help="degraded copies per patch and kernel (default 1)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--tc-c", type=float, default=0.25, help="tone curve constant c in x/(x+c) (default 0.25)")
    p.add_argument("--out-format", choices=("png", "pfm"), default="png", help="degraded image format (default png)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads (default 1)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("degrade", help="apply the scattering-aware formation pipeline to one image")
    p.add_argument("--input", required=True, help="clean HDR image")
    p.add_argument("--kernel", required=True, help="PSF kernel file")
    p.add_argument("--alpha", type=float, required=True, help="transmittance in (0, 1]")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--m", type=_nonneg_float, help="scattered-light level")
    g.add_argument("--m-auto", action="store_true", help="use the gray-level mean of the input as m")
    p.add_argument("--sigma", type=_nonneg_float, default=0.0, help="Gaussian noise std (default 0)")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--tc-c", type=float, default=0.25, help="tone curve constant (default 0.25)")
    p.add_argument("--output", required=True, help="degraded image (.png/.ppm quantized, .pfm float)")
    p.add_argument("--emit-linear", metavar="PATH", help="also write the linear pre-tone-map image as PFM")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", help="invert the pipeline with known parameters")
    p.add_argument("--input", required=True, help="degraded LDR image")
    p.add_argument("--kernel", required=True, help="PSF kernel file")
    p.add_argument("--alpha", type=float, required=True, help="transmittance in (0, 1]")
    p.add_argument("--m", type=_nonneg_float, required=True, help="scattered-light level")
    p.add_argument("--eps", type=float, default=1e-3, help="Wiener regularizer (default 1e-3)")
    p.add_argument("--tc-c", type=float, default=0.25, help="tone curve constant (default 0.25)")
    p.add_argument("--output", required=True, help="restored HDR image (PFM)")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("estimate", help="fit (alpha, m) from a linear degraded image and its clean source")
    p.add_argument("--degraded-lin", required=True, help="linear pre-tone-map degraded image (PFM)")
    p.add_argument("--clean", required=True, help="clean HDR image")
    p.add_argument("--kernel", required=True, help="PSF kernel file")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("metrics", help="PSNR/SSIM between image pairs")
    p.add_argument("--ref", required=True, help="reference image or directory")
    p.add_argument("--test", required=True, help="test image or directory (paired by file name)")
    p.add_argument("--hsv-hist", metavar="CSV", help="write HSV histograms of the test images")
    p.add_argument("--bins", type=_positive_int, default=64, help="histogram bins per channel (default 64)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("psf", help="generate or inspect PSF kernels")
    psub = p.add_subparsers(dest="psf_command", metavar="ACTION", required=True)
    q = psub.add_parser("gen", help="diffraction PSF from a binary aperture mask")
    q.add_argument("--mask", required=True, help="mask image or text grid; nonzero is open")
    q.add_argument("--size", type=_positive_int, required=True, help="odd kernel side length")
    q.add_argument("--pad-factor", type=_positive_int, default=2, help="FFT grid size over mask size (default 2)")
    q.add_argument("--output", required=True, help="kernel file (.txt grid or .pfm)")
    q.set_defaults(func=cmd_psf_gen)
    q = psub.add_parser("info", help="print kernel statistics")
    q.add_argument("--kernel", required=True, help="PSF kernel file")
    q.set_defaults(func=cmd_psf_info)

    p = sub.add_parser("net-selftest", help="run the network reference invariant suite")
    p.add_argument("--seed", type=int, default=0, help="seed for weights and inputs (default 0)")
    p.add_argument("--size", type=_positive_int, default=32, help="input side, divisible by 4 (default 32)")
    p.add_argument("--config", choices=("full", "light"), default="light", help="channel widths (default light)")
    p.add_argument("--gcabs", type=_positive_int, default=4, help="GCABs per U-net stage (default 4)")
    p.set_defaults(func=cmd_net_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except (ValueError, OSError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
