"""Image formation pipelines, dataset synthesis and classical restoration."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .imageio import read_image, write_image
from .imaging import check_hdr, crop_patch
from .optics import NoiseSpec, add_noise, convolve_fft, kernel_otf, load_kernel
from .rng import CounterRng, split_seed
from .scatter import ALPHA_RANGE, ScatteringParams, compute_m, sample_alpha, scatter_forward, scatter_inverse
from .tonemap import ToneCurve, clip_quantize, tonemap_forward, tonemap_inverse

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
INPUT_SUFFIXES = (".pfm", ".ppm", ".png")
# child stream of the record seed used for alpha; the record seed itself drives noise
ALPHA_STREAM = 1


def degrade(B, p, k, noise=NoiseSpec(), curve=ToneCurve()):
    """Enhanced pipeline: scatter, convolve, add noise, tone map.

    Returns ``(I, intermediate)`` where ``intermediate`` is the linear image
    just before tone mapping and ``I`` is float LDR (not quantized).
    """
    B = check_hdr(B)
    intermediate = add_noise(convolve_fft(scatter_forward(B, p), k), noise)
    return tonemap_forward(intermediate, curve), intermediate


def legacy_degrade(B, gamma, k, noise=NoiseSpec(), curve=ToneCurve(), return_linear=False):
    """Classical convolution model: tone map of ``gamma * (B * k) + n``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    B = check_hdr(B)
    linear = add_noise(gamma * convolve_fft(B, k), noise)
    out = tonemap_forward(linear, curve)
    return (out, linear) if return_linear else out


def wiener_deconvolve(img, k, eps):
    """Per-channel ``IFFT[conj(K) Y / (|K|^2 + eps)]`` on the circular grid."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    K = kernel_otf(k, (h, w))
    filt = np.conj(K) / (np.abs(K) ** 2 + eps)
    spec = np.fft.fft2(img, axes=(0, 1))
    return np.real(np.fft.ifft2(spec * filt[..., None], axes=(0, 1)))


def restore_classical(I, p, k, curve=ToneCurve(), eps=1e-3):
    """Invert tone mapping, deconvolve, then undo scattering."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    linear = tonemap_inverse(I, curve)
    deblurred = wiener_deconvolve(linear, k, eps)
    return np.maximum(scatter_inverse(deblurred, p), 0.0)


# -- dataset synthesis -------------------------------------------------------

@dataclass
class DegradationRecord:
    id: str
    clean_path: str
    degraded_path: str
    alpha: float
    m: float
    kernel_id: str
    sigma: float
    seed: int
    patch: Tuple[int, int, int, int]
    tc_kind: str
    tc_c: float

    def to_json(self):
        rec = asdict(self)
        rec["patch"] = list(self.patch)
        return json.dumps(rec, ensure_ascii=False)

    @classmethod
    def from_json(cls, line):
        rec = json.loads(line)
        rec["patch"] = tuple(rec["patch"])
        return cls(**rec)


@dataclass
class SynthesisConfig:
    input_dir: Path
    output_dir: Path
    kernel_paths: Sequence[Path]
    pairs_per_patch: int = 1
    patch_size: int = 800
    alpha_range: Tuple[float, float] = ALPHA_RANGE
    sigma: float = 0.0
    master_seed: int = 0
    curve: ToneCurve = field(default_factory=ToneCurve)
    out_format: str = "png"
    jobs: int = 1

    def validate(self, kernels):
        lo, hi = self.alpha_range
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"alpha range {self.alpha_range} is not inside (0, 1]")
        if self.pairs_per_patch < 1:
            raise ValueError("pairs_per_patch must be at least 1")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.out_format not in ("png", "pfm"):
            raise ValueError("out_format must be 'png' or 'pfm'")
        for k in kernels:
            if max(k.shape) > self.patch_size:
                raise ValueError(f"kernel {k.id} is larger than the patch size")


def grid_patches(height, width, size):
    """Non-overlapping top-left-aligned grid; partial patches are discarded."""
    return [
        (x0, y0, size, size)
        for y0 in range(0, height - size + 1, size)
        for x0 in range(0, width - size + 1, size)
    ]


def _load_inputs(input_dir):
    files = sorted(p for p in Path(input_dir).iterdir() if p.suffix.lower() in INPUT_SUFFIXES)
    images = []
    for path in files:
        try:
            images.append((path, check_hdr(read_image(path))))
        except (OSError, ValueError) as exc:
            log.warning("skipping unreadable input %s: %s", path, exc)
    if not images:
        raise ValueError(f"no readable input images in {input_dir}")
    return images


def _render(clean, alpha, kernel, sigma, seed, curve, out_format):
    p = ScatteringParams(alpha, compute_m(clean))
    I, _ = degrade(clean, p, kernel, NoiseSpec(sigma, seed), curve)
    if out_format == "png":
        I = clip_quantize(I)
    return I


def regenerate(record, kernels, root):
    """Recompute the degraded image described by ``record``.

    ``kernels`` maps kernel ids to :class:`PsfKernel`; ``root`` is the
    directory the record paths are relative to.
    """
    clean = read_image(Path(root) / record.clean_path)
    curve = ToneCurve(record.tc_kind, record.tc_c)
    fmt = Path(record.degraded_path).suffix.lstrip(".")
    p = ScatteringParams(record.alpha, record.m)
    I, _ = degrade(clean, p, kernels[record.kernel_id], NoiseSpec(record.sigma, record.seed), curve)
    return clip_quantize(I) if fmt == "png" else I


def synthesize_dataset(cfg):
    """Generate degraded/clean pairs and a JSON-lines manifest.

    Patches are cut on a grid from every readable input (sorted by name).
    Each (patch, kernel, repeat) triple gets the seed
    ``split_seed(master_seed, patch, kernel, repeat)``. That seed drives the
    noise stream; alpha is the first uniform of its child
    ``split_seed(seed, ALPHA_STREAM)``.
    Returns the list of records, in record-index order.
    """
    kernels = [load_kernel(p) for p in cfg.kernel_paths]
    if not kernels:
        raise ValueError("at least one kernel is required")
    ids = [k.id for k in kernels]
    if len(set(ids)) != len(ids):
        raise ValueError(f"kernel ids must be unique, got {ids}")
    cfg.validate(kernels)
    images = _load_inputs(cfg.input_dir)

    out = Path(cfg.output_dir)
    (out / "clean").mkdir(parents=True, exist_ok=True)
    (out / "degraded").mkdir(parents=True, exist_ok=True)

    patches = []
    for path, img in images:
        rects = grid_patches(img.shape[0], img.shape[1], cfg.patch_size)
        if not rects:
            log.warning("%s is smaller than one %d px patch", path, cfg.patch_size)
        for rect in rects:
            # clean references are stored as float32; degrade from the stored values
            patch = crop_patch(img, *rect).astype(np.float32).astype(np.float64)
            patches.append((rect, patch))
    if not patches:
        raise ValueError("no patch fits inside the input images")

    jobs = []
    for pi, (rect, patch) in enumerate(patches):
        clean_rel = f"clean/p{pi:05d}.pfm"
        write_image(patch, out / clean_rel)
        m = compute_m(patch)
        for ki, kernel in enumerate(kernels):
            for r in range(cfg.pairs_per_patch):
                seed = split_seed(cfg.master_seed, pi, ki, r)
                alpha = sample_alpha(CounterRng(split_seed(seed, ALPHA_STREAM)), *cfg.alpha_range)
                rec_id = f"p{pi:05d}_k{ki:02d}_r{r:02d}"
                rec = DegradationRecord(
                    id=rec_id,
                    clean_path=clean_rel,
                    degraded_path=f"degraded/{rec_id}.{cfg.out_format}",
                    alpha=alpha,
                    m=m,
                    kernel_id=kernel.id,
                    sigma=float(cfg.sigma),
                    seed=seed,
                    patch=rect,
                    tc_kind=cfg.curve.kind,
                    tc_c=float(cfg.curve.c),
                )
                jobs.append((rec, patch, kernel))

    def run(job):
        rec, patch, kernel = job
        I = _render(patch, rec.alpha, kernel, rec.sigma, rec.seed, cfg.curve, cfg.out_format)
        write_image(I, out / rec.degraded_path)
        return rec

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(run, jobs))
    else:
        records = [run(job) for job in jobs]

    write_manifest(records, out / MANIFEST_NAME)
    log.info("wrote %d records to %s", len(records), out / MANIFEST_NAME)
    return records


def write_manifest(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_manifest(path) -> List[DegradationRecord]:
    with open(path, encoding="utf-8") as fh:
        return [DegradationRecord.from_json(line) for line in fh if line.strip()]
