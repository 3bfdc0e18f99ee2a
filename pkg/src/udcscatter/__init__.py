"""Under-display camera scattering model, degradation synthesis and restoration."""
from .imaging import crop_patch, hsv_to_rgb, rgb_to_hsv, to_grayscale
from .imageio import read_image, write_image
from .kernels import BACKEND
from .metrics import hist_distance, hsv_histograms, psnr, ssim
from .optics import (
    NoiseSpec,
    PsfKernel,
    add_noise,
    convolve_direct,
    convolve_fft,
    gen_diffraction_psf,
    load_kernel,
)
from .pipeline import degrade, legacy_degrade, restore_classical, synthesize_dataset
from .scatter import (
    ScatteringParams,
    alpha_from_beta_d,
    compute_m,
    estimate_params,
    sample_alpha,
    scatter_forward,
    scatter_inverse,
)
from .tonemap import ToneCurve, clip_quantize, tonemap_forward, tonemap_inverse

__version__ = "0.1.0"
