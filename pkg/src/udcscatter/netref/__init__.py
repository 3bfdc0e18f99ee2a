"""Forward-only reference implementation of the two-branch restoration network."""
from .blocks import csa_forward, ffb_forward, gating, gcab_forward, head_forward, tsab_forward
from .losses import loss_total
from .model import NetConfig, init_srudc, load_weights, save_weights, srudc_forward
from .selftest import format_report, run_selftest
