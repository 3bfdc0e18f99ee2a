import math
import re
import subprocess
import sys

import numpy as np
import pytest

from udcscatter.cli import build_parser, main
from udcscatter.imageio import read_image, write_image
from udcscatter.metrics import psnr
from udcscatter.optics import delta_kernel, gaussian_kernel, save_kernel
from udcscatter.scenes import random_hdr_scene
from udcscatter.tonemap import tonemap_forward


def run(*argv):
    return subprocess.run(
        [sys.executable, "-m", "udcscatter", *map(str, argv)], capture_output=True, text=True
    )


@pytest.fixture
def files(tmp_path):
    write_image(random_hdr_scene(2, 48, 48), tmp_path / "clean.pfm")
    save_kernel(delta_kernel(), tmp_path / "delta.txt")
    save_kernel(gaussian_kernel(5, 1.0), tmp_path / "g5.txt")
    return tmp_path


SUBCOMMAND_FLAGS = {
    "synth": ["--input-dir", "--output-dir", "--kernels", "--patch-size", "--alpha-min", "--alpha-max",
              "--sigma", "--pairs", "--seed", "--tc-c", "--out-format", "--jobs"],
    "degrade": ["--input", "--kernel", "--alpha", "--m", "--m-auto", "--sigma", "--seed", "--output",
                "--emit-linear", "--tc-c"],
    "restore": ["--input", "--kernel", "--alpha", "--m", "--eps", "--output"],
    "estimate": ["--degraded-lin", "--clean", "--kernel"],
    "metrics": ["--ref", "--test", "--hsv-hist", "--bins"],
    "net-selftest": ["--seed", "--size", "--config", "--gcabs"],
}


@pytest.mark.parametrize("sub", sorted(SUBCOMMAND_FLAGS))
def test_help_lists_every_flag(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in SUBCOMMAND_FLAGS[sub]:
        assert flag in out


def test_help_lists_every_registered_flag(capsys):
    # guards against flags being added without help text
    parser = build_parser()
    sub_actions = [a for a in parser._actions if a.dest == "command"][0]
    for name, sp in sub_actions.choices.items():
        for action in sp._actions:
            if not action.option_strings:
                continue
            assert action.help, f"{name} {action.option_strings} has no help"


def test_usage_errors_exit_2(files):
    assert run("degrade", "--bogus").returncode == 2
    assert run().returncode == 2
    r = run("degrade", "--input", files / "clean.pfm", "--kernel", files / "delta.txt", "--alpha", "0.5",
            "--m", "0.1", "--m-auto", "--output", files / "o.png")
    assert r.returncode == 2
    assert run("metrics", "--ref", "a").returncode == 2


def test_runtime_errors_exit_1(files):
    r = run("degrade", "--input", files / "missing.pfm", "--kernel", files / "delta.txt", "--alpha", "0.5",
            "--m", "0.1", "--output", files / "o.png")
    assert r.returncode == 1 and "error:" in r.stderr and r.stdout == ""
    r = run("degrade", "--input", files / "clean.pfm", "--kernel", files / "delta.txt", "--alpha", "1.5",
            "--m", "0.1", "--output", files / "o.png")
    assert r.returncode == 1


def test_identity_pipeline_gives_infinite_psnr(files):
    r = run("degrade", "--input", files / "clean.pfm", "--kernel", files / "delta.txt", "--alpha", "1.0",
            "--m", "0", "--sigma", "0", "--output", files / "out.pfm")
    assert r.returncode == 0, r.stderr
    write_image(tonemap_forward(read_image(files / "clean.pfm")), files / "ref.pfm")
    r = run("metrics", "--ref", files / "ref.pfm", "--test", files / "out.pfm")
    assert r.returncode == 0, r.stderr
    assert r.stdout.splitlines()[0] == "out inf 1.000000"


def test_estimate_round_trip(files):
    r = run("degrade", "--input", files / "clean.pfm", "--kernel", files / "g5.txt", "--alpha", "0.75",
            "--m-auto", "--sigma", "0", "--output", files / "d.png", "--emit-linear", files / "lin.pfm")
    assert r.returncode == 0, r.stderr
    r = run("estimate", "--degraded-lin", files / "lin.pfm", "--clean", files / "clean.pfm",
            "--kernel", files / "g5.txt")
    assert r.returncode == 0, r.stderr
    m = re.fullmatch(r"alpha=(\S+) m=(\S+) residual=(\S+)\n", r.stdout)
    assert m, r.stdout
    assert abs(float(m.group(1)) - 0.75) < 1e-6


def test_estimate_constant_image_exits_1(tmp_path):
    write_image(np.full((16, 16, 3), 0.5), tmp_path / "c.pfm")
    save_kernel(delta_kernel(), tmp_path / "d.txt")
    r = run("estimate", "--degraded-lin", tmp_path / "c.pfm", "--clean", tmp_path / "c.pfm",
            "--kernel", tmp_path / "d.txt")
    assert r.returncode == 1 and "unidentifiable" in r.stderr


def test_restore(files):
    r = run("degrade", "--input", files / "clean.pfm", "--kernel", files / "g5.txt", "--alpha", "0.8",
            "--m", "0.3", "--output", files / "d.pfm")
    assert r.returncode == 0
    r = run("restore", "--input", files / "d.pfm", "--kernel", files / "g5.txt", "--alpha", "0.8",
            "--m", "0.3", "--eps", "1e-6", "--output", files / "r.pfm")
    assert r.returncode == 0, r.stderr
    assert psnr(read_image(files / "clean.pfm"), read_image(files / "r.pfm")) > 40


def test_synth_twice_identical(files):
    inp = files / "in"
    inp.mkdir()
    (files / "clean.pfm").rename(inp / "clean.pfm")
    outs = []
    for name in ("a", "b"):
        r = run("synth", "--input-dir", inp, "--output-dir", files / name, "--kernels", files / "delta.txt",
                files / "g5.txt", "--patch-size", "24", "--sigma", "0.01", "--seed", "5", "--jobs", "2")
        assert r.returncode == 0, r.stderr
        outs.append((files / name / "manifest.jsonl").read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].splitlines()) == 4 * 2


def test_metrics_directories_and_histogram(tmp_path):
    for d in ("ref", "test"):
        (tmp_path / d).mkdir()
    rng = np.random.default_rng(0)
    for name in ("a", "b"):
        img = rng.random((16, 16, 3))
        write_image(img, tmp_path / "ref" / f"{name}.pfm")
        write_image(0.9 * img, tmp_path / "test" / f"{name}.pfm")
    r = run("metrics", "--ref", tmp_path / "ref", "--test", tmp_path / "test", "--hsv-hist",
            tmp_path / "h.csv", "--bins", "16")
    assert r.returncode == 0, r.stderr
    lines = r.stdout.splitlines()
    assert [ln.split()[0] for ln in lines] == ["a", "b", "mean"]
    assert all(math.isfinite(float(v)) for v in lines[2].split()[1:])
    csv = (tmp_path / "h.csv").read_text().splitlines()
    assert csv[0] == "bin_index,h,s,v" and len(csv) == 17


def test_psf_gen_and_info(tmp_path):
    (tmp_path / "mask.txt").write_text("4 4\n1 1 1 1\n1 0 0 1\n1 0 0 1\n1 1 1 1\n")
    r = run("psf", "gen", "--mask", tmp_path / "mask.txt", "--size", "5", "--output", tmp_path / "k.txt")
    assert r.returncode == 0, r.stderr
    r = run("psf", "info", "--kernel", tmp_path / "k.txt")
    assert r.returncode == 0
    assert "size=5x5" in r.stdout and "id=k" in r.stdout
    r = run("psf", "gen", "--mask", tmp_path / "mask.txt", "--size", "4", "--output", tmp_path / "k2.txt")
    assert r.returncode == 1


def test_net_selftest():
    r = run("net-selftest", "--size", "16", "--gcabs", "1")
    assert r.returncode == 0, r.stdout
    assert "FAIL" not in r.stdout and r.stdout.count("PASS") >= 15
