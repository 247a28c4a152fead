"""Small configs covering every CLI command, shared by the CLI and acceptance tests."""

import hashlib
from pathlib import Path

from cauchy_gabor.cli import main

SMALL_LAMBDA = {"kind": "arithmetic", "window": [-10, 10], "step": 0.8}
SMALL_M = {"kind": "arithmetic", "window": [0, 4], "step": 1}
BUMP = {"kind": "gaussian", "center": 2.0, "halfwidth": 0.6, "tail_tol": 1e-8}

SCENARIOS = {
    "lattice": {
        "seed": 7,
        "lambda": {"kind": "jittered", "window": [-10, 10], "step": 1, "amplitude": 0.2},
        "m": SMALL_M,
    },
    "analyze": {"lambda": SMALL_LAMBDA, "m": SMALL_M, "signal": BUMP},
    "reconstruct": {"lambda": SMALL_LAMBDA, "m": SMALL_M, "signal": BUMP, "trial": {"band_G": 16}},
    "bounds": {
        "lambda": SMALL_LAMBDA,
        "m": SMALL_M,
        "trial": {"frame_G": 24},
        "bounds": {"sweep_axis": "w.re", "sweep_values": [0.5, 1, 2]},
    },
    "sampling": {"lambda": SMALL_LAMBDA, "m": SMALL_M},
    "counterexample": {"lambda": {"kind": "arithmetic", "window": [-10, 10], "step": 0.5}},
    "theorem-check": {"lambda": SMALL_LAMBDA, "m": SMALL_M, "trial": {"frame_G": 24}},
}


def write_config(path: Path, cfg) -> Path:
    import json

    path.write_text(json.dumps(cfg))
    return path


def run(command, cfg_path, out_dir, *extra):
    return main([command, "--config", str(cfg_path), "--out", str(out_dir), *extra])


def digests(out_dir: Path, skip=("metadata.json",)):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(Path(out_dir).iterdir())
        if p.name not in skip
    }
