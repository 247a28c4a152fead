"""Command-line front end.

Usage::

    cauchy-gabor COMMAND --config scenario.json [--set key=value ...]
                 [--out DIR] [--threads N] [--seed N]

Commands: lattice, analyze, reconstruct, bounds, sampling, counterexample,
theorem-check. The config is a JSON object; see ``CONFIG_SCHEMA`` and the
README for the keys. Every run writes its data files, a ``manifest.json``
(config hash, versions, seed, output checksums) and a ``metadata.json``
holding the only non-reproducible fields (timestamp, wall time).

Exit codes: 0 success, 1 invalid input, 2 numerical or solver failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import platform
import sys
import time
import traceback
from pathlib import Path
from typing import Any

COMMANDS = ("lattice", "analyze", "reconstruct", "bounds", "sampling", "counterexample", "theorem-check")

# section -> allowed keys (None: free-form generator descriptor)
CONFIG_SCHEMA: dict[str, Any] = {
    "seed": int,
    "lambda": None,
    "m": None,
    "w": {"re", "im"},
    "signal": {"kind", "center", "halfwidth", "tail_tol", "path"},
    "trial": {"frame_G", "sampling_G", "band_G", "interval", "taper", "eps"},
    "sampling": {"beta", "kappa"},
    "bounds": {"check_doubling", "sweep_axis", "sweep_values"},
    "counterexample": {
        "scenario",
        "gap_widths",
        "base_step",
        "multiplicities",
        "spread",
        "cluster_center",
    },
    "input": {"coefficients"},
}
GENERATOR_KEYS = {"kind", "window", "step", "amplitude", "seed", "gap_center", "gap_width",
                  "cluster_center", "multiplicity", "spread", "offsets", "points"}

DEFAULTS: dict[str, Any] = {
    "w": {"re": 1.0, "im": 0.0},
    "trial": {"frame_G": 160, "sampling_G": None, "band_G": None, "interval": None, "taper": None, "eps": None},
    "sampling": {"beta": None, "kappa": 0.99},
    "bounds": {"check_doubling": True, "sweep_axis": None, "sweep_values": None},
    "counterexample": {
        "scenario": "gap",
        "gap_widths": [2, 4, 8],
        "base_step": 1.0,
        "multiplicities": [1, 2, 4, 8],
        "spread": 1e-3,
        "cluster_center": 0.0,
    },
}


class ConfigError(ValueError):
    pass


# -- config handling -------------------------------------------------------------


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {key}: {p} is not a section")
    node[parts[-1]] = _parse_value(raw)


def validate_config(cfg: dict) -> dict:
    """Reject unknown keys, fill defaults and resolve the seed of random generators."""
    unknown = set(cfg) - set(CONFIG_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    out = copy.deepcopy(cfg)
    for section, allowed in CONFIG_SCHEMA.items():
        if section not in out or allowed is int:
            continue
        value = out[section]
        if not isinstance(value, dict):
            raise ConfigError(f"section {section!r} must be an object")
        keys = GENERATOR_KEYS if allowed is None else allowed
        bad = set(value) - keys
        if bad:
            raise ConfigError(f"unknown keys {sorted(bad)} in section {section!r}")
    for section, defaults in DEFAULTS.items():
        merged = dict(defaults)
        merged.update(out.get(section, {}))
        out[section] = merged
    if "seed" in out and not isinstance(out["seed"], int):
        raise ConfigError("seed must be an integer")
    for name in ("lambda", "m"):
        gen = out.get(name)
        if gen is None:
            continue
        if "kind" not in gen:
            raise ConfigError(f"section {name!r} needs a generator kind")
        if gen["kind"] == "jittered" and "seed" not in gen:
            if "seed" not in out:
                raise ConfigError(f"section {name!r}: jittered generator needs a seed (config 'seed' or --seed)")
            gen["seed"] = out["seed"]
    return out


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | None, overrides: list[str], seed: int | None) -> dict:
    cfg: dict = {}
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for item in overrides:
        apply_override(cfg, item)
    if seed is not None:
        cfg["seed"] = seed
    return validate_config(cfg)


# -- output ------------------------------------------------------------------------


class Writer:
    """Serializes outputs; each file carries the config hash."""

    def __init__(self, out_dir: Path, chash: str):
        self.dir = out_dir
        self.hash = chash
        self.files: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def _put(self, name: str, text: str) -> None:
        (self.dir / name).write_text(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()

    def csv(self, name: str, text: str) -> None:
        self._put(name, f"# config_sha256={self.hash}\n{text}")

    def json(self, name: str, obj: Any) -> None:
        body = dict(obj)
        body["config_sha256"] = self.hash
        self._put(name, json.dumps(body, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    import numpy as np

    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x).__name__}")


# -- commands ---------------------------------------------------------------------


def _w(cfg):
    from .cauchy_analysis import WindowParam

    return WindowParam(complex(float(cfg["w"]["re"]), float(cfg["w"]["im"])))


def _lambda(cfg):
    from .lattice import point_set, point_set_from_descriptor

    desc = _need(cfg, "lambda")
    if desc["kind"] == "explicit":
        return point_set(desc.get("points", []))
    return point_set_from_descriptor(desc)


def _m(cfg):
    from .lattice import frequency_set_from_descriptor, make_frequency_set

    desc = _need(cfg, "m")
    if desc["kind"] == "explicit":
        return make_frequency_set(desc.get("points", []))
    return frequency_set_from_descriptor(desc)


def _need(cfg, section):
    if cfg.get(section) is None:
        raise ConfigError(f"this command needs a {section!r} section")
    return cfg[section]


def _signal(cfg):
    from .spectrum import SpectralSignal, gaussian_spectrum

    sig = _need(cfg, "signal")
    kind = sig.get("kind", "gaussian")
    if kind == "gaussian":
        return gaussian_spectrum(
            float(sig.get("center", 0.0)),
            float(sig.get("halfwidth", 1.0)),
            float(sig.get("tail_tol", 1e-6)),
        )
    if kind == "csv":
        return SpectralSignal.from_csv(Path(sig["path"]).read_text())
    raise ConfigError(f"unknown signal kind {kind!r}")


def cmd_lattice(cfg, out: Writer) -> str:
    from .lattice import finiteness_report

    parts = []
    if cfg.get("lambda") is not None:
        L = _lambda(cfg)
        out.csv("lambda.csv", L.to_csv())
        parts.append(f"|Lambda|={len(L)}")
    if cfg.get("m") is not None:
        M = _m(cfg)
        out.csv("m.csv", "mu\n" + "".join(f"{float(x)!r}\n" for x in M.points))
        fin = finiteness_report(M)
        out.json(
            "finiteness.json",
            {"beta": fin.beta, "max_unit_count": fin.max_unit_count, "locally_finite": fin.is_locally_finite},
        )
        parts.append(f"|M|={len(M)} beta(M)={fin.beta:g}")
    if not parts:
        raise ConfigError("lattice needs a 'lambda' or 'm' section")
    return "lattice: " + " ".join(parts)


def _coefficients(cfg):
    from .cauchy_analysis import CoefficientTable, analyze

    path = (cfg.get("input") or {}).get("coefficients")
    if path:
        return CoefficientTable.from_json(Path(path).read_text()), None
    f = _signal(cfg)
    return analyze(f, _lambda(cfg), _m(cfg), _w(cfg)), f


def cmd_analyze(cfg, out: Writer) -> str:
    from .spectrum import norm_sq

    c, f = _coefficients(cfg)
    out.csv("coefficients.csv", c.to_csv())
    out.json("coefficients.json", json.loads(c.to_json()))
    if f is not None:
        out.csv("signal.csv", f.to_csv())
        ratio = c.frame_sum / norm_sq(f)
        return f"analyze: {c.values.size} coefficients, frame sum / norm^2 = {ratio:.6g}"
    return f"analyze: {c.values.size} coefficients"


def cmd_reconstruct(cfg, out: Writer) -> str:
    from .pipeline import reconstruct

    c, f = _coefficients(cfg)
    res = reconstruct(c, _lambda(cfg), _m(cfg), _w(cfg), G=cfg["trial"]["band_G"], eps=cfg["trial"]["eps"], truth=f)
    out.csv("recovered.csv", res.recovered.to_csv())
    out.json("reconstruction.json", json.loads(res.to_json()))
    err = "n/a" if res.relative_l2_error is None else f"{res.relative_l2_error:.3e}"
    return f"reconstruct: {res.diagnostics['n_bands']} bands, relative L2 error {err}"


def _frame_problem(cfg):
    from .framebounds import FrameProblem

    t = cfg["trial"]
    interval = tuple(t["interval"]) if t["interval"] is not None else None
    return FrameProblem(_lambda(cfg), _m(cfg).points, _w(cfg), int(t["frame_G"]), interval, t["taper"])


def cmd_bounds(cfg, out: Writer) -> str:
    from .framebounds import frame_bounds, reports_to_csv, sweep

    p = _frame_problem(cfg)
    b = cfg["bounds"]
    if b["sweep_axis"]:
        reports = sweep(p, b["sweep_axis"], b["sweep_values"] or [], bool(b["check_doubling"]))
    else:
        reports = [frame_bounds(p, bool(b["check_doubling"]))]
    for r in reports:
        r.runtime = {}  # wall times go to metadata.json only
    out.csv("bounds.csv", reports_to_csv(reports))
    out.json("bounds.json", {"reports": [json.loads(r.to_json()) for r in reports]})
    failed = [i for i, r in enumerate(reports) if r.error]
    if failed:
        out.json("failures.json", {"failed_indices": failed, "errors": [reports[i].error for i in failed]})
    head = reports[0]
    return f"bounds: {len(reports)} report(s), first A_est={head.A_est:.6g} B_est={head.B_est:.6g}, {len(failed)} failed"


def cmd_sampling(cfg, out: Writer) -> str:
    from .lattice import finiteness_report
    from .paley_wiener import SamplingProblem, matched_trial_size, sampling_constants

    L = _lambda(cfg)
    beta = cfg["sampling"]["beta"]
    if beta is None:
        beta = finiteness_report(_m(cfg)).beta
    span = float(L.points[-1] - L.points[0])
    G = cfg["trial"]["sampling_G"] or matched_trial_size(span, beta)
    sc = sampling_constants(SamplingProblem(L, float(beta), int(G), kappa=float(cfg["sampling"]["kappa"])))
    out.json("sampling.json", {"A_est": sc.A_est, "B_est": sc.B_est, "diagnostics": sc.diagnostics})
    out.csv("sampling.csv", f"beta,G,A_est,B_est\n{float(beta)!r},{int(G)},{sc.A_est!r},{sc.B_est!r}\n")
    return f"sampling: beta={beta:g} G={G} A_est={sc.A_est:.6g} B_est={sc.B_est:.6g}"


def cmd_counterexample(cfg, out: Writer) -> str:
    from .pipeline import cluster_counterexample, gap_counterexample

    ce = cfg["counterexample"]
    if ce["scenario"] == "gap":
        L = _lambda(cfg) if cfg.get("lambda") is not None else None
        curve = gap_counterexample(ce["gap_widths"], float(ce["base_step"]), _w(cfg), L)
    elif ce["scenario"] == "cluster":
        curve = cluster_counterexample(
            ce["multiplicities"],
            float(ce["spread"]),
            _lambda(cfg),
            _m(cfg).points,
            _w(cfg),
            int(cfg["trial"]["frame_G"]),
            float(ce["cluster_center"]),
        )
    else:
        raise ConfigError(f"unknown counterexample scenario {ce['scenario']!r}")
    out.csv("curve.csv", curve.to_csv())
    out.json("curve.json", json.loads(curve.to_json()))
    resp = ", ".join(f"{r:.3g}" for r in curve.responses)
    return f"counterexample: {ce['scenario']} responses [{resp}]"


def cmd_theorem_check(cfg, out: Writer) -> str:
    from .pipeline import theorem_check

    scenario = {
        "Lambda": _need(cfg, "lambda"),
        "M": _need(cfg, "m"),
        "w": [cfg["w"]["re"], cfg["w"]["im"]],
        "frame_G": cfg["trial"]["frame_G"],
        "sampling_G": cfg["trial"]["sampling_G"],
    }
    report = theorem_check(scenario)
    out.json("verdict.json", report)
    return f"theorem-check: {report['verdict']}"


HANDLERS = {
    "lattice": cmd_lattice,
    "analyze": cmd_analyze,
    "reconstruct": cmd_reconstruct,
    "bounds": cmd_bounds,
    "sampling": cmd_sampling,
    "counterexample": cmd_counterexample,
    "theorem-check": cmd_theorem_check,
}


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cauchy-gabor", description="Cauchy-kernel Gabor frame experiments")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="scenario config (JSON)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (dotted path)")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--threads", type=int, default=None, help="cap on BLAS worker threads")
    ap.add_argument("--seed", type=int, default=None, help="seed for randomized generators")
    return ap


def _where(exc: BaseException) -> str:
    """``module.function`` of the innermost package frame that raised."""
    tb = traceback.extract_tb(exc.__traceback__)
    for frame in reversed(tb):
        path = Path(frame.filename)
        if path.parent.name == "cauchy_gabor" and path.stem != "cli":
            return f"{path.stem}.{frame.name}"
    return "cli"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: cli: --threads must be >= 1", file=sys.stderr)
            return 1
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    import numpy as np
    import scipy

    from . import __version__
    from .paley_wiener import SolverError

    t0 = time.time()
    try:
        cfg = load_config(args.config, args.set, args.seed)
        chash = config_hash(cfg)
        out = Writer(Path(args.out), chash)
        summary = HANDLERS[args.command](cfg, out)
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {_where(exc)}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {_where(exc)}: {exc}", file=sys.stderr)
        return 1
    print(summary)
    manifest = {
        "command": args.command,
        "config": cfg,
        "config_sha256": chash,
        "seed": cfg.get("seed"),
        "versions": {
            "cauchy_gabor": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "threads": args.threads,
        "outputs": dict(sorted(out.files.items())),
    }
    (out.dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    meta = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "wall_seconds": time.time() - t0}
    (out.dir / "metadata.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
