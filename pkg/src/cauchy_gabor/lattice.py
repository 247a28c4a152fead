"""Frequency sets M, time point sets Lambda, and scenario generators.

Both sets are infinite in the theory; here they are finite windows. A
``PointSet`` remembers how it was generated so that any experiment can be
rerun bit-exactly from its descriptor.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np


class LatticeError(ValueError):
    """Invalid point set or generator parameters."""


def _validate_increasing(points, what: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float).reshape(-1)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise LatticeError(f"{what}: non-finite entry at index {bad[0]}")
    order = np.argsort(arr, kind="stable")
    arr = arr[order]
    dup = np.flatnonzero(np.diff(arr) <= 0)
    if dup.size:
        raise LatticeError(
            f"{what}: duplicate entry at index {int(order[dup[0] + 1])} (value {float(arr[dup[0]])!r})"
        )
    return arr


@dataclass(frozen=True)
class FrequencySet:
    """A sorted window ``mu_0 < mu_1 < ...`` of the frequency set M."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.points) < 2:
            raise LatticeError("make_frequency_set: need at least 2 points")
        self.points.setflags(write=False)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def beta(self) -> float:
        return float(np.max(self.gaps))

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FrequencySet(n={len(self)}, [{self.points[0]:g}, {self.points[-1]:g}], beta={self.beta:g})"


def make_frequency_set(points: Sequence[float]) -> FrequencySet:
    """Validate and sort ``points``; duplicates and non-finite values are rejected."""
    arr = _validate_increasing(points, "make_frequency_set")
    return FrequencySet(arr.copy())


@dataclass(frozen=True)
class FinitenessReport:
    beta: float
    max_unit_count: int
    is_locally_finite: bool


def finiteness_report(M: FrequencySet) -> FinitenessReport:
    """Largest gap and the largest number of points in any ``[x, x + 1)``.

    The sliding count only needs left endpoints at points of M.
    """
    pts = M.points
    right = np.searchsorted(pts, pts + 1.0, side="left")
    count = int(np.max(right - np.arange(len(pts))))
    beta = M.beta
    return FinitenessReport(beta, count, bool(math.isfinite(beta)))


GENERATOR_KINDS = ("arithmetic", "jittered", "gapped", "clustered", "periodic")


@dataclass(frozen=True)
class PointSet:
    """A window of Lambda with the descriptor that produced it."""

    points: np.ndarray = field(repr=False)
    descriptor: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"PointSet(n={len(self)}, descriptor={dict(self.descriptor)})"

    def regenerate(self) -> "PointSet":
        return point_set_from_descriptor(self.descriptor)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda"])
        for x in self.points:
            w.writerow([repr(float(x))])
        return buf.getvalue()


def point_set(points: Sequence[float], **descriptor) -> PointSet:
    """Wrap explicit points (e.g. from a CSV file) as a PointSet."""
    arr = _validate_increasing(points, "point_set")
    desc = {"kind": "explicit", **descriptor}
    return PointSet(arr.copy(), desc)


def _arith(step: float, a: float, b: float) -> np.ndarray:
    # integer multiples of step inside [a, b]; tolerant to rounding at the ends
    k0 = math.ceil(a / step - 1e-9)
    k1 = math.floor(b / step + 1e-9)
    return np.arange(k0, k1 + 1) * step


def generate_point_set(kind: str, window: Sequence[float], **params) -> PointSet:
    """Build a window of a scenario point set.

    Parameters
    ----------
    kind
        ``arithmetic(step)``, ``jittered(step, amplitude, seed)``,
        ``gapped(step, gap_center, gap_width)`` or
        ``clustered(step, cluster_center, multiplicity, spread)`` or
        ``periodic(step, offsets)`` (the pattern ``offsets`` repeated with
        period ``step``).
    window
        Closed interval ``[a, b]``; all points land inside it.
    """
    a, b = (float(x) for x in window)
    if not a <= b:
        raise LatticeError(f"generate_point_set: empty window [{a}, {b}]")
    step = float(params.get("step", 0))
    if not step > 0:
        raise LatticeError("generate_point_set: step must be positive")
    desc: dict[str, Any] = {"kind": kind, "window": [a, b], **params}

    if kind == "arithmetic":
        _only(params, {"step"})
        pts = _arith(step, a, b)
    elif kind == "jittered":
        _only(params, {"step", "amplitude", "seed"})
        amp = float(params["amplitude"])
        if "seed" not in params:
            raise LatticeError("generate_point_set: jittered needs a seed")
        if not 0 <= amp < step / 2:
            raise LatticeError("generate_point_set: jitter amplitude must be < step/2")
        base = _arith(step, a, b)
        rng = np.random.default_rng(int(params["seed"]))
        pts = base + rng.uniform(-amp, amp, size=base.size)
        pts = pts[(pts >= a) & (pts <= b)]
    elif kind == "gapped":
        _only(params, {"step", "gap_center", "gap_width"})
        c, g = float(params["gap_center"]), float(params["gap_width"])
        if g < 0:
            raise LatticeError("generate_point_set: gap_width must be >= 0")
        base = _arith(step, a, b)
        pts = base[~((base > c - g / 2) & (base < c + g / 2))]
    elif kind == "clustered":
        _only(params, {"step", "cluster_center", "multiplicity", "spread"})
        c = float(params["cluster_center"])
        m = int(params["multiplicity"])
        spread = float(params["spread"])
        if m < 1:
            raise LatticeError("generate_point_set: multiplicity must be >= 1")
        base = _arith(step, a, b)
        i = int(np.argmin(np.abs(base - c)))
        centre = base[i]
        if m == 1:
            cluster = np.array([centre])
        else:
            if not spread > 0:
                raise LatticeError("generate_point_set: clustered needs spread > 0 for m > 1")
            cluster = centre + np.linspace(-spread / 2, spread / 2, m)
        pts = np.concatenate([base[:i], cluster, base[i + 1:]])
        pts = pts[(pts >= a) & (pts <= b)]
    elif kind == "periodic":
        _only(params, {"step", "offsets"})
        offs = np.sort(np.asarray(params["offsets"], dtype=float).reshape(-1))
        if offs.size == 0 or offs[0] < 0 or offs[-1] >= step:
            raise LatticeError("generate_point_set: periodic offsets must lie in [0, step)")
        desc["offsets"] = [float(x) for x in offs]
        k0 = math.floor((a - offs[-1]) / step)
        k1 = math.ceil(b / step)
        pts = (np.arange(k0, k1 + 1)[:, None] * step + offs[None, :]).ravel()
        pts = pts[(pts >= a - 1e-9 * step) & (pts <= b + 1e-9 * step)]
    else:
        raise LatticeError(f"generate_point_set: unknown kind {kind!r}")

    if pts.size and np.any(np.diff(pts) <= 0):
        raise LatticeError("generate_point_set: parameters break strict monotonicity")
    return PointSet(np.ascontiguousarray(pts, dtype=float), desc)


def _only(params: Mapping[str, Any], allowed: set[str]) -> None:
    extra = set(params) - allowed
    if extra:
        raise LatticeError(f"generate_point_set: unexpected parameters {sorted(extra)}")
    missing = allowed - set(params)
    if missing:
        raise LatticeError(f"generate_point_set: missing parameters {sorted(missing)}")


def point_set_from_descriptor(descriptor: Mapping[str, Any]) -> PointSet:
    d = dict(descriptor)
    kind = d.pop("kind")
    if kind == "explicit":
        raise LatticeError("explicit point sets carry no generator")
    window = d.pop("window")
    return generate_point_set(kind, window, **d)


def frequency_set_from_descriptor(descriptor: Mapping[str, Any]) -> FrequencySet:
    """Generate M through the same generators as Lambda."""
    return make_frequency_set(point_set_from_descriptor(descriptor).points)
