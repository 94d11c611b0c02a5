"""Capacity-region extraction: reference points A-D and the boundary polyline.

Coordinates follow the usual diagram layout for a leaf pair ``(j, k)``: the
y axis is the root-j request rate, the x axis the root-k rate. A and D are the
dedicated maxima, B and C the extra throughput obtained only through backup
scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .network import (
    BoundarySample,
    ConfigurationError,
    SlotOutcome,
    SlotRequest,
    StarNetwork,
    _check_pair,
    run_trials,
)
from .rng import derive_seed

DEDUP_TOL = 1e-12
POINT_NAMES = ("A", "B", "C", "D")


def standard_error(p_hat: float, n: int) -> float:
    """Binomial standard error ``sqrt(p(1-p)/n)`` of an estimated rate."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {p_hat}")
    return math.sqrt(p_hat * (1.0 - p_hat) / n)


@dataclass(frozen=True)
class QcrPoint:
    x: float
    y: float
    se_x: float = 0.0
    se_y: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x", "y"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a rate in [0, 1], got {getattr(self, name)}")
        for name in ("se_x", "se_y"):
            if not 0.0 <= getattr(self, name) <= 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5], got {getattr(self, name)}")


@dataclass(frozen=True)
class RegionMeta:
    trials: int
    master_seed: int
    network: str


@dataclass(frozen=True)
class CapacityRegion:
    root: int
    pair: tuple[int, int]
    A: QcrPoint
    B: QcrPoint
    C: QcrPoint
    D: QcrPoint
    boundary: Optional[tuple[BoundarySample, ...]] = None
    meta: Optional[RegionMeta] = None

    def __post_init__(self) -> None:
        if self.A.x != 0.0 or self.D.y != 0.0:
            raise ValueError("A must lie on the y axis and D on the x axis")
        if self.B.y != self.A.y or self.C.x != self.D.x:
            raise ValueError("B must share A's y and C must share D's x")
        if self.B.x > self.D.x or self.C.y > self.A.y:
            raise ValueError("backup rates cannot exceed the dedicated rates")

    def points(self) -> dict[str, QcrPoint]:
        return {name: getattr(self, name) for name in POINT_NAMES}

    def with_boundary(self, samples: Sequence[BoundarySample]) -> "CapacityRegion":
        return CapacityRegion(self.root, self.pair, self.A, self.B, self.C, self.D, tuple(samples), self.meta)


def _rate(count: int, trials: int) -> tuple[float, float]:
    p = count / trials
    return p, standard_error(p, trials)


def estimate_reference_points(
    network: StarNetwork,
    root: int,
    pair: Sequence[int],
    trials: int,
    master_seed: int,
    workers: int = 1,
    backend: Optional[str] = None,
) -> CapacityRegion:
    """Monte Carlo estimate of A-D for ``pair`` under ``root``.

    Two independent runs: ``(primary=j, backup=k)`` gives A and B, and
    ``(primary=k, backup=j)`` gives D and C. Enabling the backup never changes
    the primary success rate, so a single run covers both points.
    """
    if isinstance(trials, bool) or trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials!r}")
    network = network if network.root == root else network.rerooted(root)
    j, k = _check_pair(network, pair)

    run_jk = run_trials(network, SlotRequest(j, k), trials, derive_seed(master_seed, 1), workers, backend)
    run_kj = run_trials(network, SlotRequest(k, j), trials, derive_seed(master_seed, 2), workers, backend)

    a_y, se_a = _rate(run_jk[SlotOutcome.FULFILLED_PRIMARY], trials)
    b_x, se_b = _rate(run_jk[SlotOutcome.FULFILLED_BACKUP], trials)
    d_x, se_d = _rate(run_kj[SlotOutcome.FULFILLED_PRIMARY], trials)
    c_y, se_c = _rate(run_kj[SlotOutcome.FULFILLED_BACKUP], trials)

    return CapacityRegion(
        root=root,
        pair=(j, k),
        A=QcrPoint(0.0, a_y, 0.0, se_a),
        B=QcrPoint(b_x, a_y, se_b, se_a),
        C=QcrPoint(d_x, c_y, se_d, se_c),
        D=QcrPoint(d_x, 0.0, se_d, 0.0),
        meta=RegionMeta(trials, master_seed, network.describe()),
    )


def _same(p: tuple[float, float], q: tuple[float, float]) -> bool:
    return abs(p[0] - q[0]) < DEDUP_TOL and abs(p[1] - q[1]) < DEDUP_TOL


def region_polyline(region: CapacityRegion) -> list[tuple[float, float]]:
    """Frontier vertices A, B, sweep samples, C, D.

    Along the result x is non-decreasing, y is non-increasing and no two
    consecutive vertices coincide (B on A or C on D collapse). The only
    repeated x is the vertical C-D rise. Sweep samples that would fold the
    frontier back on itself under sampling noise are skipped.
    """
    a, b, c, d = ((p.x, p.y) for p in (region.A, region.B, region.C, region.D))
    inner = sorted(
        ((s.x, s.y) for s in region.boundary or ()),
        key=lambda v: (v[0], -v[1]),
    )
    candidates = [(b, True), *((v, False) for v in inner), (c, True), (d, True)]
    vertices = [a]
    for v, corner in candidates:
        last = vertices[-1]
        if _same(v, last):
            continue
        if not corner:
            inside = b[0] < v[0] < c[0] and c[1] < v[1] < b[1]
            if not inside or v[0] <= last[0] or v[1] > last[1]:
                continue
        vertices.append(v)
    return vertices
