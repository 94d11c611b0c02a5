"""Loss tomography from capacity-region reference points.

The closed-form corners of a rooted star region factor into a root-leaf path
success term times leaf survival factors, so the ratios ``B.x / D.x`` and
``C.y / A.y`` reduce to the loss of leaf ``j`` and leaf ``k`` respectively,
independent of every bit-flip rate. The root's own channel becomes observable
after re-rooting the star on another node.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .channel import ChannelNoise, LinkEntanglement, transmission_distribution
from .network import ConfigurationError, SlotOutcome, SlotRequest, StarNetwork, resolve_slot, validate_request
from .qcr import CapacityRegion, estimate_reference_points
from .rng import derive_seed

SIGMA_GUARD = 3.0


class InferenceUndefined(ArithmeticError):
    """A ratio denominator is not significantly above zero (dead or near-dead path)."""

    def __init__(self, point: str, channel: int, value: float, se: float) -> None:
        self.point = point
        self.channel = channel
        self.value = value
        self.se = se
        super().__init__(
            f"loss of QC{channel} undefined: point {point} = {value:.6g} (se {se:.3g}) "
            f"is not above zero at {SIGMA_GUARD:g} sigma"
        )


@dataclass(frozen=True)
class AnalyticPoints:
    A: tuple[float, float]
    B: tuple[float, float]
    C: tuple[float, float]
    D: tuple[float, float]
    root: int = 1
    pair: tuple[int, int] = (2, 3)


def _path_success(root: ChannelNoise, leaf: ChannelNoise) -> float:
    # both qubits arrive and carry matching X errors (none, or two that cancel)
    t1, t2 = root.flip_fidelity, leaf.flip_fidelity
    return root.survival * leaf.survival * (t1 * t2 + (1.0 - t1) * (1.0 - t2))


def closed_form_points(
    root_noise: ChannelNoise,
    leaf_j_noise: ChannelNoise,
    leaf_k_noise: ChannelNoise,
    root: int = 1,
    pair: tuple[int, int] = (2, 3),
) -> AnalyticPoints:
    a_y = _path_success(root_noise, leaf_j_noise)
    d_x = _path_success(root_noise, leaf_k_noise)
    b_x = (1.0 - leaf_j_noise.survival) * d_x
    c_y = (1.0 - leaf_k_noise.survival) * a_y
    return AnalyticPoints(A=(0.0, a_y), B=(b_x, a_y), C=(d_x, c_y), D=(d_x, 0.0), root=root, pair=tuple(pair))


def closed_form_for(network: StarNetwork, pair: Sequence[int], root: Optional[int] = None) -> AnalyticPoints:
    root = network.root if root is None else root
    j, k = pair
    ch = network.channels
    return closed_form_points(ch[root], ch[j], ch[k], root=root, pair=(j, k))


def enumerate_exact(network: StarNetwork, request: SlotRequest) -> dict[SlotOutcome, float]:
    """Exact outcome probabilities by summing the slot rule over every joint
    (lost / delivered-flipped / delivered-clean) atom of the involved channels."""
    validate_request(network, request)
    involved = [network.root, request.primary_leaf]
    if request.backup_leaf is not None:
        involved.append(request.backup_leaf)
    atoms = []
    for node in involved:
        dist = transmission_distribution(network.channels[node])
        atoms.append(
            [
                (LinkEntanglement(False), dist.p_lost),
                (LinkEntanglement(True, True), dist.p_flip),
                (LinkEntanglement(True, False), dist.p_ok),
            ]
        )
    probs = {outcome: 0.0 for outcome in SlotOutcome}
    for combo in itertools.product(*atoms):
        weight = math.prod(p for _, p in combo)
        links = {node: link for node, (link, _) in zip(involved, combo)}
        probs[resolve_slot(links, network.root, request)] += weight
    return probs


@dataclass(frozen=True)
class LossEstimate:
    channel: int
    loss: float
    se: float
    source_root: Optional[int]
    raw: float

    @classmethod
    def from_raw(cls, channel: int, raw: float, se: float, source_root: Optional[int]) -> "LossEstimate":
        return cls(channel, min(1.0, max(0.0, raw)), se, source_root, raw)


def _coords(region: Union[CapacityRegion, AnalyticPoints]) -> dict[str, tuple[float, float]]:
    """(value, se) for the four coordinates that carry information."""
    if isinstance(region, AnalyticPoints):
        return {
            "A.y": (region.A[1], 0.0),
            "B.x": (region.B[0], 0.0),
            "C.y": (region.C[1], 0.0),
            "D.x": (region.D[0], 0.0),
        }
    return {
        "A.y": (region.A.y, region.A.se_y),
        "B.x": (region.B.x, region.B.se_x),
        "C.y": (region.C.y, region.C.se_y),
        "D.x": (region.D.x, region.D.se_x),
    }


def _ratio(num: tuple[float, float], den: tuple[float, float]) -> tuple[float, float]:
    (n, se_n), (d, se_d) = num, den
    r = n / d
    if r == 0.0:
        # delta method collapses at zero; fall back to the numerator's own error
        return 0.0, se_n / d
    return r, abs(r) * math.sqrt((se_n / n) ** 2 + (se_d / d) ** 2)


def infer_leaf_loss(region: Union[CapacityRegion, AnalyticPoints], leaf: int) -> LossEstimate:
    """Loss of one leaf channel of ``region``: ``B.x/D.x`` for the y-axis leaf,
    ``C.y/A.y`` for the x-axis leaf."""
    j, k = region.pair
    coords = _coords(region)
    if leaf == j:
        num, den_name = coords["B.x"], "D.x"
    elif leaf == k:
        num, den_name = coords["C.y"], "A.y"
    else:
        raise ValueError(f"QC{leaf} is not a leaf of this region (pair {region.pair})")
    den = coords[den_name]
    if den[0] - SIGMA_GUARD * den[1] <= 0.0:
        raise InferenceUndefined(den_name[0], leaf, *den)
    raw, se = _ratio(num, den)
    return LossEstimate.from_raw(leaf, raw, se, region.root)


def infer_leaf_losses(region: Union[CapacityRegion, AnalyticPoints]) -> tuple[LossEstimate, LossEstimate]:
    j, k = region.pair
    return infer_leaf_loss(region, j), infer_leaf_loss(region, k)


def combine_estimates(estimates: Sequence[LossEstimate]) -> LossEstimate:
    """Inverse-variance mean. Exact (zero-error) estimates dominate any noisy ones."""
    if not estimates:
        raise ValueError("nothing to combine")
    channel = estimates[0].channel
    if len(estimates) == 1:
        e = estimates[0]
        return LossEstimate(channel, e.loss, e.se, None, e.raw)
    exact = [e for e in estimates if e.se == 0.0]
    if exact:
        raw = sum(e.raw for e in exact) / len(exact)
        return LossEstimate.from_raw(channel, raw, 0.0, None)
    weights = [1.0 / e.se**2 for e in estimates]
    total = sum(weights)
    raw = sum(w * e.raw for w, e in zip(weights, estimates)) / total
    return LossEstimate.from_raw(channel, raw, math.sqrt(1.0 / total), None)


@dataclass
class ChannelReport:
    channel: int
    estimates: list[LossEstimate] = field(default_factory=list)
    failures: list[InferenceUndefined] = field(default_factory=list)
    combined: Optional[LossEstimate] = None

    @property
    def ok(self) -> bool:
        return self.combined is not None


@dataclass
class TomographyReport:
    channels: dict[int, ChannelReport]
    regions: list[CapacityRegion]

    def losses(self) -> dict[int, Optional[float]]:
        return {ch: (r.combined.loss if r.combined else None) for ch, r in self.channels.items()}


def rooting_schedule(network: StarNetwork, all_roots: bool = False) -> list[tuple[int, tuple[int, int]]]:
    """(root, leaf pair) extractions so that every channel is a leaf at least once.

    Default roots are N1 and N2. Under each root the leaves are paired in
    ascending order; an odd leftover leaf is paired with the first leaf.
    """
    nodes = list(network.nodes)
    roots = nodes if all_roots else nodes[:2]
    plan = []
    for root in roots:
        leaves = [n for n in nodes if n != root]
        for i in range(0, len(leaves) - 1, 2):
            plan.append((root, (leaves[i], leaves[i + 1])))
        if len(leaves) % 2:
            plan.append((root, (leaves[-1], leaves[0])))
    return plan


def full_tomography(
    network: StarNetwork,
    trials: int,
    master_seed: int,
    all_roots: bool = False,
    workers: int = 1,
    backend: Optional[str] = None,
) -> TomographyReport:
    if network.node_count < 3:
        raise ConfigurationError("tomography needs at least three nodes")
    report = {node: ChannelReport(node) for node in network.nodes}
    regions = []
    for index, (root, pair) in enumerate(rooting_schedule(network, all_roots)):
        seed = derive_seed(master_seed, 1000 + index)
        region = estimate_reference_points(network, root, pair, trials, seed, workers, backend)
        regions.append(region)
        for leaf in pair:
            try:
                report[leaf].estimates.append(infer_leaf_loss(region, leaf))
            except InferenceUndefined as exc:
                report[leaf].failures.append(exc)
    for entry in report.values():
        if entry.estimates:
            entry.combined = combine_estimates(entry.estimates)
    return TomographyReport(report, regions)
