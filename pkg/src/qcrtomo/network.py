"""Time-slot simulation of a rooted star network.

Each slot every user node sends half of a Bell pair to the switch, the switch
serves at most one root-leaf request (falling back to a backup leaf when the
prioritized leaf's qubit was lost), and unused link entanglement is dropped.
Nodes are numbered ``1..node_count``; channel ``i`` joins node ``i`` to the
switch.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .channel import (
    NOISELESS,
    ChannelNoise,
    LinkEntanglement,
    ParityResult,
    RandomStream,
    entanglement_swap,
    establish_link,
    parity_check,
)
from .rng import Substream, seed_key, uniform


class ConfigurationError(ValueError):
    """Invalid network, request or run parameters."""


@dataclass(frozen=True)
class StarNetwork:
    node_count: int
    root: int
    channels: Mapping[int, ChannelNoise] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if int(self.node_count) != self.node_count or self.node_count < 3:
            raise ConfigurationError(f"node_count must be an integer >= 3, got {self.node_count!r}")
        if self.root not in self.nodes:
            raise ConfigurationError(f"root {self.root!r} is not a node of a {self.node_count}-node star")
        extra = set(self.channels) - set(self.nodes)
        if extra:
            raise ConfigurationError(f"channels given for unknown nodes {sorted(extra)}")
        full = {node: self.channels.get(node, NOISELESS) for node in self.nodes}
        for node, noise in full.items():
            if not isinstance(noise, ChannelNoise):
                raise ConfigurationError(f"channel {node} must be a ChannelNoise, got {type(noise).__name__}")
        object.__setattr__(self, "channels", full)

    @classmethod
    def noiseless(cls, node_count: int = 3, root: int = 1) -> "StarNetwork":
        return cls(node_count, root)

    @classmethod
    def from_rates(
        cls,
        losses: Sequence[float],
        flips: Optional[Sequence[float]] = None,
        root: int = 1,
    ) -> "StarNetwork":
        """Network from per-channel loss and bit-flip probabilities, channel 1 first."""
        flips = flips if flips is not None else [0.0] * len(losses)
        if len(flips) != len(losses):
            raise ConfigurationError("losses and flips must have one entry per channel")
        channels = {
            i + 1: ChannelNoise.from_error_rates(loss, flip) for i, (loss, flip) in enumerate(zip(losses, flips))
        }
        return cls(len(losses), root, channels)

    @property
    def nodes(self) -> range:
        return range(1, int(self.node_count) + 1)

    @property
    def leaves(self) -> list[int]:
        return [node for node in self.nodes if node != self.root]

    def rerooted(self, root: int) -> "StarNetwork":
        return StarNetwork(self.node_count, root, self.channels)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Survival and flip-fidelity vectors indexed by ``node - 1``."""
        survival = np.array([self.channels[n].survival for n in self.nodes], dtype=np.float64)
        fidelity = np.array([self.channels[n].flip_fidelity for n in self.nodes], dtype=np.float64)
        return survival, fidelity

    def describe(self) -> str:
        parts = [
            f"QC{n}(loss={self.channels[n].loss:.6g},flip={self.channels[n].flip:.6g})" for n in self.nodes
        ]
        return f"root=N{self.root} " + " ".join(parts)


@dataclass(frozen=True)
class SlotRequest:
    primary_leaf: int
    backup_leaf: Optional[int] = None


class SlotOutcome(enum.IntEnum):
    FULFILLED_PRIMARY = 0
    FULFILLED_BACKUP = 1
    FAILED_ROOT_LOSS = 2
    FAILED_LEAF_LOSS = 3
    FAILED_PARITY = 4

    @property
    def fulfilled(self) -> bool:
        return self in (SlotOutcome.FULFILLED_PRIMARY, SlotOutcome.FULFILLED_BACKUP)


@dataclass(frozen=True)
class TrialTally:
    trials: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(SlotOutcome):
            raise ValueError("one count per SlotOutcome expected")
        if sum(self.counts) != self.trials:
            raise ValueError(f"counts sum to {sum(self.counts)}, expected {self.trials}")

    @classmethod
    def from_outcomes(cls, outcomes: Iterable[SlotOutcome]) -> "TrialTally":
        counts = [0] * len(SlotOutcome)
        for outcome in outcomes:
            counts[outcome] += 1
        return cls(sum(counts), tuple(counts))

    def __getitem__(self, outcome: SlotOutcome) -> int:
        return self.counts[outcome]

    def rate(self, outcome: SlotOutcome) -> float:
        return self.counts[outcome] / self.trials

    def as_dict(self) -> dict[str, int]:
        return {outcome.name: self.counts[outcome] for outcome in SlotOutcome}


class BoundarySample(NamedTuple):
    fraction: float
    x: float
    y: float
    se_x: float
    se_y: float


def validate_request(network: StarNetwork, request: SlotRequest) -> None:
    nodes = set(network.nodes)
    if request.primary_leaf not in nodes:
        raise ConfigurationError(f"primary leaf {request.primary_leaf!r} is not a node")
    if request.primary_leaf == network.root:
        raise ConfigurationError("primary leaf must differ from the root")
    if request.backup_leaf is not None:
        if request.backup_leaf not in nodes:
            raise ConfigurationError(f"backup leaf {request.backup_leaf!r} is not a node")
        if request.backup_leaf in (network.root, request.primary_leaf):
            raise ConfigurationError("backup leaf must differ from the root and the primary leaf")


def resolve_slot(links: Mapping[int, LinkEntanglement], root: int, request: SlotRequest) -> SlotOutcome:
    """Switch decision for one slot given every node's link record."""
    if not links[root].present:
        return SlotOutcome.FAILED_ROOT_LOSS
    if links[request.primary_leaf].present:
        leaf, success = request.primary_leaf, SlotOutcome.FULFILLED_PRIMARY
    elif request.backup_leaf is not None and links[request.backup_leaf].present:
        leaf, success = request.backup_leaf, SlotOutcome.FULFILLED_BACKUP
    else:
        return SlotOutcome.FAILED_LEAF_LOSS
    result = parity_check(entanglement_swap(links[root], links[leaf]))
    return success if result is ParityResult.FULFILLED else SlotOutcome.FAILED_PARITY


def run_slot(network: StarNetwork, request: SlotRequest, rng: RandomStream) -> SlotOutcome:
    validate_request(network, request)
    # ascending node order, two draws per channel; the batch kernels rely on this layout
    links = {node: establish_link(network.channels[node], rng) for node in network.nodes}
    return resolve_slot(links, network.root, request)


def _check_trials(trials: int) -> int:
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ConfigurationError(f"trials must be an integer >= 1, got {trials!r}")
    return int(trials)


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(int(workers), trials))
    edges = np.linspace(0, trials, workers + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _batch_counts(
    network: StarNetwork,
    first: int,
    second: int,
    p_first: float,
    use_backup: bool,
    trials: int,
    master_seed: int,
    workers: int,
    backend: Optional[str],
) -> np.ndarray:
    survival, fidelity = network.arrays()
    key = seed_key(master_seed)
    args = (survival, fidelity, network.root - 1, first - 1, second - 1, p_first, use_backup, key)
    chunks = _chunks(trials, workers)
    if len(chunks) == 1:
        return _kernels.slot_counts(*args, 0, trials, backend=backend)
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = pool.map(lambda c: _kernels.slot_counts(*args, c[0], c[1], backend=backend), chunks)
        return np.sum(list(parts), axis=0)


def run_trials(
    network: StarNetwork,
    request: SlotRequest,
    trials: int,
    master_seed: int,
    workers: int = 1,
    backend: Optional[str] = None,
) -> TrialTally:
    """Tally ``trials`` independent slots; trial ``t`` uses the substream of ``(master_seed, t)``.

    The result is identical for any ``workers`` and either kernel backend.
    """
    validate_request(network, request)
    trials = _check_trials(trials)
    if request.backup_leaf is not None:
        second, use_backup = request.backup_leaf, True
    else:
        second = next(n for n in network.leaves if n != request.primary_leaf)
        use_backup = False
    counts = _batch_counts(
        network, request.primary_leaf, second, 1.0, use_backup, trials, master_seed, workers, backend
    )
    return TrialTally(trials, tuple(int(c) for c in counts[: len(SlotOutcome)]))


def run_trials_scalar(network: StarNetwork, request: SlotRequest, trials: int, master_seed: int) -> TrialTally:
    """Slot-by-slot reference for :func:`run_trials` (slow; used for cross-checks)."""
    validate_request(network, request)
    trials = _check_trials(trials)
    return TrialTally.from_outcomes(
        run_slot(network, request, Substream.for_trial(master_seed, t)) for t in range(trials)
    )


def mixed_slot(
    network: StarNetwork, pair: tuple[int, int], fraction: float, rng: Substream
) -> tuple[SlotOutcome, Optional[int]]:
    """One slot of the mixed policy: prioritize ``pair[0]`` with probability ``fraction``.

    Returns the outcome and the leaf that was served (None if unfulfilled).
    The prioritization draw sits after all channel draws in the substream.
    """
    j, k = pair
    choice = uniform(rng.key, 2 * network.node_count)
    request = SlotRequest(j, k) if choice < fraction else SlotRequest(k, j)
    outcome = run_slot(network, request, rng)
    if outcome is SlotOutcome.FULFILLED_PRIMARY:
        return outcome, request.primary_leaf
    if outcome is SlotOutcome.FULFILLED_BACKUP:
        return outcome, request.backup_leaf
    return outcome, None


def _check_pair(network: StarNetwork, pair: Sequence[int]) -> tuple[int, int]:
    if len(pair) != 2:
        raise ConfigurationError(f"pair must name two leaves, got {pair!r}")
    j, k = int(pair[0]), int(pair[1])
    leaves = network.leaves
    if j not in leaves or k not in leaves or j == k:
        raise ConfigurationError(f"pair {pair!r} must be two distinct leaves of root N{network.root}")
    return j, k


def sweep_mixed(
    network: StarNetwork,
    pair: Sequence[int],
    fractions: Sequence[float],
    trials: int,
    master_seed: int,
    workers: int = 1,
    backend: Optional[str] = None,
) -> list[BoundarySample]:
    """Boundary samples between the backup corners of the capacity region.

    For fraction ``p`` each slot prioritizes ``pair[0]`` with probability
    ``p`` (backup ``pair[1]``) and otherwise the reverse. ``y`` is the rate of
    fulfilled pairs with ``pair[0]``, ``x`` with ``pair[1]``. Every fraction
    reuses ``master_seed`` (common random numbers), which keeps the samples
    ordered along the boundary.
    """
    from .qcr import standard_error

    j, k = _check_pair(network, pair)
    trials = _check_trials(trials)
    samples = []
    for p in fractions:
        if not 0.0 <= p <= 1.0:
            raise ConfigurationError(f"sweep fraction must lie in [0, 1], got {p!r}")
        counts = _batch_counts(network, j, k, float(p), True, trials, master_seed, workers, backend)
        y = int(counts[5]) / trials
        x = int(counts[6]) / trials
        samples.append(BoundarySample(float(p), x, y, standard_error(x, trials), standard_error(y, trials)))
    return samples
