"""Lossy bit-flip channel in the Pauli frame.

A transmitted qubit is erased with probability ``1 - survival``; if it arrives
it carries an X error with probability ``1 - flip_fidelity``. Since swapping
and the Z-basis parity check map such mixtures onto classical events, the
channel is tracked exactly as a (present, x_error) record relative to
``|phi+>``. No density matrices are needed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Protocol, Union


class RandomStream(Protocol):
    def random(self) -> float: ...


@dataclass(frozen=True)
class ChannelNoise:
    survival: float = 1.0
    flip_fidelity: float = 1.0

    def __post_init__(self) -> None:
        for name in ("survival", "flip_fidelity"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or math.isnan(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_error_rates(cls, loss: float = 0.0, flip: float = 0.0) -> "ChannelNoise":
        """Build from loss and bit-flip probabilities (``1 - survival``, ``1 - flip_fidelity``)."""
        for name, value in (("loss", loss), ("flip", flip)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
        return cls(1.0 - loss, 1.0 - flip)

    @property
    def loss(self) -> float:
        return 1.0 - self.survival

    @property
    def flip(self) -> float:
        return 1.0 - self.flip_fidelity


NOISELESS = ChannelNoise()


class TransmissionDistribution(NamedTuple):
    p_lost: float
    p_flip: float
    p_ok: float


@dataclass(frozen=True)
class Lost:
    pass


@dataclass(frozen=True)
class Delivered:
    flipped: bool


TransmissionOutcome = Union[Lost, Delivered]


@dataclass(frozen=True)
class LinkEntanglement:
    """Node-to-switch Bell pair. ``x_error`` is forced to False when absent."""

    present: bool
    x_error: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "present", bool(self.present))
        object.__setattr__(self, "x_error", bool(self.x_error) and self.present)


@dataclass(frozen=True)
class EndToEndPair:
    present: bool
    x_error: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "present", bool(self.present))
        object.__setattr__(self, "x_error", bool(self.x_error) and self.present)


class ParityResult(enum.Enum):
    FULFILLED = "fulfilled"
    FAILED_PARITY = "failed_parity"
    FAILED_ABSENT = "failed_absent"


def transmission_distribution(noise: ChannelNoise) -> TransmissionDistribution:
    p_lost = 1.0 - noise.survival
    p_flip = noise.survival * (1.0 - noise.flip_fidelity)
    p_ok = noise.survival * noise.flip_fidelity
    return TransmissionDistribution(p_lost, p_flip, p_ok)


def sample_transmission(noise: ChannelNoise, rng: RandomStream) -> TransmissionOutcome:
    # both draws are always consumed so the stream position does not depend on the outcome
    u_loss = rng.random()
    u_flip = rng.random()
    if u_loss >= noise.survival:
        return Lost()
    return Delivered(flipped=u_flip >= noise.flip_fidelity)


def establish_link(noise: ChannelNoise, rng: RandomStream) -> LinkEntanglement:
    outcome = sample_transmission(noise, rng)
    if isinstance(outcome, Lost):
        return LinkEntanglement(present=False)
    return LinkEntanglement(present=True, x_error=outcome.flipped)


def entanglement_swap(a: LinkEntanglement, b: LinkEntanglement) -> EndToEndPair:
    """Bell measurement at the switch; Pauli corrections are assumed perfect,
    so only the channel X errors survive, and two of them cancel."""
    present = a.present and b.present
    return EndToEndPair(present=present, x_error=present and (a.x_error != b.x_error))


def parity_check(pair: EndToEndPair) -> ParityResult:
    """Z-basis parity measurement. Destructive: the pair is consumed."""
    if not pair.present:
        return ParityResult.FAILED_ABSENT
    if pair.x_error:
        return ParityResult.FAILED_PARITY
    return ParityResult.FULFILLED
