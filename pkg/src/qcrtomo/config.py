"""Scenario files: flat ``dotted.key = value`` text.

Example::

    scenario.id = fig3-green
    network.nodes = 3
    network.root = 1
    channel.1.loss = 0.1
    channel.1.flip = 0.1
    channel.3.loss = 0.3
    run.trials = 10000
    run.seed = 7
    run.pair = 2,3
    sweep.fractions = 0, 0.25, 0.5, 0.75, 1

Loss and flip are error probabilities (``1 - survival``, ``1 - flip fidelity``).
Channels that are not listed are noiseless. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .network import ConfigurationError, StarNetwork

DEFAULT_TRIALS = 10_000
DEFAULT_FRACTIONS = tuple(i / 10 for i in range(11))

_CHANNEL_KEY = re.compile(r"^channel\.(\d+)\.(loss|flip)$")
_SIMPLE_KEYS = {
    "scenario.id",
    "network.nodes",
    "network.root",
    "run.trials",
    "run.seed",
    "run.pair",
    "run.workers",
    "run.all_roots",
    "sweep.fractions",
    "output.dir",
}


class ConfigError(ConfigurationError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None) -> None:
        self.key = key
        self.line = line
        where = []
        if key:
            where.append(f"field '{key}'")
        if line:
            where.append(f"line {line}")
        prefix = f"{' at '.join(where)}: " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str = "scenario"
    node_count: int = 3
    root: int = 1
    losses: dict[int, float] = field(default_factory=dict)
    flips: dict[int, float] = field(default_factory=dict)
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    pair: Optional[tuple[int, int]] = None
    fractions: Optional[tuple[float, ...]] = None
    out_dir: Optional[str] = None
    workers: int = 1
    all_roots: bool = False

    def network(self) -> StarNetwork:
        nodes = range(1, self.node_count + 1)
        return StarNetwork.from_rates(
            [self.losses.get(n, 0.0) for n in nodes],
            [self.flips.get(n, 0.0) for n in nodes],
            root=self.root,
        )

    def leaf_pair(self) -> tuple[int, int]:
        if self.pair is not None:
            return self.pair
        leaves = [n for n in range(1, self.node_count + 1) if n != self.root]
        return leaves[0], leaves[1]

    def sweep_fractions(self) -> tuple[float, ...]:
        return self.fractions if self.fractions is not None else DEFAULT_FRACTIONS

    def override(self, **changes) -> "ScenarioConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        if "root" in changes and "pair" not in changes and self.pair and changes["root"] in self.pair:
            changes["pair"] = None
        return validate(replace(self, **changes))


def _int(key: str, text: str, line: Optional[int]) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", key, line) from None


def _prob(key: str, text: str, line: Optional[int]) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key, line) from None
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"probability must lie in [0, 1], got {text}", key, line)
    return value


def _bool(key: str, text: str, line: Optional[int]) -> bool:
    lowered = text.lower()
    if lowered in {"true", "yes", "1", "on"}:
        return True
    if lowered in {"false", "no", "0", "off"}:
        return False
    raise ConfigError(f"expected true or false, got {text!r}", key, line)


def parse_pair(text: str, key: str = "run.pair", line: Optional[int] = None) -> tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected two comma-separated leaves, got {text!r}", key, line)
    return _int(key, parts[0], line), _int(key, parts[1], line)


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {}
    losses: dict[int, float] = {}
    flips: dict[int, float] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", None, lineno)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key, lineno)
        lines[key] = lineno
        if not value:
            raise ConfigError("missing value", key, lineno)

        m = _CHANNEL_KEY.match(key)
        if m:
            node = int(m.group(1))
            (losses if m.group(2) == "loss" else flips)[node] = _prob(key, value, lineno)
        elif key == "scenario.id":
            if "," in value or not value.isprintable():
                raise ConfigError("scenario id must be printable and contain no commas", key, lineno)
            values["scenario_id"] = value
        elif key == "network.nodes":
            values["node_count"] = _int(key, value, lineno)
        elif key == "network.root":
            values["root"] = _int(key, value, lineno)
        elif key == "run.trials":
            values["trials"] = _int(key, value, lineno)
        elif key == "run.seed":
            values["seed"] = _int(key, value, lineno)
        elif key == "run.workers":
            values["workers"] = _int(key, value, lineno)
        elif key == "run.all_roots":
            values["all_roots"] = _bool(key, value, lineno)
        elif key == "run.pair":
            values["pair"] = parse_pair(value, key, lineno)
        elif key == "sweep.fractions":
            values["fractions"] = tuple(_prob(key, part.strip(), lineno) for part in value.split(","))
        elif key == "output.dir":
            values["out_dir"] = value
        else:
            raise ConfigError(f"unknown key (known: {', '.join(sorted(_SIMPLE_KEYS))}, channel.<n>.loss|flip)", key, lineno)

    cfg = ScenarioConfig(losses=losses, flips=flips, **values)
    return validate(cfg, lines)


def validate(cfg: ScenarioConfig, lines: Optional[dict[str, int]] = None) -> ScenarioConfig:
    lines = lines or {}

    def fail(message: str, key: str):
        raise ConfigError(message, key, lines.get(key))

    if cfg.node_count < 3:
        fail(f"a star needs at least 3 user nodes, got {cfg.node_count}", "network.nodes")
    nodes = range(1, cfg.node_count + 1)
    if cfg.root not in nodes:
        fail(f"root {cfg.root} is not one of nodes 1..{cfg.node_count}", "network.root")
    for kind, table in (("loss", cfg.losses), ("flip", cfg.flips)):
        for node, value in table.items():
            key = f"channel.{node}.{kind}"
            if node not in nodes:
                fail(f"node {node} does not exist", key)
            if not 0.0 <= value <= 1.0:
                fail(f"probability must lie in [0, 1], got {value}", key)
    if cfg.trials < 1:
        fail(f"trials must be >= 1, got {cfg.trials}", "run.trials")
    if cfg.seed < 0 or cfg.seed >= 1 << 64:
        fail(f"seed must be an unsigned 64-bit integer, got {cfg.seed}", "run.seed")
    if cfg.workers < 1:
        fail(f"workers must be >= 1, got {cfg.workers}", "run.workers")
    if cfg.pair is not None:
        j, k = cfg.pair
        if j == k or j not in nodes or k not in nodes or cfg.root in (j, k):
            fail(f"pair {j},{k} must be two distinct leaves of root {cfg.root}", "run.pair")
    if cfg.fractions is not None:
        if not cfg.fractions:
            fail("at least one fraction is required", "sweep.fractions")
        for p in cfg.fractions:
            if not 0.0 <= p <= 1.0:
                fail(f"fraction must lie in [0, 1], got {p}", "sweep.fractions")
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    return parse_config(text)


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize so that ``parse_config(dump_config(c)) == c``."""
    out = [
        f"scenario.id = {cfg.scenario_id}",
        f"network.nodes = {cfg.node_count}",
        f"network.root = {cfg.root}",
    ]
    for node in sorted(set(cfg.losses) | set(cfg.flips)):
        if node in cfg.losses:
            out.append(f"channel.{node}.loss = {cfg.losses[node]!r}")
        if node in cfg.flips:
            out.append(f"channel.{node}.flip = {cfg.flips[node]!r}")
    out += [
        f"run.trials = {cfg.trials}",
        f"run.seed = {cfg.seed}",
        f"run.workers = {cfg.workers}",
        f"run.all_roots = {'true' if cfg.all_roots else 'false'}",
    ]
    if cfg.pair is not None:
        out.append(f"run.pair = {cfg.pair[0]},{cfg.pair[1]}")
    if cfg.fractions is not None:
        out.append("sweep.fractions = " + ", ".join(repr(p) for p in cfg.fractions))
    if cfg.out_dir is not None:
        out.append(f"output.dir = {cfg.out_dir}")
    return "\n".join(out) + "\n"
