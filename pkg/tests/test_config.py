import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcrtomo.config import ConfigError, ScenarioConfig, dump_config, load_config, parse_config, validate

GREEN = """\
# comment line
scenario.id = green
network.nodes = 3
network.root = 1
channel.1.loss = 0.1   # trailing comment
channel.1.flip = 0.1
channel.3.loss = 0.3
channel.3.flip = 0.3
run.trials = 5000
run.seed = 42
run.pair = 3,2
sweep.fractions = 0, 0.5, 1
"""


def test_parse_fields():
    cfg = parse_config(GREEN)
    assert cfg.scenario_id == "green"
    assert cfg.losses == {1: 0.1, 3: 0.3} and cfg.flips == {1: 0.1, 3: 0.3}
    assert (cfg.trials, cfg.seed, cfg.pair) == (5000, 42, (3, 2))
    assert cfg.fractions == (0.0, 0.5, 1.0)
    net = cfg.network()
    assert net.channels[2].survival == 1.0
    assert net.channels[3].survival == pytest.approx(0.7)


def test_defaults():
    cfg = parse_config("network.nodes = 3\n")
    assert cfg.trials == 10_000 and cfg.root == 1
    assert cfg.leaf_pair() == (2, 3)
    assert len(cfg.sweep_fractions()) == 11


@pytest.mark.parametrize(
    "text, key, line",
    [
        ("network.nodes = 3\nchannel.2.loss = 1.3\n", "channel.2.loss", 2),
        ("channel.2.flip = -0.1\n", "channel.2.flip", 1),
        ("run.trials = ten\n", "run.trials", 1),
        ("run.trials = 0\n", "run.trials", 1),
        ("network.root = 4\n", "network.root", 1),
        ("\n\nchannel.9.loss = 0.1\n", "channel.9.loss", 3),
        ("run.pair = 1,2\n", "run.pair", 1),
        ("run.pair = 2\n", "run.pair", 1),
        ("bogus.key = 1\n", "bogus.key", 1),
        ("run.seed = 1\nrun.seed = 2\n", "run.seed", 2),
        ("sweep.fractions = 0, 2\n", "sweep.fractions", 1),
        ("run.seed = -4\n", "run.seed", 1),
    ],
)
def test_field_level_diagnostics(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert info.value.line == line
    assert key in str(info.value) and f"line {line}" in str(info.value)


def test_malformed_line():
    with pytest.raises(ConfigError) as info:
        parse_config("network.nodes = 3\nthis is not valid\n")
    assert info.value.line == 2


def test_roundtrip_example():
    cfg = parse_config(GREEN)
    assert parse_config(dump_config(cfg)) == cfg


prob = st.floats(0.0, 1.0, allow_nan=False)


@given(
    st.integers(3, 6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.integers(1, n),
            st.dictionaries(st.integers(1, n), prob, max_size=n),
            st.dictionaries(st.integers(1, n), prob, max_size=n),
        )
    ),
    st.integers(1, 10**6),
    st.integers(0, 2**64 - 1),
    st.one_of(st.none(), st.lists(prob, min_size=1, max_size=5).map(tuple)),
    st.text(st.characters(whitelist_categories=("L", "N"), whitelist_characters="-_"), min_size=1, max_size=12),
    st.booleans(),
)
def test_roundtrip_property(net, trials, seed, fractions, name, all_roots):
    n, root, losses, flips = net
    cfg = validate(
        ScenarioConfig(
            scenario_id=name, node_count=n, root=root, losses=losses, flips=flips,
            trials=trials, seed=seed, fractions=fractions, all_roots=all_roots, out_dir="out/dir",
        )
    )
    assert parse_config(dump_config(cfg)) == cfg


def test_override():
    cfg = parse_config(GREEN)
    moved = cfg.override(root=2, trials=100)
    assert moved.root == 2 and moved.trials == 100
    assert moved.pair is None and moved.leaf_pair() == (1, 3)
    with pytest.raises(ConfigError):
        cfg.override(pair=(1, 1))


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")
