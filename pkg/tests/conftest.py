import pytest

from qcrtomo import StarNetwork

# Fig. 3 green model: QC1, QC2 at 10% loss / 10% flip, QC3 at 30% / 30%
HETERO_LOSSES = (0.1, 0.1, 0.3)
HETERO_FLIPS = (0.1, 0.1, 0.3)
# hand substitution into the corner formulas for the model above
HETERO_POINTS = {"A.y": 0.66420, "B.x": 0.04158, "C.y": 0.19926, "D.x": 0.41580}


@pytest.fixture
def noiseless():
    return StarNetwork.noiseless()


@pytest.fixture
def hetero():
    return StarNetwork.from_rates(HETERO_LOSSES, HETERO_FLIPS)


@pytest.fixture
def leaf2_loss():
    return StarNetwork.from_rates([0.0, 0.15, 0.0])


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="scenario.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
