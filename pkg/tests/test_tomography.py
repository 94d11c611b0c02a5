import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcrtomo.channel import ChannelNoise
from qcrtomo.network import SlotOutcome, SlotRequest, StarNetwork
from qcrtomo.qcr import CapacityRegion, QcrPoint
from qcrtomo.tomography import (
    AnalyticPoints,
    InferenceUndefined,
    LossEstimate,
    closed_form_points,
    combine_estimates,
    enumerate_exact,
    full_tomography,
    infer_leaf_loss,
    infer_leaf_losses,
    rooting_schedule,
)

from conftest import HETERO_POINTS

probability = st.floats(0.0, 1.0, allow_nan=False)


def brute_force_corners(survival, fidelity):
    """Independent oracle: walk all 27 (lost / flipped / clean) atoms for root 1,
    leaves 2 and 3 and apply the backup rule inline."""
    atoms = []
    for s, f in zip(survival, fidelity):
        atoms.append([(None, 1 - s), (True, s * (1 - f)), (False, s * f)])
    a_y = b_x = c_y = d_x = 0.0
    for (r, pr), (l2, p2), (l3, p3) in itertools.product(*atoms):
        w = pr * p2 * p3
        if r is None:
            continue
        # request N1-N2 with backup N3
        if l2 is not None:
            a_y += w if l2 == r else 0.0
        elif l3 is not None:
            b_x += w if l3 == r else 0.0
        # request N1-N3 with backup N2
        if l3 is not None:
            d_x += w if l3 == r else 0.0
        elif l2 is not None:
            c_y += w if l2 == r else 0.0
    return {"A.y": a_y, "B.x": b_x, "C.y": c_y, "D.x": d_x}


def corners(points: AnalyticPoints):
    return {"A.y": points.A[1], "B.x": points.B[0], "C.y": points.C[1], "D.x": points.D[0]}


def test_brute_force_oracle_reproduces_hand_values():
    got = brute_force_corners((0.9, 0.9, 0.7), (0.9, 0.9, 0.7))
    for key, value in HETERO_POINTS.items():
        assert got[key] == pytest.approx(value, abs=1e-12)


def test_closed_form_examples():
    n = ChannelNoise()
    pts = closed_form_points(n, n, n)
    assert (pts.A, pts.B, pts.C, pts.D) == ((0.0, 1.0), (0.0, 1.0), (1.0, 0.0), (1.0, 0.0))

    pts = closed_form_points(ChannelNoise(0.85, 1.0), n, n)
    assert pts.A[1] == pts.D[0] == 0.85
    assert pts.B[0] == 0.0 and pts.C[1] == 0.0

    pts = closed_form_points(ChannelNoise(0.9, 0.9), ChannelNoise(0.9, 0.9), ChannelNoise(0.7, 0.7))
    for key, value in HETERO_POINTS.items():
        assert corners(pts)[key] == pytest.approx(value, abs=1e-12)
    assert pts.A[0] == 0.0 and pts.D[1] == 0.0 and pts.B[1] == pts.A[1] and pts.C[0] == pts.D[0]


@settings(max_examples=200)
@given(st.lists(probability, min_size=3, max_size=3), st.lists(probability, min_size=3, max_size=3))
def test_closed_form_matches_brute_force(survival, fidelity):
    noises = [ChannelNoise(s, f) for s, f in zip(survival, fidelity)]
    got = corners(closed_form_points(*noises))
    want = brute_force_corners(survival, fidelity)
    for key in want:
        assert abs(got[key] - want[key]) <= 1e-12


def test_enumerate_examples(noiseless, leaf2_loss, hetero):
    exact = enumerate_exact(noiseless, SlotRequest(2, 3))
    assert exact[SlotOutcome.FULFILLED_PRIMARY] == 1.0
    assert sum(v for k, v in exact.items() if k is not SlotOutcome.FULFILLED_PRIMARY) == 0.0

    exact = enumerate_exact(leaf2_loss, SlotRequest(2, 3))
    assert exact[SlotOutcome.FULFILLED_PRIMARY] == pytest.approx(0.85, abs=1e-15)
    assert exact[SlotOutcome.FULFILLED_BACKUP] == pytest.approx(0.15, abs=1e-15)

    exact = enumerate_exact(hetero, SlotRequest(2, 3))
    assert exact[SlotOutcome.FULFILLED_PRIMARY] == pytest.approx(0.66420, abs=1e-12)
    assert exact[SlotOutcome.FULFILLED_BACKUP] == pytest.approx(0.04158, abs=1e-12)
    assert sum(exact.values()) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100)
@given(st.lists(probability, min_size=4, max_size=4), st.lists(probability, min_size=4, max_size=4), st.integers(1, 4))
def test_enumeration_normalized_on_larger_stars(survival, fidelity, root):
    net = StarNetwork(4, root, {i + 1: ChannelNoise(s, f) for i, (s, f) in enumerate(zip(survival, fidelity))})
    leaves = net.leaves
    for request in (SlotRequest(leaves[0]), SlotRequest(leaves[0], leaves[2])):
        assert abs(sum(enumerate_exact(net, request).values()) - 1.0) <= 1e-12


def test_inference_on_analytic_points():
    pts = AnalyticPoints(A=(0, 0.66420), B=(0.04158, 0.66420), C=(0.41580, 0.19926), D=(0.41580, 0))
    j, k = infer_leaf_losses(pts)
    assert (j.channel, k.channel) == (2, 3)
    assert j.loss == pytest.approx(0.1, abs=1e-12)
    assert k.loss == pytest.approx(0.3, abs=1e-12)
    assert j.se == 0.0 and k.se == 0.0


def test_inference_noiseless():
    n = ChannelNoise()
    j, k = infer_leaf_losses(closed_form_points(n, n, n))
    assert (j.loss, k.loss) == (0.0, 0.0)


def test_ratio_uncertainty():
    region = CapacityRegion(
        1,
        (2, 3),
        A=QcrPoint(0, 0.66420, 0, 0.004),
        B=QcrPoint(0.04158, 0.66420, 0.002, 0.004),
        C=QcrPoint(0.41580, 0.19926, 0.005, 0.004),
        D=QcrPoint(0.41580, 0, 0.005, 0),
    )
    est = infer_leaf_loss(region, 2)
    assert est.loss == pytest.approx(0.1, abs=1e-12)
    # 0.1 * sqrt((0.002/0.04158)^2 + (0.005/0.4158)^2)
    assert est.se == pytest.approx(0.0049581, abs=5e-7)
    assert est.source_root == 1


def test_inference_undefined_names_point():
    dead_root = closed_form_points(ChannelNoise(0.0, 1.0), ChannelNoise(), ChannelNoise())
    with pytest.raises(InferenceUndefined) as info:
        infer_leaf_losses(dead_root)
    assert info.value.point == "D"
    with pytest.raises(InferenceUndefined) as info:
        infer_leaf_loss(dead_root, 3)
    assert info.value.point == "A"


def test_near_zero_denominator_rejected_at_3_sigma():
    region = CapacityRegion(
        1, (2, 3), QcrPoint(0, 0.5, 0, 0.005), QcrPoint(0.001, 0.5, 0.0003, 0.005),
        QcrPoint(0.002, 0.0, 0.0008, 0.0), QcrPoint(0.002, 0, 0.0008, 0),
    )
    with pytest.raises(InferenceUndefined):
        infer_leaf_loss(region, 2)
    assert infer_leaf_loss(region, 3).loss == 0.0


def test_clamping_keeps_raw():
    est = LossEstimate.from_raw(2, 1.02, 0.01, 1)
    assert est.loss == 1.0 and est.raw == 1.02
    est = LossEstimate.from_raw(2, -0.01, 0.01, 1)
    assert est.loss == 0.0 and est.raw == -0.01


@settings(max_examples=300)
@given(st.lists(probability, min_size=3, max_size=3), st.lists(probability, min_size=3, max_size=3))
def test_loss_ratio_independent_of_flips(survival, fidelity):
    pts = closed_form_points(*(ChannelNoise(s, f) for s, f in zip(survival, fidelity)))
    if pts.D[0] > 1e-6:
        assert abs(pts.B[0] / pts.D[0] - (1 - survival[1])) <= 1e-12
    if pts.A[1] > 1e-6:
        assert abs(pts.C[1] / pts.A[1] - (1 - survival[2])) <= 1e-12


@given(probability, probability)
def test_root_noise_equal_corners(s, f):
    pts = closed_form_points(ChannelNoise(s, f), ChannelNoise(), ChannelNoise())
    assert pts.A[1] == pts.D[0]


@given(st.lists(probability, min_size=3, max_size=3))
def test_bit_flips_alone_leave_no_backup_corners(fidelity):
    pts = closed_form_points(*(ChannelNoise(1.0, f) for f in fidelity))
    assert pts.B[0] == 0.0 and pts.C[1] == 0.0


half_to_one = st.floats(0.5, 1.0)


@given(
    st.lists(probability, min_size=3, max_size=3),
    st.lists(half_to_one, min_size=3, max_size=3),
    st.integers(0, 5),
    st.floats(0.0, 0.5),
)
def test_dedicated_rates_monotone(survival, fidelity, which, bump):
    values = survival + fidelity
    before = closed_form_points(*(ChannelNoise(s, f) for s, f in zip(values[:3], values[3:])))
    values[which] = min(1.0, values[which] + bump)
    after = closed_form_points(*(ChannelNoise(s, f) for s, f in zip(values[:3], values[3:])))
    assert after.A[1] >= before.A[1] - 1e-15
    assert after.D[0] >= before.D[0] - 1e-15


def test_combine_estimates():
    a = LossEstimate(3, 0.10, 0.01, 1, 0.10)
    b = LossEstimate(3, 0.20, 0.02, 2, 0.20)
    c = combine_estimates([a, b])
    assert c.loss == pytest.approx((0.10 / 1e-4 + 0.20 / 4e-4) / (1 / 1e-4 + 1 / 4e-4))
    assert c.se == pytest.approx(math.sqrt(1 / (1 / 1e-4 + 1 / 4e-4)))
    assert c.source_root is None
    exact = combine_estimates([a, LossEstimate(3, 0.0, 0.0, 2, 0.0)])
    assert (exact.loss, exact.se) == (0.0, 0.0)


def test_rooting_schedule():
    assert rooting_schedule(StarNetwork.noiseless()) == [(1, (2, 3)), (2, (1, 3))]
    plan = rooting_schedule(StarNetwork.noiseless(5))
    covered = {leaf for _, pair in plan for leaf in pair}
    assert covered == {1, 2, 3, 4, 5}
    assert len(rooting_schedule(StarNetwork.noiseless(), all_roots=True)) == 3


def test_full_tomography_noiseless(noiseless):
    report = full_tomography(noiseless, 1_000, 0)
    assert report.losses() == {1: 0.0, 2: 0.0, 3: 0.0}


def test_full_tomography_homogeneous_loss():
    net = StarNetwork.from_rates([0.1, 0.1, 0.1])
    report = full_tomography(net, 10_000, 17)
    for channel, entry in report.channels.items():
        for est in entry.estimates:
            assert abs(est.loss - 0.1) <= 3 * est.se, (channel, est)


def test_full_tomography_root_only_loss():
    net = StarNetwork.from_rates([0.15, 0.0, 0.0])
    report = full_tomography(net, 10_000, 23)
    by_root = {(e.channel, e.source_root): e for entry in report.channels.values() for e in entry.estimates}
    assert by_root[(2, 1)].loss == 0.0 and by_root[(3, 1)].loss == 0.0
    qc1 = by_root[(1, 2)]
    assert abs(qc1.loss - 0.15) <= 3 * qc1.se


def test_full_tomography_dead_root_partial():
    net = StarNetwork.from_rates([1.0, 0.0, 0.0])
    report = full_tomography(net, 2_000, 1)
    assert report.channels[1].combined.loss == 1.0
    assert report.channels[2].combined is None
    assert report.channels[3].combined is None
    assert report.channels[3].failures


def test_full_tomography_five_nodes():
    losses = [0.05, 0.1, 0.2, 0.15, 0.3]
    net = StarNetwork.from_rates(losses, [0.05] * 5)
    report = full_tomography(net, 10_000, 8)
    for channel, entry in report.channels.items():
        c = entry.combined
        assert abs(c.loss - losses[channel - 1]) <= 4 * c.se, channel


def test_interval_coverage_over_seeds():
    net = StarNetwork.from_rates([0.1, 0.1, 0.3], [0.1, 0.1, 0.3])
    truth = {1: 0.1, 2: 0.1, 3: 0.3}
    misses = {1: 0, 2: 0, 3: 0}
    for seed in range(200):
        report = full_tomography(net, 10_000, seed)
        for channel, entry in report.channels.items():
            c = entry.combined
            misses[channel] += abs(c.loss - truth[channel]) > 3 * c.se
    # nominal 3-sigma miss rate is 0.27%; allow for delta-method slack
    assert all(m <= 8 for m in misses.values()), misses
