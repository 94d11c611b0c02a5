"""Capacity-region loss tomography for rooted star quantum networks."""

from .channel import (
    ChannelNoise,
    Delivered,
    EndToEndPair,
    LinkEntanglement,
    Lost,
    ParityResult,
    entanglement_swap,
    establish_link,
    parity_check,
    sample_transmission,
    transmission_distribution,
)
from .network import (
    ConfigurationError,
    SlotOutcome,
    SlotRequest,
    StarNetwork,
    TrialTally,
    run_slot,
    run_trials,
    sweep_mixed,
)
from .qcr import CapacityRegion, QcrPoint, estimate_reference_points, region_polyline, standard_error
from .tomography import (
    AnalyticPoints,
    InferenceUndefined,
    LossEstimate,
    TomographyReport,
    closed_form_points,
    enumerate_exact,
    full_tomography,
    infer_leaf_losses,
)

__version__ = "0.1.0"
