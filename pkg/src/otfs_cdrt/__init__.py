"""Link-level simulator and outage analysis for OTFS-NOMA coordinated direct
and relay transmission."""

from .analysis import (
    CfSpec,
    InversionParams,
    NonDecayingCf,
    OutageInputs,
    analytic_outage,
    auto_tune_inversion,
    cf_theta,
    gil_pelaez_cdf,
    outage_special,
    outage_sum_rate,
    psi,
    special_exponents,
)
from .bessel import bessel_k1
from .channel import (
    LINKS,
    ChannelProfile,
    ChannelRealization,
    EigenSpectrum,
    GroupStructure,
    build_effective_matrix,
    draw_realization,
    eigen_spectrum,
    group_structure,
    theta,
)
from .frame import DdIndex, FrameParams, FrameTooSmall, linear_index, max_doppler, validate_frame
from .modem import PowerAllocation, SingularChannel, apply_dd_channel, isfft, sfft, superpose, zf_equalize
from .montecarlo import McConfig, OutageEstimate, estimate_outage, sample_theta
from .protocol import SCHEMES, RateTargets, Scenario, run_trial

__version__ = "0.1.0"
