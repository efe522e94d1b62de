"""Power-splitting full-duplex amplify-and-forward relay: models, optimizers and outage simulation."""

from .model import (
    ChannelRealization,
    LinkSnrs,
    OscillationError,
    PartialCsi,
    RelayDecision,
    SinrBreakdown,
    SystemParams,
    esinr,
    harvested_energy,
    link_snrs,
    max_power_gain,
    relay_tx_power,
)
from .montecarlo import OutageEstimate, RngSpec, Scheme, conditional_outage_analytic, draw_channel, outage_mc
from .optimizer import PartialCsiRegions, Q1Problem, Q2Problem, fixed_rho, full_csi_rho, joint_exhaustive, partial_csi_rho
from .quartic import QuarticCoeffs, RealRoots, real_roots, roots_in_interval

__all__ = [
    "ChannelRealization",
    "LinkSnrs",
    "OscillationError",
    "PartialCsi",
    "RelayDecision",
    "SinrBreakdown",
    "SystemParams",
    "esinr",
    "harvested_energy",
    "link_snrs",
    "max_power_gain",
    "relay_tx_power",
    "OutageEstimate",
    "RngSpec",
    "Scheme",
    "conditional_outage_analytic",
    "draw_channel",
    "outage_mc",
    "PartialCsiRegions",
    "Q1Problem",
    "Q2Problem",
    "fixed_rho",
    "full_csi_rho",
    "joint_exhaustive",
    "partial_csi_rho",
    "QuarticCoeffs",
    "RealRoots",
    "real_roots",
    "roots_in_interval",
]
