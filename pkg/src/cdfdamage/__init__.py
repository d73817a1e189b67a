"""CDF-generated damage laws, their 1D/2D response, and fracture evolution tools."""

__version__ = "0.1.0"

from .damage_laws import DamageLaw, calibrate_length, damage, degradation, psi, taylor_coefficients
from .distributions import DistributionSpec, MomentResult, cdf, moment_closed, moment_numeric, pdf
from .response_driver import PathRecord, PeakResponse, chi_square_demo, dissipated_envelope, drive_path, peak_response

__all__ = [
    "DamageLaw",
    "DistributionSpec",
    "MomentResult",
    "PathRecord",
    "PeakResponse",
    "calibrate_length",
    "cdf",
    "chi_square_demo",
    "damage",
    "degradation",
    "dissipated_envelope",
    "drive_path",
    "moment_closed",
    "moment_numeric",
    "pdf",
    "peak_response",
    "psi",
    "taylor_coefficients",
]
