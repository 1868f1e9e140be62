"""Quantum-limited estimation of loss in a bosonic channel with Gaussian probes."""

__version__ = "0.1.0"

from .gaussian import (  # noqa: E402
    ChannelPoint,
    GaussianState,
    ProbeSpec,
    evolve,
    make_channel_point,
    make_probe,
    mean_photon,
)
from .qfi import (  # noqa: E402
    crb_variance,
    qfi_coherent,
    qfi_dilation_bound,
    qfi_general,
    qfi_large_energy_asymptote,
    qfi_squeezed_vacuum,
    variance_phi_to_gamma,
    x_opt_asymptotic,
)

__all__ = [
    "ChannelPoint",
    "GaussianState",
    "ProbeSpec",
    "crb_variance",
    "evolve",
    "make_channel_point",
    "make_probe",
    "mean_photon",
    "qfi_coherent",
    "qfi_dilation_bound",
    "qfi_general",
    "qfi_large_energy_asymptote",
    "qfi_squeezed_vacuum",
    "variance_phi_to_gamma",
    "x_opt_asymptotic",
]
