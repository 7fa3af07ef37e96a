"""Many-body decoherence of stored Rydberg spin waves and single-photon subtraction."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .core import (FieldSpec, GateConfig, ModelParams, scattering_probability,  # noqa: E402
                   transmission_factor)
from .kernel import phi, phi_approx_sum, transmission_amplitude  # noqa: E402
from .retrieval import mean_retrieved, retrieval_efficiency  # noqa: E402
from .subtraction import fidelity, optimize_fidelity  # noqa: E402
from .absorber import AbsorberParams, absorber_fidelity, optimize_absorber  # noqa: E402

__all__ = [
    "BACKEND", "FieldSpec", "GateConfig", "ModelParams", "scattering_probability",
    "transmission_factor", "phi", "phi_approx_sum", "transmission_amplitude",
    "mean_retrieved", "retrieval_efficiency", "fidelity", "optimize_fidelity",
    "AbsorberParams", "absorber_fidelity", "optimize_absorber",
]
