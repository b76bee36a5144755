"""Single-ion probe extinction and EIT spectra in free space.

Library layout:

* :mod:`ionscatter.linalg` — dense complex-matrix primitives.
* :mod:`ionscatter.atoms` — level schemes and laser fields.
* :mod:`ionscatter.dynamics` — Lindblad generator, steady states, evolution.
* :mod:`ionscatter.scattering` — input-output transmission and fluorescence.
* :mod:`ionscatter.detection` — chopped-repumper lock-in measurement.
* :mod:`ionscatter.spectra` — parameter scans and Lorentzian fits.
* :mod:`ionscatter.config`/:mod:`ionscatter.cli` — config files and the CLI.
"""

from .atoms import (BariumRates, DecayChannel, LaserField, Level, LevelScheme,
                    Manifold, Polarization, SchemeKind, build_barium8,
                    build_lambda3, build_two_level, quadrature_linewidth,
                    rabi_for_saturation, raman_dephasing, saturation_parameter)
from .detection import ChopperConfig, LockInResult, calibrate_phase, lockin_measure
from .dynamics import (Liouvillian, build_hamiltonian, build_liouvillian, evolve,
                       ground_state, steady_state)
from .scattering import (CouplingGeometry, TransmissionPoint, epsilon_from_na,
                         fluorescence_rate, lambda_response,
                         response_from_steady_state, transmission,
                         two_level_response)
from .spectra import (LorentzianFit, ScanAxis, SpectrumTable, eit_metrics,
                      fit_lorentzian, scan)

__version__ = "0.1.0"

__all__ = [
    "BariumRates", "ChopperConfig", "CouplingGeometry", "DecayChannel",
    "LaserField", "Level", "LevelScheme", "Liouvillian", "LockInResult",
    "LorentzianFit", "Manifold", "Polarization", "ScanAxis", "SchemeKind",
    "SpectrumTable", "TransmissionPoint", "build_barium8", "build_hamiltonian",
    "build_lambda3", "build_liouvillian", "build_two_level", "calibrate_phase",
    "eit_metrics", "epsilon_from_na", "evolve", "fit_lorentzian",
    "fluorescence_rate", "ground_state", "lambda_response", "lockin_measure",
    "quadrature_linewidth", "rabi_for_saturation", "raman_dephasing",
    "response_from_steady_state", "saturation_parameter", "scan",
    "steady_state", "transmission", "two_level_response",
]
