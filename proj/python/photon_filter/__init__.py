"""Single-photon master equations and quantum filters."""

import numpy as np

from ._photon import (
    DimensionError,
    FilterError,
    IntegrationError,
    InvariantError,
    MeasurementRecord,
    Pulse,
    SLHTriple,
    generate_record,
    integrate_master,
    integrate_vacuum_master,
    lindblad_heisenberg,
    lindblad_schrodinger,
    run_ensemble,
    run_filter,
    series_product,
    two_level_system,
    twolevel,
)

# Basis: index 0 is the ground state.
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
POPULATION = np.array([[0, 0], [0, 1]], dtype=complex)

__all__ = [
    "DimensionError",
    "FilterError",
    "IntegrationError",
    "InvariantError",
    "MeasurementRecord",
    "POPULATION",
    "Pulse",
    "SLHTriple",
    "SX",
    "SY",
    "SZ",
    "generate_record",
    "integrate_master",
    "integrate_vacuum_master",
    "lindblad_heisenberg",
    "lindblad_schrodinger",
    "run_ensemble",
    "run_filter",
    "series_product",
    "two_level_system",
    "twolevel",
]
