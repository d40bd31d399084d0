"""Relativistic elliptic Rydberg wave packets: spectrum, radial integrals,
time evolution and observables of a Dirac-Coulomb coherent state."""

from .core_model import (
    ALPHA,
    CONSTANTS,
    DomainError,
    EllipticSpec,
    PhysicalConstants,
    WeightTable,
    average_angular_momentum,
    build_weight_table,
    weight_decay_profile,
)
from .dirac_coulomb import (
    DiracLevel,
    ExpansionBudget,
    RadialPair,
    dirac_level,
    exact_binding_energy,
    exact_energy,
    expansion_budget,
    fine_structure_energy,
    radial_pair,
)
from .packet import (
    AutocorrSeries,
    DegenerateMomentError,
    DensityGrid,
    EnergyMode,
    FrequencyTable,
    PacketState,
    SpinSeries,
    autocorrelation,
    autocorrelation_approx,
    build_packet,
    density_grid,
    precession_angle,
    ridge_eccentricity,
    spin_expectation,
)
from .radial_integrals import (
    QuadratureError,
    RadialIntegralSet,
    compute_integral_set,
    quadrature_selftest,
)
from .timescales import TimescaleReport, exact_mean_precession_time, precession_time

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
