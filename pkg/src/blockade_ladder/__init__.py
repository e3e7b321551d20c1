"""Dissipative dynamics of Rydberg-blockaded Lambda-type atom ensembles."""

from .ladder import (
    CollectiveRates,
    FlippingModel,
    LadderParams,
    LadderState,
    ensemble_spectrum_numeric,
    evolve_ladder,
    g2_numeric,
    ladder_generator,
    multiplicity,
    pj_numeric,
)
from .linsys import (
    CorrelationFunction,
    ExpectationTrajectory,
    Generator,
    NumericalError,
    OperatorBasis,
    Spectrum,
    correlation,
    integrate,
    seed_regression,
    spectrum_quadrature,
    spectrum_resolvent,
)
from .single_atom import (
    RateParams,
    RegimeTag,
    rabi_from_photon_rate,
    sfl_spectrum_analytic,
    single_atom_generator,
    wfl_spectrum_analytic,
)
from .decomposition import (
    FractionReport,
    PjTrajectory,
    evolve_pj,
    fractions,
    pj_closed_form,
    rabi_revival,
    relaxation_time_closed_form,
    relaxation_time_numeric,
    spectrum_analytic,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
