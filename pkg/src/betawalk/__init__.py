"""Exact simulation and limit theory for beta-nonintersecting Poisson walks."""

from .core import (
    ComplexProbeGrid,
    EmpiricalMeasure,
    JumpEvent,
    ParticleConfig,
    config_from_json,
    config_to_json,
    empirical_log_potential,
    empirical_stieltjes,
)
from .walker import (
    Trajectory,
    WalkerState,
    jump_weights,
    simulate,
    simulate_snapshots,
    step,
    update_weights_incremental,
)
from .exact_law import (
    charlier_density,
    enumerate_diagrams,
    exact_marginal_check,
    master_equation_law,
)
from .limit import (
    AnalyticField,
    InversionError,
    MeasureRep,
    characteristic_forward,
    characteristic_inverse,
    characteristic_lifetime,
    density_from_field,
    limit_derivs_on_characteristic,
    limit_field,
    limit_stieltjes,
    markov_krein_Q,
    nu_t_density,
    nu_t_measure,
    nu_t_stieltjes,
    nu_t_stieltjes_check,
    omega_membership,
    quantized_R,
    reflect_measure,
    stieltjes_of,
    uniform01_field,
)

__version__ = "0.1.0"
