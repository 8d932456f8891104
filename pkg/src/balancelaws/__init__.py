"""Random-choice solver for 1-D quasilinear hyperbolic balance laws."""

from .systems import (
    GNL, LD, FieldCharacter, PhaseBox, SystemDef, OutOfPhaseBox,
    euler_duct_system, euler_system, make_time_source, ode_system, p_system,
    scalar_system,
)
from .riemann import (
    NoSolution, Wave, WaveFan, WaveKind, sample_fan, solve_classical,
    wave_strengths,
)
from .generalized import (
    CflViolated, GeneralizedFan, TestFunction, cfl_check, corrected_residual,
    evaluate_generalized, product_bump, residual_delta, solve_generalized,
)
from .scheme import (
    MeshLevel, RunResult, SchemeConfig, SeededUniform, VanDerCorput,
    initialize, run, run_classical, sample_step, solve_level_fans,
    van_der_corput,
)
from .functionals import (
    EntropyPair, LevelDiagnostics, SupportExceedsWindow, WaveStrengths,
    approaching, check_glimm_estimate, check_perturbed_estimate,
    entropy_residual, interaction_potential, level_functionals,
    square_entropy, total_variation, weak_residual,
)

__version__ = "0.1.0"
