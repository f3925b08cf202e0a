"""Leading-order non-adiabatic transition amplitudes on SU(2) and SU(1,1).

Spin flips in slowly rotating fields and over-barrier reflection share one
algebraic core: decompose the generator into a Cartan element and a moving
frame, then integrate the frame's non-adiabatic drift.  A brute-force group
propagator serves as the reference for every approximation.
"""

__version__ = "0.1.0"

from .adiabatic import (
    BarrierProfile,
    PathOnSphere,
    SpinFieldProfile,
    adiabaticity_ratio,
    born_amplitude,
    first_order_fourier_spinflip,
    gamma_element,
    generic_transition,
    geodesic_curvature,
    leading_order_probability,
    maitra_heller_amplitude,
    reflection_amplitude,
    spin_flip_amplitude,
    spin_phase_general,
    wkbj_wavefunction,
)
from .errors import (
    AlgebraError,
    ConvergenceError,
    DecompositionError,
    GroupConstraintError,
    NatransError,
    ProfileError,
    SignatureMismatchError,
    TabulatedProfileError,
)
from .estimators import TransitionEstimator, evaluate_point
from .lie import (
    AlgebraElement,
    CartanFrame,
    GroupElement,
    Signature,
    adjoint_deficit,
    adjoint_matrix,
    algebra_norm,
    cartan_decompose,
    commutator,
    exp_map,
    killing_form,
)
from .models import (
    LogisticBarrierParams,
    RosenZenerParams,
    TabulatedProfile,
    load_tabulated,
    logistic_adiabatic_transformed,
    logistic_exact,
    logistic_perturbative,
    logistic_profile,
    rosen_zener_adiabatic_transformed,
    rosen_zener_exact,
    rosen_zener_profile,
)
from .numerics import (
    CumulativeIntegral,
    QuadratureResult,
    QuadratureSpec,
    assoc_legendre,
    integrate_adaptive,
    integrate_improper_oscillatory,
    ode_propagate,
)
from .oracle import (
    DrivingProfile,
    ProjectorPair,
    TransitionResult,
    oracle_transition,
    reflection_probability,
    s_operator,
    transition_probability,
)
from .oscillator import (
    OscillatorSpec,
    TransitionMatrixSlice,
    excitation_pipeline,
    perelomov_popov_matrix,
    reduce_mass,
    theta_coefficient,
)

__all__ = [
    "TransitionEstimator",
    "evaluate_point",
    "__version__",
    "BarrierProfile",
    "PathOnSphere",
    "SpinFieldProfile",
    "adiabaticity_ratio",
    "born_amplitude",
    "first_order_fourier_spinflip",
    "gamma_element",
    "generic_transition",
    "geodesic_curvature",
    "leading_order_probability",
    "maitra_heller_amplitude",
    "reflection_amplitude",
    "spin_flip_amplitude",
    "spin_phase_general",
    "wkbj_wavefunction",
    "AlgebraError",
    "ConvergenceError",
    "DecompositionError",
    "GroupConstraintError",
    "NatransError",
    "ProfileError",
    "SignatureMismatchError",
    "TabulatedProfileError",
    "AlgebraElement",
    "CartanFrame",
    "GroupElement",
    "Signature",
    "adjoint_deficit",
    "adjoint_matrix",
    "algebra_norm",
    "cartan_decompose",
    "commutator",
    "exp_map",
    "killing_form",
    "LogisticBarrierParams",
    "RosenZenerParams",
    "TabulatedProfile",
    "load_tabulated",
    "logistic_adiabatic_transformed",
    "logistic_exact",
    "logistic_perturbative",
    "logistic_profile",
    "rosen_zener_adiabatic_transformed",
    "rosen_zener_exact",
    "rosen_zener_profile",
    "CumulativeIntegral",
    "QuadratureResult",
    "QuadratureSpec",
    "assoc_legendre",
    "integrate_adaptive",
    "integrate_improper_oscillatory",
    "ode_propagate",
    "DrivingProfile",
    "ProjectorPair",
    "TransitionResult",
    "oracle_transition",
    "reflection_probability",
    "s_operator",
    "transition_probability",
    "OscillatorSpec",
    "TransitionMatrixSlice",
    "excitation_pipeline",
    "perelomov_popov_matrix",
    "reduce_mass",
    "theta_coefficient",
]
