"""Region-of-attraction certificates for perturbed nonlinear control systems.

Typical use::

    from stabcert import load_system, synthesize, certify, integrate, verify_envelope

    system = load_system("system.json")
    cert = certify(system, margin=0.01)
    traj = integrate(system, cert.synthesis, system.initial_state, (0.0, 60.0), 1e-3)
    report = verify_envelope(traj, cert)
"""

from .certifier import (
    Certificate,
    RemainderModel,
    certify,
    envelope,
    epsilon0_from_model,
    gamma0_max,
    remainder_bound_auto,
    remainder_bound_manual,
    solve_delta,
)
from .errors import (
    CertificationInfeasible,
    CertificationUnsupported,
    DecayOrderError,
    DeltaInfeasibleError,
    DimensionError,
    SchemaError,
    StabCertError,
    StabilityConditionError,
    UncontrollableError,
)
from .gronwall import SampledFunction, gronwall_bound
from .io import load_system, parse_system
from .linalg import eigendecompose, eta_condition, numerical_rank, spectral_norm
from .scenarios import example1_system
from .simulator import (
    Trajectory,
    eventual_las_metrics,
    integrate,
    sweep_roa,
    verify_envelope,
)
from .synthesis import (
    GainSynthesis,
    adopt_gain,
    controllability_matrix,
    is_controllable,
    place_poles,
    synthesize,
)
from .sysmodel import (
    PerturbationSpec,
    PolynomialTerm,
    PolynomialVectorField,
    SystemDefinition,
    evaluate_closed_loop,
    evaluate_field,
    jacobians_at_origin,
    remainder_evaluate,
)

__version__ = "0.1.0"
