"""qtlab: a numerical laboratory for quantum trajectories.

Evolves 1D wavefunctions spectrally, extracts the hydrodynamic and
weak-value momentum fields, integrates guidance-equation trajectory
bundles, builds Wigner/star-product phase-space objects, realizes the
commutator/anti-commutator operator dynamics, and exposes the classical
symplectic flows with their metaplectic double cover.
"""

from . import _kernels
from .errors import (
    BoundaryLeakError,
    CausticError,
    ConfigError,
    ConsistencyError,
    DegreeOverflowError,
    GridError,
    MaskError,
    QtlabError,
    ResolutionError,
    StabilityError,
    TruncationError,
    ValidationError,
)
from .evolution import (
    EvolutionConfig,
    Potential,
    SnapshotSeries,
    endpoint_momenta,
    energy,
    evolve,
    kernel_propagate,
    two_point_action,
)
from .grid import (
    Grid1D,
    MomentumWaveFunction,
    WaveFunction,
    inner,
    make_gaussian,
    spectral_derivative,
    superpose,
    to_momentum,
    to_position,
)
from .madelung import (
    MadelungFields,
    WeakValueField,
    bohm_osmotic_split,
    continuity_residual,
    decompose,
    qhj_residual,
    qhj_residual_p,
    weak_momentum,
)
from .operator_dynamics import (
    BasisConfig,
    DensityMatrix,
    anticommutator_residual,
    coherent_vector,
    evolve_commutator,
    exact_conjugation,
    projected_pair,
    schrodinger_states,
)
from .phase_space import (
    PolyObservable,
    WignerGrid,
    baker_bracket,
    conditional_momentum,
    moyal_bracket,
    poisson_bracket,
    star,
    wigner,
)
from .symplectic import (
    GaussianState,
    GeneratingFunction,
    QuadHamiltonian,
    SymplecticMap,
    classical_flow,
    full_period_phase,
    generating_function,
    metaplectic_step,
    projection_check,
)
from .trajectories import (
    TrajectoryBundle,
    TwoSlitScenario,
    hamilton_check,
    integrate_bundle,
    quantum_potential_along,
    run_two_slit,
    stratified_seeds,
)

__version__ = "0.1.0"

kernel_backend = _kernels.get_backend
