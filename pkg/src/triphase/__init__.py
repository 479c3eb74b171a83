"""Lower bounds and optimal laminates for plane three-phase conducting
composites with one superconducting phase."""

from .core import (
    CompositeSpec,
    Loading,
    FieldComponents,
    ExtendedConductivity,
    decompose,
    reconstruct,
    determinant,
    energy_density,
    InvalidSpec,
    InfiniteEnergy,
    RegimeMismatch,
    AmbiguousRegion,
    DomainError,
    IncompatibleLoading,
    OutOfApplicability,
    InfeasibleTopology,
    EmptyRegion,
)
from .translation import (
    WellCase,
    Regime,
    PhaseAverages,
    well_value,
    translated_cell_energy_closed,
    translated_cell_energy_oracle,
    oracle_minimizer,
)
from .bounds import (
    Region,
    BoundResult,
    boundary_curves,
    classify_region,
    lower_bound,
    brute_force_bound,
    t_cr1,
    t_opt_C,
    phi_D2E_defining,
)
from .gclosure import (
    GClosurePoint,
    gclosure_point,
    gclosure_curve,
    comparison_bounds,
    envelope_residual,
)
from .laminate import (
    Leaf,
    Layering,
    PhaseField,
    StructureResult,
    effective_tensor,
    phase_fields,
    structure_energy,
    build_optimal_structure,
    optimize_structure_params,
    check_optimality_conditions,
    node_to_json,
    node_from_json,
    node_to_text,
)
from .verify import (
    GapRecord,
    attainability_sweep,
    region_E_gap_curve,
    incompatibility_witness,
    special_points,
    run_invariant_suite,
)

__version__ = "0.1.0"
