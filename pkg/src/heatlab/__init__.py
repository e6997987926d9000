"""heatlab: heat-kernel bounds and functional inequalities on finite graphs.

The package measures, on finite weighted-graph metric measure spaces, the
constants of the inequality families tied to diagonal heat-kernel decay
(Nash, Gagliardo-Nirenberg, Faber-Krahn and their localized variants),
verifies the identities and orderings connecting them, and implements the
constructive decay iteration for uniform volume gauges.
"""

from .space import (
    MetricMeasureSpace,
    VolumeGauge,
    DoublingProfile,
    TwoExponentEnvelope,
    ball_volume_gauge,
    bounded_covering,
    dirichlet_energy,
    doubling_profile,
    lp_norm,
    space_from_json,
    space_to_json,
)
from .builders import (
    GaugeSpec,
    PotentialSpec,
    build_glued,
    build_halfline_weighted,
    build_path,
    build_ring,
    build_torus,
    build_two_vertex,
    build_vicsek,
    dirichlet_restriction,
    from_edges,
    make_gauge,
    schrodinger,
    strong_positivity_margin,
)
from .spectral import (
    Generator,
    KernelOperator,
    NormEstimate,
    SpectralDecomposition,
    as_generator,
    davies_gaffney_ratio,
    gamma_minus,
    gamma_plus,
    heat_operator,
    opnorm,
    opnorm_bounds,
    propagation_residual,
    resolvent_power,
    spectral_filter,
    tstar_t_check,
    wave_operator,
    weighted_norm_functional,
)
from .inequalities import (
    ConstantEstimate,
    build_dictionary,
    default_ball_grid,
    due_constant,
    faber_krahn_constant,
    gn_constant,
    kigami_nash_constant,
    local_nash_constant,
    log_nash_constant,
    nash_constant,
    truncation_check,
)
from .nash import (
    RateFunction,
    compare_w_v,
    extrapolate_exponent,
    m_from_theta,
    theta_from_lognash,
    theta_from_nash,
    w_from_m,
)

__version__ = "0.1.0"
