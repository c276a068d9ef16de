"""Key generation rates for CV-QKD over multispan amplified optical links.

The package models Gaussian-modulated coherent-state key distribution
(GG02-style, heterodyne Alice / homodyne Bob) over a fiber link split into
M spans connected by phase-insensitive or phase-sensitive amplifiers, and
evaluates the secret key rate under unconditional security, under
composable security with a single untrusted span, and against the
Holevo-capacity upper bound.
"""

from .gaussian import (
    CovarianceMatrix,
    GaussianCPMap,
    MeasurementKind,
    apply_cp,
    beam_splitter_symplectic,
    condition_on_measurement,
    embed_on_modes,
    entropy_h,
    identity_map,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_cm,
    tmsv_cm,
    vacuum_cm,
    von_neumann_entropy,
)
from .link import (
    AmplifierKind,
    EffectiveChannel,
    LinkConfig,
    ProtocolCase,
    amplifier_map,
    check_power_constraint,
    continuous_limit_channel,
    effective_channel,
    gain_constraint_max,
    propagate_link,
    shared_cm,
    span_params,
    thermal_loss_map,
)
from .optimize import OptimizeResult, OptimizerSettings, bisect_sign_change, optimize_vg
from .unconditional import (
    KeyRateResult,
    SecurityParams,
    benchmark_kgr_unconditional,
    holevo_bob_eve_unconditional,
    kgr_unconditional,
    max_tolerable_noise,
    mutual_information,
    optimal_kgr_unconditional,
    secure_distance,
)
from .composable import (
    AttackConfig,
    TripartiteCM,
    benchmark_kgr_composable,
    build_tripartite_cm,
    eve_conditional_cm,
    holevo_bob_eve_composable,
    key_ratio,
    kgr_composable,
    matched_eve_variance,
    optimal_kgr_composable,
    ratio_over_lengths,
    threshold_distance,
    threshold_span,
)
from .ultimate import (
    UltimateResult,
    holevo_capacity_ab,
    ultimate_key_ratio,
    ultimate_kgr,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
