"""Unconditional-security key rates for the multispan protocol.

Under unconditional security the whole line is untrusted and Eve holds a
purification of the Alice-Bob state, so her entropies coincide with those
of the shared state: S_E = S_AB and, because homodyne detection is a
rank-one measurement, S_E|B = S_A|B.  Only PSA links (and the no-amplifier
benchmark) are admissible in this model: the idler mode of a PIA leaks to
the environment and its purification would only strengthen Eve, making
phase-insensitive amplification strictly counterproductive.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    MeasurementKind,
    condition_on_measurement,
    entropy_h,
    symplectic_eigenvalues,
)
from .link import LinkConfig, ProtocolCase, gain_constraint_max, shared_cm, span_params
from .optimize import OptimizerSettings, bisect_sign_change, optimize_vg

# Key rates below this are treated as "no key" by distance/noise searches.
KGR_POSITIVE_FLOOR = 1e-12
_CONSTRAINT_SLACK = 1e-9


@dataclass(frozen=True)
class SecurityParams:
    """Reconciliation efficiency and the protocol case under analysis."""

    beta: float
    case: ProtocolCase

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"reconciliation efficiency {self.beta} outside (0, 1]")


@dataclass(frozen=True)
class KeyRateResult:
    """Key rate in bits per channel use plus its ingredients.

    kgr = beta * i_ab - chi_be; negative rates are preserved so that
    zero crossings remain observable.  For optimized results (v_opt, g_opt)
    are the maximizers; for point evaluations they echo the inputs.
    """

    kgr: float
    v_opt: float
    g_opt: float
    i_ab: float
    chi_be: float
    constraint_active: bool


def mutual_information(config: LinkConfig, v: float, case: ProtocolCase) -> float:
    """Shannon mutual information of heterodyne Alice and homodyne Bob, in bits.

    Evaluated in the analytic homodyne limit as
    0.5 log2(var_B / var_B|A) on the measured quadrature, where var_B|A is
    Bob's variance conditioned on Alice's heterodyne outcome.
    """
    sigma = shared_cm(config, v, case)
    conditional = condition_on_measurement(sigma, 0, MeasurementKind.HETERODYNE)
    j = case.measured_quadrature.quadrature_index
    return float(0.5 * np.log2(sigma.data[2 + j, 2 + j] / conditional.data[j, j]))


def holevo_bob_eve_unconditional(config: LinkConfig, v: float,
                                 case: ProtocolCase) -> float:
    """Holevo information of a purifying Eve about Bob's homodyne outcome.

    chi_BE = h(d1) + h(d2) - h(d3): d1, d2 are the symplectic eigenvalues
    of the shared state, d3 that of Alice's state conditioned on Bob's
    measured quadrature.
    """
    if case is ProtocolCase.CASE_I:
        raise ValueError(
            "PIA links are unsound under unconditional security: Eve also "
            "purifies the amplifier idler modes, so amplification can only "
            "help her; analyze cases IIa/IIb or the no-amplifier benchmark")
    sigma = shared_cm(config, v, case)
    d1, d2 = symplectic_eigenvalues(sigma)
    conditional = condition_on_measurement(sigma, 1, case.measured_quadrature)
    d3 = symplectic_eigenvalues(conditional)[0]
    return entropy_h(d1) + entropy_h(d2) - entropy_h(d3)


def _feasible_gain_max(config: LinkConfig, v: float, case: ProtocolCase) -> float:
    if case is ProtocolCase.NO_AMPLIFIER:
        return 1.0
    t, _ = span_params(config)
    # Leaving the signal unamplified is always admissible, even where the
    # power budget formally drops below unit gain (V close to 1).
    return max(1.0, gain_constraint_max(v, t, config.excess_noise, case))


def kgr_unconditional(config: LinkConfig, params: SecurityParams, v: float,
                      g: float) -> KeyRateResult:
    """Unconditional key rate beta * I_AB - chi_BE at a single (V, G) point."""
    g_max = _feasible_gain_max(config, v, params.case)
    if g > g_max + _CONSTRAINT_SLACK:
        raise ValueError(f"gain {g} violates the power constraint G <= {g_max}")
    cfg = config.for_case(params.case, gain=g)
    i_ab = mutual_information(cfg, v, params.case)
    chi_be = holevo_bob_eve_unconditional(cfg, v, params.case)
    return KeyRateResult(
        kgr=params.beta * i_ab - chi_be,
        v_opt=v,
        g_opt=g,
        i_ab=i_ab,
        chi_be=chi_be,
        constraint_active=bool(g_max > 1.0 and g_max - g <= _CONSTRAINT_SLACK),
    )


def optimal_kgr_unconditional(config: LinkConfig, params: SecurityParams,
                              settings: OptimizerSettings | None = None) -> KeyRateResult:
    """Unconditional key rate maximized over (V, G) under the power constraint."""
    case = params.case

    def objective(v: float, g: float) -> float:
        cfg = config.for_case(case, gain=g)
        return (params.beta * mutual_information(cfg, v, case)
                - holevo_bob_eve_unconditional(cfg, v, case))

    res = optimize_vg(objective, lambda v: _feasible_gain_max(config, v, case), settings)
    cfg = config.for_case(case, gain=res.g_opt)
    i_ab = mutual_information(cfg, res.v_opt, case)
    chi_be = holevo_bob_eve_unconditional(cfg, res.v_opt, case)
    return KeyRateResult(res.value, res.v_opt, res.g_opt, i_ab, chi_be,
                         res.constraint_active)


def benchmark_kgr_unconditional(config: LinkConfig, beta: float,
                                settings: OptimizerSettings | None = None) -> KeyRateResult:
    """No-amplifier (GG02) key rate maximized over V at G = 1."""
    params = SecurityParams(beta=beta, case=ProtocolCase.NO_AMPLIFIER)
    return optimal_kgr_unconditional(config, params, settings)


def max_tolerable_noise(config: LinkConfig, params: SecurityParams,
                        settings: OptimizerSettings | None = None,
                        tol: float = 1e-4) -> float:
    """Largest excess noise keeping the optimized key rate positive.

    Bisection on the sign of the (V, G)-optimized rate over the bracket
    [0, 1]; if the rate is already non-positive (positive) at the lower
    (upper) bracket end the corresponding boundary is returned.
    """

    def optimized_kgr(eps: float) -> float:
        cfg = dataclasses.replace(config, excess_noise=eps)
        return optimal_kgr_unconditional(cfg, params, settings).kgr

    if optimized_kgr(0.0) <= 0.0:
        return 0.0
    if optimized_kgr(1.0) > 0.0:
        return 1.0
    return bisect_sign_change(optimized_kgr, 0.0, 1.0, tol)


def secure_distance(config: LinkConfig, params: SecurityParams,
                    settings: OptimizerSettings | None = None,
                    l_max_km: float = 300.0, grid_km: float = 0.5) -> float:
    """Largest length on a ``grid_km`` grid with optimized KGR above the floor.

    The optimized rate decreases with distance, so the zero crossing is
    bracketed by bisection and then snapped onto the grid.
    """

    def optimized_kgr(length: float) -> float:
        cfg = dataclasses.replace(config, length_km=length)
        return optimal_kgr_unconditional(cfg, params, settings).kgr

    if optimized_kgr(grid_km) <= KGR_POSITIVE_FLOOR:
        return 0.0
    if optimized_kgr(l_max_km) > KGR_POSITIVE_FLOOR:
        return l_max_km
    crossing = bisect_sign_change(lambda L: optimized_kgr(L) - KGR_POSITIVE_FLOOR,
                                  grid_km, l_max_km, tol=grid_km / 4.0)
    distance = np.floor(crossing / grid_km) * grid_km
    while distance > grid_km and optimized_kgr(distance) <= KGR_POSITIVE_FLOOR:
        distance -= grid_km
    while (distance + grid_km <= l_max_km
           and optimized_kgr(distance + grid_km) > KGR_POSITIVE_FLOOR):
        distance += grid_km
    return float(distance)
