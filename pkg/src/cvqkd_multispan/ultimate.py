"""Upper bound on the composable key rate with a capacity-achieving Alice.

Instead of heterodyning her retained mode, Alice performs the measurement
attaining the Holevo bound on her side, turning the Shannon mutual
information into the Holevo information chi_AB.  Treated here for PIA
links only (case I): the PSA link is a phase-sensitive channel whose
Holevo capacity has no comparably simple form and is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .composable import AttackConfig, benchmark_kgr_composable, holevo_bob_eve_composable
from .gaussian import MeasurementKind, condition_on_measurement, entropy_h, symplectic_eigenvalues
from .link import LinkConfig, ProtocolCase, shared_cm
from .optimize import OptimizerSettings, optimize_vg
from .unconditional import KGR_POSITIVE_FLOOR, SecurityParams, _feasible_gain_max


@dataclass(frozen=True)
class UltimateResult:
    """Upper-bound key rate beta * chi_AB - chi_BE with its maximizers."""

    kgr_upper: float
    chi_ab: float
    v_opt: float
    g_opt: float
    constraint_active: bool


def holevo_capacity_ab(config: LinkConfig, v: float, g: float) -> float:
    """Holevo information between Alice and homodyne Bob over the PIA link.

    chi_AB = h(d1) - h(d2) with d1 = V (Alice's reduced-state eigenvalue)
    and d2 the symplectic eigenvalue of Alice's state conditioned on Bob's
    q-quadrature measurement.
    """
    cfg = config.for_case(ProtocolCase.CASE_I, gain=g)
    sigma = shared_cm(cfg, v, ProtocolCase.CASE_I)
    conditional = condition_on_measurement(sigma, 1, MeasurementKind.HOMODYNE_Q)
    d2 = symplectic_eigenvalues(conditional)[0]
    return entropy_h(v) - entropy_h(d2)


def _optimize_ultimate(config: LinkConfig, params: SecurityParams,
                       attack: AttackConfig, settings: OptimizerSettings | None,
                       pin_gain: bool) -> UltimateResult:
    if params.case is not ProtocolCase.CASE_I:
        raise ValueError(
            "the capacity upper bound is computed for PIA links (case I) only; "
            "the PSA link is a phase-sensitive channel whose Holevo capacity "
            "is out of scope")

    def objective(v: float, g: float) -> float:
        cfg = config.for_case(ProtocolCase.CASE_I, gain=g)
        return (params.beta * holevo_capacity_ab(config, v, g)
                - holevo_bob_eve_composable(cfg, v, ProtocolCase.CASE_I, attack))

    if pin_gain:
        g_max_of_v = lambda v: 1.0
    else:
        g_max_of_v = lambda v: _feasible_gain_max(config, v, ProtocolCase.CASE_I)
    res = optimize_vg(objective, g_max_of_v, settings)
    return UltimateResult(
        kgr_upper=res.value,
        chi_ab=holevo_capacity_ab(config, res.v_opt, res.g_opt),
        v_opt=res.v_opt,
        g_opt=res.g_opt,
        constraint_active=res.constraint_active,
    )


def ultimate_kgr(config: LinkConfig, params: SecurityParams, attack: AttackConfig,
                 settings: OptimizerSettings | None = None) -> UltimateResult:
    """Upper-bound key rate maximized over (V, G) under the power constraint."""
    return _optimize_ultimate(config, params, attack, settings, pin_gain=False)


def ultimate_key_ratio(config: LinkConfig, params: SecurityParams,
                       attack: AttackConfig,
                       settings: OptimizerSettings | None = None,
                       benchmark_alice: str = "holevo") -> float:
    """Upper-bound rate divided by its no-amplifier benchmark.

    ``benchmark_alice`` selects the Alice measurement of the denominator:
    "holevo" uses the capacity-achieving Alice at G = 1 (the ratio then
    starts at 1 for short links, matching the behaviour of the heterodyne
    key ratios), "heterodyne" divides by the plain wiretap benchmark.
    """
    if benchmark_alice == "holevo":
        benchmark = _optimize_ultimate(config, params, attack, settings,
                                       pin_gain=True).kgr_upper
    elif benchmark_alice == "heterodyne":
        benchmark = benchmark_kgr_composable(config, params, attack, settings).kgr
    else:
        raise ValueError(f"unknown benchmark_alice {benchmark_alice!r}")
    if benchmark <= KGR_POSITIVE_FLOOR:
        raise ValueError(f"benchmark key rate {benchmark} is not positive; ratio undefined")
    return ultimate_kgr(config, params, attack, settings).kgr_upper / benchmark
