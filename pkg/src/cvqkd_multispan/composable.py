"""Composable security with a single untrusted span.

Eve performs an entangling-cloner attack on one span k of the link: she
prepares a two-mode squeezed vacuum whose variance 1 + 2 n_bar matches the
span's thermal occupation and injects one arm into the span's beam
splitter, keeping both of her modes.  Alice and Bob observe exactly the
trusted-channel statistics, so the attack is undetectable; all amplifiers
and the remaining spans are trusted.  The no-amplifier benchmark is the
same construction at G = 1, i.e. a wiretap channel where Eve taps 1/M of
the line.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .gaussian import (
    CovarianceMatrix,
    beam_splitter_symplectic,
    condition_on_measurement,
    embed_on_modes,
    entropy_h,
    symplectic_eigenvalues,
    tmsv_cm,
)
from .link import (
    AmplifierKind,
    LinkConfig,
    ProtocolCase,
    _propagate_data,
    amplifier_map,
    span_params,
)
from .optimize import OptimizerSettings, optimize_vg
from .unconditional import (
    KGR_POSITIVE_FLOOR,
    KeyRateResult,
    SecurityParams,
    _CONSTRAINT_SLACK,
    _feasible_gain_max,
    mutual_information,
)

# |ratio - 1| below this counts as "amplification does not help" when
# locating threshold attack positions; absorbs optimizer granularity.
RATIO_UNITY_TOL = 1e-3


def matched_eve_variance(config: LinkConfig) -> float:
    """TMSV variance 1 + 2 n_bar hiding Eve behind the span's thermal noise."""
    _, n_bar = span_params(config)
    return 1.0 + 2.0 * n_bar


@dataclass(frozen=True)
class AttackConfig:
    """Entangling-cloner attack on one span.

    span_index     the untrusted span k, 1-based
    eve_variance   Eve's TMSV variance; None selects the matched value
                   1 + 2 n_bar that makes the attack undetectable
    """

    span_index: int
    eve_variance: float | None = None

    def __post_init__(self):
        if not isinstance(self.span_index, int) or self.span_index < 1:
            raise ValueError(f"span index must be a positive integer, got {self.span_index!r}")
        if self.eve_variance is not None and self.eve_variance < 1.0:
            raise ValueError(f"Eve's TMSV variance {self.eve_variance} below 1")

    def resolved_variance(self, config: LinkConfig) -> float:
        if self.eve_variance is None:
            return matched_eve_variance(config)
        return self.eve_variance


@dataclass(frozen=True)
class TripartiteCM:
    """Joint Alice-Bob-Eve state over modes (A, B, E1, E2)."""

    cm: CovarianceMatrix

    @property
    def sigma_ab(self) -> CovarianceMatrix:
        return CovarianceMatrix(self.cm.block((0, 1)))

    @property
    def sigma_e(self) -> CovarianceMatrix:
        return CovarianceMatrix(self.cm.block((2, 3)))

    @property
    def sigma_ae(self) -> np.ndarray:
        return self.cm.cross_block((0,), (2, 3))

    @property
    def sigma_be(self) -> np.ndarray:
        return self.cm.cross_block((1,), (2, 3))


def build_tripartite_cm(config: LinkConfig, v: float, case: ProtocolCase,
                        attack: AttackConfig) -> TripartiteCM:
    """Propagate the attack through the link with the generic symplectic engine.

    Bob's mode crosses the trusted spans 1 .. k-1 (loss plus amplifier),
    then interferes with one arm of Eve's TMSV on the beam splitter that
    replaces span k's thermal environment, passes span k's amplifier and
    finally the remaining trusted spans k+1 .. M.
    """
    cfg = config.for_case(case)
    k = attack.span_index
    if k > cfg.spans:
        raise ValueError(f"untrusted span {k} exceeds span count {cfg.spans}")
    t, _ = span_params(cfg)
    v_eps = attack.resolved_variance(cfg)

    data = _propagate_data(tmsv_cm(v).data, cfg, 1, k - 1)
    data = block_diag(data, tmsv_cm(v_eps).data)
    splitter = embed_on_modes(beam_splitter_symplectic(t), (1, 2), 4)
    data = splitter.x @ data @ splitter.x.T
    if cfg.amplifier is not AmplifierKind.NONE and cfg.gain > 1.0:
        amp = embed_on_modes(amplifier_map(cfg.amplifier, cfg.gain), (1,), 4)
        data = amp.x @ data @ amp.x.T + amp.y
    data = _propagate_data(data, cfg, 1, cfg.spans - k)
    return TripartiteCM(CovarianceMatrix(data))


def eve_conditional_cm(tripartite: TripartiteCM, case: ProtocolCase) -> CovarianceMatrix:
    """Eve's two-mode state conditioned on Bob's homodyne outcome."""
    conditional = condition_on_measurement(tripartite.cm, 1, case.measured_quadrature)
    return CovarianceMatrix(conditional.block((1, 2)))


def holevo_bob_eve_composable(config: LinkConfig, v: float, case: ProtocolCase,
                              attack: AttackConfig) -> float:
    """Holevo information of the restricted Eve about Bob's homodyne outcome.

    chi_BE = h(d1) + h(d2) - h(d3) - h(d4) with d1, d2 the symplectic
    eigenvalues of Eve's two-mode state and d3, d4 those of her state
    conditioned on Bob's measured quadrature.
    """
    tripartite = build_tripartite_cm(config, v, case, attack)
    d1, d2 = symplectic_eigenvalues(tripartite.sigma_e)
    d3, d4 = symplectic_eigenvalues(eve_conditional_cm(tripartite, case))
    return entropy_h(d1) + entropy_h(d2) - entropy_h(d3) - entropy_h(d4)


def kgr_composable(config: LinkConfig, params: SecurityParams, v: float, g: float,
                   attack: AttackConfig) -> KeyRateResult:
    """Composable key rate beta * I_AB - chi_BE at a single (V, G) point."""
    g_max = _feasible_gain_max(config, v, params.case)
    if g > g_max + _CONSTRAINT_SLACK:
        raise ValueError(f"gain {g} violates the power constraint G <= {g_max}")
    cfg = config.for_case(params.case, gain=g)
    i_ab = mutual_information(cfg, v, params.case)
    chi_be = holevo_bob_eve_composable(cfg, v, params.case, attack)
    return KeyRateResult(
        kgr=params.beta * i_ab - chi_be,
        v_opt=v,
        g_opt=g,
        i_ab=i_ab,
        chi_be=chi_be,
        constraint_active=bool(g_max > 1.0 and g_max - g <= _CONSTRAINT_SLACK),
    )


def _optimize_case(config: LinkConfig, params: SecurityParams, attack: AttackConfig,
                   settings: OptimizerSettings | None, pin_gain: bool) -> KeyRateResult:
    case = params.case

    def objective(v: float, g: float) -> float:
        cfg = config.for_case(case, gain=g)
        return (params.beta * mutual_information(cfg, v, case)
                - holevo_bob_eve_composable(cfg, v, case, attack))

    if pin_gain:
        g_max_of_v = lambda v: 1.0
    else:
        g_max_of_v = lambda v: _feasible_gain_max(config, v, case)
    res = optimize_vg(objective, g_max_of_v, settings)
    cfg = config.for_case(case, gain=res.g_opt)
    i_ab = mutual_information(cfg, res.v_opt, case)
    chi_be = holevo_bob_eve_composable(cfg, res.v_opt, case, attack)
    return KeyRateResult(res.value, res.v_opt, res.g_opt, i_ab, chi_be,
                         res.constraint_active)


def optimal_kgr_composable(config: LinkConfig, params: SecurityParams,
                           attack: AttackConfig,
                           settings: OptimizerSettings | None = None) -> KeyRateResult:
    """Composable key rate maximized over (V, G) under the power constraint."""
    return _optimize_case(config, params, attack, settings, pin_gain=False)


def benchmark_kgr_composable(config: LinkConfig, params: SecurityParams,
                             attack: AttackConfig,
                             settings: OptimizerSettings | None = None) -> KeyRateResult:
    """No-amplifier wiretap benchmark: the same attack with gain pinned to 1.

    Evaluated through the identical tripartite construction so that the key
    ratio is exactly 1 whenever amplification does not help; at G = 1 all
    protocol cases coincide with the plain GG02 wiretap channel.
    """
    return _optimize_case(config, params, attack, settings, pin_gain=True)


def key_ratio(config: LinkConfig, params: SecurityParams, attack: AttackConfig,
              settings: OptimizerSettings | None = None) -> float:
    """Optimized amplified-link rate divided by the no-amplifier benchmark."""
    benchmark = benchmark_kgr_composable(config, params, attack, settings)
    if benchmark.kgr <= KGR_POSITIVE_FLOOR:
        raise ValueError(
            f"benchmark key rate {benchmark.kgr} is not positive; ratio undefined")
    amplified = optimal_kgr_composable(config, params, attack, settings)
    return amplified.kgr / benchmark.kgr


def _ratio_point(args) -> float:
    config, params, k, length, settings = args
    cfg = dataclasses.replace(config, length_km=length)
    try:
        return key_ratio(cfg, params, AttackConfig(span_index=k), settings)
    except ValueError:
        # Benchmark rate not positive: the ratio is undefined at this point
        # and the point is skipped by grid predicates.
        return float("nan")


def ratio_over_lengths(config: LinkConfig, params: SecurityParams, k: int,
                       lengths_km, settings: OptimizerSettings | None = None,
                       workers: int | None = None) -> np.ndarray:
    """Key ratio on a grid of link lengths (NaN where the benchmark dies)."""
    jobs = [(config, params, k, float(length), settings) for length in lengths_km]
    n_workers = workers if workers is not None else (os.cpu_count() or 1)
    if n_workers <= 1 or len(jobs) <= 1:
        return np.array([_ratio_point(job) for job in jobs])
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return np.array(list(pool.map(_ratio_point, jobs, chunksize=1)))


def _spread_order(n: int, stride: int = 7) -> list[int]:
    """Deterministic reordering that samples the whole range early on."""
    seen = [i for s in range(stride) for i in range(s, n, stride)]
    return seen


def _unity_over_grid(config, params, k, lengths, settings, ratio_tol,
                     pool, n_workers) -> bool:
    """Whether |ratio - 1| < tol across the whole grid, with early exit.

    Grid points are dispatched in a spread-out order so that a violation
    anywhere on the grid is usually detected after a handful of results,
    letting the remaining points be cancelled.
    """
    order = _spread_order(len(lengths))
    jobs = [(config, params, k, float(lengths[i]), settings) for i in order]
    if pool is None or n_workers <= 1:
        for job in jobs:
            ratio = _ratio_point(job)
            if np.isfinite(ratio) and abs(ratio - 1.0) >= ratio_tol:
                return False
        return True
    futures = [pool.submit(_ratio_point, job) for job in jobs]
    try:
        for future in futures:
            ratio = future.result()
            if np.isfinite(ratio) and abs(ratio - 1.0) >= ratio_tol:
                return False
        return True
    finally:
        for future in futures:
            future.cancel()


def threshold_span(config: LinkConfig, params: SecurityParams, lengths_km,
                   settings: OptimizerSettings | None = None,
                   ratio_tol: float = RATIO_UNITY_TOL,
                   workers: int | None = None) -> int:
    """Threshold attack position separating useful from useless amplification.

    For the amplified-quadrature cases (I, IIa) the returned k_th is the
    smallest k such that the key ratio stays at 1 across the length grid
    for every k' >= k; attacks on spans at or beyond k_th gain nothing from
    amplification.  For case IIb the logic is mirrored: k_th is the largest
    k such that the ratio stays at 1 for every k' <= k.  Degenerate returns
    (M + 1 for cases I/IIa, 0 for IIb) mean amplification helps everywhere.
    """
    m = config.spans
    case = params.case
    if case is ProtocolCase.NO_AMPLIFIER:
        raise ValueError("the no-amplifier benchmark has no threshold span")
    lengths = [float(length) for length in lengths_km]
    n_workers = workers if workers is not None else (os.cpu_count() or 1)
    if case in (ProtocolCase.CASE_I, ProtocolCase.CASE_IIA):
        scan = range(m, 0, -1)      # enhancement appears at small k
    else:
        scan = range(1, m + 1)      # case IIb: enhancement appears at large k
    pool = ProcessPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    try:
        first_violation = None
        for k in scan:
            if not _unity_over_grid(config, params, k, lengths, settings,
                                    ratio_tol, pool, n_workers):
                first_violation = k
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)
    if case in (ProtocolCase.CASE_I, ProtocolCase.CASE_IIA):
        return 1 if first_violation is None else first_violation + 1
    return m if first_violation is None else first_violation - 1


def threshold_distance(config: LinkConfig, params: SecurityParams,
                       attack: AttackConfig, lengths_km,
                       settings: OptimizerSettings | None = None,
                       ratio_tol: float = RATIO_UNITY_TOL) -> float:
    """End of the initial ratio = 1 plateau on an increasing length grid.

    Returns the largest grid length such that the key ratio equals 1 (to
    ``ratio_tol``) at it and at every shorter grid point, or 0.0 when even
    the first grid point shows enhancement.
    """
    plateau_end = 0.0
    for length in lengths_km:
        cfg = LinkConfig(length_km=float(length), spans=config.spans,
                         loss_db_per_km=config.loss_db_per_km,
                         excess_noise=config.excess_noise,
                         amplifier=config.amplifier, gain=config.gain)
        try:
            ratio = key_ratio(cfg, params, attack, settings)
        except ValueError:
            continue
        if abs(ratio - 1.0) >= ratio_tol:
            return plateau_end
        plateau_end = float(length)
    return plateau_end
