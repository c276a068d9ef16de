"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s``.  Criterion 1 sweeps
optimized key ratios over the full 1..199 km grid for six (case, M)
combinations and takes tens of minutes on a small machine; it runs last.
The worker count honours CVQKD_ACCEPTANCE_WORKERS.
"""

import dataclasses
import os

import numpy as np

from cvqkd_multispan.composable import (
    AttackConfig,
    key_ratio,
    optimal_kgr_composable,
    threshold_span,
)
from cvqkd_multispan.link import AmplifierKind, LinkConfig, ProtocolCase, gain_constraint_max, span_params
from cvqkd_multispan.selfcheck import (
    check_continuous_limit,
    check_eve_conditional_closed,
    check_homodyne_finite_z,
    check_mutual_information_finite_z,
    check_reduction_identities,
    check_shared_vs_propagate,
    check_tripartite_closed_pia,
    check_tripartite_closed_psa,
    minimum_symplectic_eigenvalue,
)
from cvqkd_multispan.ultimate import ultimate_kgr
from cvqkd_multispan.unconditional import (
    SecurityParams,
    benchmark_kgr_unconditional,
    kgr_unconditional,
    max_tolerable_noise,
    optimal_kgr_unconditional,
    secure_distance,
)

WORKERS = int(os.environ.get("CVQKD_ACCEPTANCE_WORKERS", os.cpu_count() or 1))
BETA = 0.95
EPS = 0.05


def _report(number: int, passed: bool, detail: str) -> None:
    print(f"[criterion {number}] {'PASS' if passed else 'FAIL'} - {detail}")


def _link(length, spans, case, eps=EPS):
    return LinkConfig(length_km=length, spans=spans, excess_noise=eps,
                      amplifier=case.amplifier_kind, gain=1.0)


def test_criterion_2_amplified_quadrature_null_result():
    """Optimized case IIa equals the no-amplifier protocol with unit gain."""
    worst_gap = 0.0
    worst_gain = 1.0
    for spans in (2, 5, 10):
        for length in (5.0, 25.0, 50.0, 100.0):
            cfg = _link(length, spans, ProtocolCase.CASE_IIA)
            best = optimal_kgr_unconditional(
                cfg, SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIA))
            bench = benchmark_kgr_unconditional(cfg, beta=BETA)
            worst_gap = max(worst_gap, abs(best.kgr - bench.kgr))
            worst_gain = max(worst_gain, best.g_opt)
    passed = worst_gap <= 1e-6 and worst_gain <= 1.0 + 1e-9
    _report(2, passed,
            f"max |K_IIa - K_n| = {worst_gap:.3e} bits, max g_opt = {worst_gain}")
    assert passed


def test_criterion_3_deamplified_quadrature_enhancement():
    """Case IIb beats the benchmark by >= 5% and reaches farther."""
    cfg = _link(25.0, 10, ProtocolCase.CASE_IIB)
    best = optimal_kgr_unconditional(
        cfg, SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIB))
    bench = benchmark_kgr_unconditional(cfg, beta=BETA)
    relative = (best.kgr - bench.kgr) / bench.kgr
    d_amp = secure_distance(_link(1.0, 10, ProtocolCase.CASE_IIB),
                            SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIB))
    d_ref = secure_distance(LinkConfig(length_km=1.0, spans=1, excess_noise=EPS),
                            SecurityParams(beta=BETA, case=ProtocolCase.NO_AMPLIFIER))
    passed = relative >= 0.05 and d_amp > d_ref
    _report(3, passed,
            f"relative gain at 25 km = {relative:.1%}, secure distance "
            f"{d_amp} km vs benchmark {d_ref} km")
    assert passed


def test_criterion_4_oracle_equivalence():
    """Generic symplectic propagation matches every closed form to 1e-9."""
    results = [
        check_shared_vs_propagate(trials=200),
        check_tripartite_closed_pia(trials=200),
        check_tripartite_closed_psa(trials=200),
        check_eve_conditional_closed(trials=200),
    ]
    passed = all(r.passed for r in results)
    _report(4, passed, "; ".join(r.detail for r in results))
    assert passed, [r.name for r in results if not r.passed]


def test_criterion_5_reduction_identities():
    """Unit gain collapses all amplifier kinds; lossless noiseless rate exact."""
    suite = check_reduction_identities()
    worst = 0.0
    lossless = LinkConfig(length_km=0.0, spans=4, excess_noise=0.0,
                          amplifier=AmplifierKind.PSA, gain=1.0)
    for v in (2.0, 4.0, 25.0):
        point = kgr_unconditional(lossless,
                                  SecurityParams(beta=1.0, case=ProtocolCase.CASE_IIB),
                                  v, 1.0)
        worst = max(worst, abs(point.kgr - 0.5 * np.log2(v)), abs(point.chi_be))
    passed = suite.passed and worst <= 1e-10
    _report(5, passed, f"{suite.detail}; lossless K gap = {worst:.3e}")
    assert passed


def test_criterion_6_homodyne_limit_consistency():
    """Analytic homodyne limits match finite-z evaluation to 1e-6."""
    results = [check_homodyne_finite_z(trials=100),
               check_mutual_information_finite_z(trials=100)]
    passed = all(r.passed for r in results)
    _report(6, passed, "; ".join(r.detail for r in results))
    assert passed


def test_criterion_7_continuous_amplification_limit():
    """M = 64 effective parameters within 1% of the continuous limit."""
    result = check_continuous_limit()
    _report(7, result.passed, result.detail)
    assert result.passed


def test_criterion_8_monotonicity_and_ordering():
    """Noise tolerance, ratio ordering, upper bound and short-link ratios."""
    problems = []

    # Maximum tolerable noise: the deamplified PSA case dominates (Fig. 4).
    for spans, length in ((5, 10.0), (5, 30.0), (5, 50.0), (10, 30.0)):
        amped = max_tolerable_noise(
            _link(length, spans, ProtocolCase.CASE_IIB, eps=0.0),
            SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIB))
        bench = max_tolerable_noise(
            LinkConfig(length_km=length, spans=1),
            SecurityParams(beta=BETA, case=ProtocolCase.NO_AMPLIFIER))
        if amped < bench - 1e-3:
            problems.append(f"eps_max ordering broken at M={spans}, L={length}")

    # PIA never outperforms PSA on the amplified quadrature.
    for length in (20.0, 60.0, 100.0, 140.0):
        for k in (1, 2, 3):
            attack = AttackConfig(span_index=k)
            r_pia = key_ratio(_link(length, 5, ProtocolCase.CASE_I),
                              SecurityParams(beta=BETA, case=ProtocolCase.CASE_I),
                              attack)
            r_psa = key_ratio(_link(length, 5, ProtocolCase.CASE_IIA),
                              SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIA),
                              attack)
            if r_pia > r_psa + 1e-3:
                problems.append(f"R_I > R_IIa at L={length}, k={k}")

    # The capacity bound dominates the heterodyne rate pointwise.
    for length in (20.0, 60.0, 100.0):
        for k in (1, 5, 10):
            cfg = _link(length, 10, ProtocolCase.CASE_I)
            params = SecurityParams(beta=BETA, case=ProtocolCase.CASE_I)
            attack = AttackConfig(span_index=k)
            upper = ultimate_kgr(cfg, params, attack).kgr_upper
            heterodyne = optimal_kgr_composable(cfg, params, attack).kgr
            if upper < heterodyne - 1e-9:
                problems.append(f"upper bound below key rate at L={length}, k={k}")

    # Amplified-quadrature ratios are initially equal to 1: checked at the
    # 1 km grid start.  (The plateau length is case- and k-dependent and
    # already ends below 2 km for IIa with an attack on the first span;
    # for IIb deamplification can help immediately, so it is exempt.)
    for case in (ProtocolCase.CASE_I, ProtocolCase.CASE_IIA):
        for k in (1, 5):
            ratio = key_ratio(_link(1.0, 5, case),
                              SecurityParams(beta=BETA, case=case),
                              AttackConfig(span_index=k))
            if abs(ratio - 1.0) >= 1e-3:
                problems.append(
                    f"grid-start ratio != 1 for case {case.label}, k={k}")

    _report(8, not problems, "; ".join(problems) if problems else
            "noise tolerance, ratio ordering, upper bound and short-link "
            "ratios all ordered correctly")
    assert not problems


def test_criterion_9_physicality_sweep():
    """Every covariance matrix built along the pipelines stays physical."""
    smallest = np.inf
    for case in (ProtocolCase.NO_AMPLIFIER, ProtocolCase.CASE_I,
                 ProtocolCase.CASE_IIA, ProtocolCase.CASE_IIB):
        for spans in (2, 5, 10):
            for length in (1.0, 50.0, 150.0):
                cfg = _link(length, spans, case)
                t, _ = span_params(cfg)
                for v in (1.0001, 10.0, 1e3, 1e5):
                    if case is ProtocolCase.NO_AMPLIFIER:
                        gains = (1.0,)
                    else:
                        g_max = max(1.0, gain_constraint_max(v, t, EPS, case))
                        gains = (1.0, 0.5 * (1.0 + g_max), g_max)
                    for gain in gains:
                        probe = dataclasses.replace(cfg, gain=gain)
                        for k in (1, max(1, spans // 2), spans):
                            smallest = min(smallest, minimum_symplectic_eigenvalue(
                                probe, v, case, k))
    passed = smallest >= 1.0 - 1e-9
    _report(9, passed, f"min symplectic eigenvalue = {smallest:.12f}")
    assert passed


def test_criterion_1_threshold_attack_positions():
    """Exact threshold attack positions on the 1..199 km grid (2 km steps).

    The expected integers are the published values.  The M = 5 trio and
    case I at M = 10 reproduce exactly.  Two M = 10 boundary integers do
    not, for verified reasons (see the decisions ledger): case IIa
    computes to 7 under an uncapped modulation search (8 is reproducible
    only by capping the search range, which fakes enhancement by clipping
    the unamplified branch), and case IIb computes to 1 because a genuine
    0.107% enhancement at the single grid point L = 3 km crosses the 1e-3
    unity tolerance (brute-force confirmed; any grid without that point
    yields 2).  The criterion is asserted as stated and fails honestly.
    """
    grid = np.arange(1.0, 200.0, 2.0)
    expected = {
        (ProtocolCase.CASE_I, 5): 2,
        (ProtocolCase.CASE_IIA, 5): 3,
        (ProtocolCase.CASE_IIB, 5): 1,
        (ProtocolCase.CASE_I, 10): 5,
        (ProtocolCase.CASE_IIA, 10): 8,
        (ProtocolCase.CASE_IIB, 10): 2,
    }
    measured = {}
    for (case, spans), want in expected.items():
        cfg = _link(1.0, spans, case)
        got = threshold_span(cfg, SecurityParams(beta=BETA, case=case), grid,
                             workers=WORKERS)
        measured[(case, spans)] = got
        print(f"  k_th case {case.label:3s} M={spans:2d}: measured {got}, "
              f"published {want}")
    passed = measured == expected
    mismatches = {f"{case.label}/M={spans}": f"{measured[(case, spans)]}!={want}"
                  for (case, spans), want in expected.items()
                  if measured[(case, spans)] != want}
    _report(1, passed, "all six threshold positions match" if passed
            else f"mismatches: {mismatches}")
    assert passed, mismatches
