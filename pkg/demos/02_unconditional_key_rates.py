#!/usr/bin/env python3
"""Unconditional-security key rates: where do PSA links help?

Against an all-powerful eavesdropper holding a purification of the whole
line, phase-insensitive amplifiers are useless (their idlers leak), and
amplifying the measured quadrature turns out never to pay either.  The one
winning move is measuring the deamplified quadrature: Bob hides behind the
extra noise and takes a higher key rate at noisy, metropolitan distances.
"""

from cvqkd_multispan import (
    AmplifierKind,
    LinkConfig,
    ProtocolCase,
    SecurityParams,
    benchmark_kgr_unconditional,
    optimal_kgr_unconditional,
)

BETA = 0.95
EPSILON = 0.05

print(f"beta = {BETA}, excess noise = {EPSILON}, M = 10 spans")
print(f"{'L [km]':>7s} {'GG02':>12s} {'IIa (q)':>12s} {'IIb (p)':>12s} "
      f"{'gain (IIb)':>11s}")
for length in (10.0, 25.0, 50.0, 75.0):
    cfg = LinkConfig(length_km=length, spans=10, excess_noise=EPSILON,
                     amplifier=AmplifierKind.PSA, gain=1.0)
    bench = benchmark_kgr_unconditional(cfg, beta=BETA)
    amplified = optimal_kgr_unconditional(
        cfg, SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIA))
    deamplified = optimal_kgr_unconditional(
        cfg, SecurityParams(beta=BETA, case=ProtocolCase.CASE_IIB))
    print(f"{length:7.0f} {bench.kgr:12.5f} {amplified.kgr:12.5f} "
          f"{deamplified.kgr:12.5f} {deamplified.g_opt:11.4f}")

print()
print("Column IIa reproduces the GG02 benchmark exactly: the optimizer")
print("always rests at unit gain there. Column IIb beats it, with an")
print("optimal gain that shrinks as the link gets longer.")
