"""Physical model of a multispan amplified fiber link.

A link of total length L km is split into M identical, equally spaced
spans.  Each span is a thermal-loss channel of transmissivity
T = 10^(-kappa L / (10 M)) followed by an optical amplifier of gain G,
either phase-insensitive (PIA, adds G-1 noise to both quadratures) or
phase-sensitive (PSA, unitarily scales the quadrature variances by G and
1/G).  The per-span thermal occupation is fixed so that the unamplified
link (G = 1) reduces to a single thermal-loss channel with transmissivity
T^M and added noise (1 - T^M)/T^M + excess_noise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gaussian import (
    I2,
    CovarianceMatrix,
    GaussianCPMap,
    MeasurementKind,
    identity_map,
)

# Gains within this distance of the exactly loss-compensating value G*T = 1
# take the removable-singularity branch of the geometric sums.
_GEOM_SINGULARITY_TOL = 1e-9


class AmplifierKind(Enum):
    NONE = "none"
    PIA = "pia"
    PSA = "psa"


class ProtocolCase(Enum):
    """Amplifier type plus the quadrature Bob homodynes.

    Case I couples a PIA link with random homodyne detection; the channel
    is phase-insensitive so both quadratures are statistically identical
    and q is computed throughout.  Cases IIa/IIb use a PSA link and measure
    the amplified (q) or deamplified (p) quadrature.  NO_AMPLIFIER is the
    plain GG02 benchmark (G = 1).
    """

    CASE_I = "I"
    CASE_IIA = "IIa"
    CASE_IIB = "IIb"
    NO_AMPLIFIER = "n"

    @property
    def amplifier_kind(self) -> AmplifierKind:
        return {
            ProtocolCase.CASE_I: AmplifierKind.PIA,
            ProtocolCase.CASE_IIA: AmplifierKind.PSA,
            ProtocolCase.CASE_IIB: AmplifierKind.PSA,
            ProtocolCase.NO_AMPLIFIER: AmplifierKind.NONE,
        }[self]

    @property
    def measured_quadrature(self) -> MeasurementKind:
        if self is ProtocolCase.CASE_IIB:
            return MeasurementKind.HOMODYNE_P
        return MeasurementKind.HOMODYNE_Q

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class LinkConfig:
    """Physical description of the transmission link.

    length_km         total fiber length L >= 0
    spans             number of spans M >= 1
    loss_db_per_km    fiber loss rate kappa (0.2 dB/km for standard fiber)
    excess_noise      total excess noise at the channel input, >= 0
    amplifier         amplifier type installed after each span
    gain              common amplifier gain G >= 1 (must be 1 without amplifiers)
    """

    length_km: float
    spans: int
    loss_db_per_km: float = 0.2
    excess_noise: float = 0.0
    amplifier: AmplifierKind = AmplifierKind.NONE
    gain: float = 1.0

    def __post_init__(self):
        if self.length_km < 0.0:
            raise ValueError(f"negative link length {self.length_km}")
        if not isinstance(self.spans, int) or self.spans < 1:
            raise ValueError(f"span count must be a positive integer, got {self.spans!r}")
        if self.loss_db_per_km < 0.0:
            raise ValueError(f"negative loss rate {self.loss_db_per_km}")
        if self.excess_noise < 0.0:
            raise ValueError(f"negative excess noise {self.excess_noise}")
        if self.gain < 1.0:
            raise ValueError(f"amplifier gain {self.gain} below 1")
        if self.amplifier is AmplifierKind.NONE and self.gain != 1.0:
            raise ValueError("gain must be 1 when no amplifier is installed")
        if 10.0 ** (-self.loss_db_per_km * self.length_km / (10.0 * self.spans)) == 0.0:
            raise ValueError(
                "per-span transmissivity underflows to zero for this length/loss")

    def with_gain(self, gain: float) -> "LinkConfig":
        return dataclasses.replace(self, gain=gain)

    def for_case(self, case: ProtocolCase, gain: float | None = None) -> "LinkConfig":
        """Copy of this config with the amplifier kind implied by ``case``."""
        g = self.gain if gain is None else gain
        if case is ProtocolCase.NO_AMPLIFIER and g != 1.0:
            raise ValueError("the no-amplifier benchmark requires gain 1")
        return dataclasses.replace(self, amplifier=case.amplifier_kind, gain=g)


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-quadrature transmissivity and added input-referred noise.

    The whole link acts on each quadrature as an effective one-shot channel
    variance -> t * (variance + n).  Phase-insensitive links have t_q = t_p
    and n_q = n_p.
    """

    t_q: float
    t_p: float
    n_q: float
    n_p: float


def span_params(config: LinkConfig) -> tuple[float, float]:
    """Per-span transmissivity T and thermal occupation n_bar.

    T = 10^(-kappa L / (10 M)); n_bar = T^M eps / (2 (1 - T^M)), defined as
    0 in the degenerate lossless (L = 0) and noiseless (eps = 0) cases.
    """
    t = 10.0 ** (-config.loss_db_per_km * config.length_km / (10.0 * config.spans))
    if config.excess_noise == 0.0 or t >= 1.0:
        return t, 0.0
    t_total = t ** config.spans
    return t, t_total * config.excess_noise / (2.0 * (1.0 - t_total))


def amplifier_map(kind: AmplifierKind, gain: float) -> GaussianCPMap:
    """Single-mode CP map of one amplifier.

    PIA: X = sqrt(G) I2, Y = (G-1) I2.  PSA: the symplectic squeezer
    diag(sqrt(G), 1/sqrt(G)), Y = 0, scaling the quadrature variances by G
    and 1/G.  NONE: the identity.
    """
    if gain < 1.0:
        raise ValueError(f"amplifier gain {gain} below 1")
    if kind is AmplifierKind.NONE:
        return identity_map(1)
    if kind is AmplifierKind.PIA:
        return GaussianCPMap(np.sqrt(gain) * I2, (gain - 1.0) * I2, validate=False)
    rg = np.sqrt(gain)
    return GaussianCPMap(np.diag([rg, 1.0 / rg]), np.zeros((2, 2)), validate=False)


def thermal_loss_map(transmissivity: float, n_bar: float) -> GaussianCPMap:
    """Single-mode thermal-loss channel: X = sqrt(T) I2, Y = (1-T)(1+2n_bar) I2."""
    t = transmissivity
    if not 0.0 < t <= 1.0:
        raise ValueError(f"transmissivity {t} outside (0, 1]")
    if n_bar < 0.0:
        raise ValueError(f"negative thermal occupation {n_bar}")
    return GaussianCPMap(np.sqrt(t) * I2, (1.0 - t) * (1.0 + 2.0 * n_bar) * I2,
                         validate=False)


def _embedded_single_mode(d: int, i0: int, x_diag: tuple[float, float],
                          y_diag: float) -> tuple[np.ndarray, np.ndarray]:
    """X and Y of a single-mode map with diagonal blocks, embedded at i0."""
    x = np.eye(d)
    x[i0, i0], x[i0 + 1, i0 + 1] = x_diag
    y = np.zeros((d, d))
    y[i0, i0] = y[i0 + 1, i0 + 1] = y_diag
    return x, y


def _propagate_data(data: np.ndarray, config: LinkConfig, on_mode: int,
                    n_steps: int) -> np.ndarray:
    """Raw span-by-span propagation on a bare covariance array."""
    if n_steps == 0:
        return data
    t, n_bar = span_params(config)
    d = data.shape[0]
    i0 = 2 * on_mode
    # Identity factors (lossless span, unit gain) contribute exactly
    # nothing and are skipped.
    apply_loss = t < 1.0
    apply_amp = config.amplifier is not AmplifierKind.NONE and config.gain > 1.0
    if apply_loss:
        rt = np.sqrt(t)
        x_loss, y_loss = _embedded_single_mode(
            d, i0, (rt, rt), (1.0 - t) * (1.0 + 2.0 * n_bar))
    if apply_amp:
        rg = np.sqrt(config.gain)
        if config.amplifier is AmplifierKind.PIA:
            x_amp, y_amp = _embedded_single_mode(d, i0, (rg, rg), config.gain - 1.0)
        else:
            x_amp, y_amp = _embedded_single_mode(d, i0, (rg, 1.0 / rg), 0.0)
    for _ in range(n_steps):
        if apply_loss:
            data = x_loss @ data @ x_loss.T + y_loss
        if apply_amp:
            data = x_amp @ data @ x_amp.T + y_amp
    return data


def propagate_link(sigma: CovarianceMatrix, config: LinkConfig, on_mode: int = 0,
                   spans: range | None = None) -> CovarianceMatrix:
    """Send one mode of a state through the link, span by span.

    Each span applies the thermal-loss map followed by the amplifier map,
    both embedded on ``on_mode``.  ``spans`` restricts propagation to a
    subrange of 1-based span indices (all spans are identical, so only the
    count matters); this is how a state intercepted at span k is carried
    through the remaining spans k+1 .. M.
    """
    if spans is None:
        spans = range(1, config.spans + 1)
    for j in spans:
        if not 1 <= j <= config.spans:
            raise ValueError(f"span index {j} outside 1..{config.spans}")
    if len(spans) == 0:
        return sigma
    return CovarianceMatrix(_propagate_data(sigma.data, config, on_mode, len(spans)))


def _geometric_factor(x: float, m: int) -> float:
    """(1 - x^m) / ((1 - x) x^(m-1)), with the x -> 1 limit equal to m."""
    if abs(1.0 - x) < _GEOM_SINGULARITY_TOL:
        return float(m)
    return (1.0 - x ** m) / ((1.0 - x) * x ** (m - 1))


def effective_channel(config: LinkConfig) -> EffectiveChannel:
    """Closed-form effective channel of the whole M-span link.

    For a PIA link both quadratures see t = (GT)^M and input-referred noise
    n = geom(GT, M) (N + N_G) with N = (1-T)(1+2 n_bar)/T the per-span loss
    noise and N_G = (G-1)/(GT) the amplifier noise.  A PSA link is phase
    sensitive: the amplified quadrature sees (GT)^M and geom(GT, M) N, the
    deamplified one (T/G)^M and geom(T/G, M) N.  The exactly compensating
    gain GT = 1 is a removable singularity evaluated as its limit.
    """
    t, n_bar = span_params(config)
    m = config.spans
    g = config.gain
    noise_single = (1.0 - t) * (1.0 + 2.0 * n_bar) / t
    if config.amplifier is AmplifierKind.PSA:
        x_q, x_p = g * t, t / g
        t_q, t_p = x_q ** m, x_p ** m
        n_q = _geometric_factor(x_q, m) * noise_single
        n_p = _geometric_factor(x_p, m) * noise_single
    else:
        # PIA, or the no-amplifier link as its G = 1 special case.
        g_eff = g if config.amplifier is AmplifierKind.PIA else 1.0
        x = g_eff * t
        t_q = t_p = x ** m
        n_q = n_p = _geometric_factor(x, m) * (noise_single + (g_eff - 1.0) / x)
    return EffectiveChannel(t_q, t_p, max(n_q, 0.0), max(n_p, 0.0))


def continuous_limit_channel(config: LinkConfig, total_gain: float) -> EffectiveChannel:
    """Effective channel in the continuous-amplification limit M >> 1.

    The total transmissivity T_n = 10^(-kappa L / 10) is held fixed while
    T -> 1 and G^M -> total_gain.  The limits read t_q = G_inf T_n,
    t_p = T_n / G_inf and n = (1 - a)/a * ln(T_n)/ln(a) * (1 + 2 n_bar)
    with a the corresponding transmissivity; a = 1 is a removable
    singularity with limit -ln(T_n) (1 + 2 n_bar).
    """
    if total_gain < 1.0:
        raise ValueError(f"total gain {total_gain} below 1")
    t_n = 10.0 ** (-config.loss_db_per_km * config.length_km / 10.0)
    if not 0.0 < t_n < 1.0:
        raise ValueError("continuous limit needs a lossy link (0 < T_n < 1)")
    n_bar = t_n * config.excess_noise / (2.0 * (1.0 - t_n))
    v_th = 1.0 + 2.0 * n_bar
    log_tn = np.log(t_n)

    def limit_noise(a: float) -> float:
        if abs(1.0 - a) < _GEOM_SINGULARITY_TOL:
            return -log_tn * v_th
        return (1.0 - a) / a * log_tn / np.log(a) * v_th

    t_q = total_gain * t_n
    t_p = t_n / total_gain
    return EffectiveChannel(t_q, t_p, limit_noise(t_q), limit_noise(t_p))


def shared_cm(config: LinkConfig, v: float, case: ProtocolCase) -> CovarianceMatrix:
    """Closed-form covariance matrix shared by Alice and Bob after the link.

    Mode 0 is Alice's retained arm (variance v), mode 1 is Bob's received
    mode with per-quadrature variance t (v + n) and correlations
    +sqrt(t_q) z on q, -sqrt(t_p) z on p, where z = sqrt(v^2 - 1).
    """
    if v < 1.0:
        raise ValueError(f"sub-vacuum modulation variance {v}; need v >= 1")
    eff = effective_channel(config.for_case(case))
    z = np.sqrt(v * v - 1.0)
    out = np.zeros((4, 4))
    out[0, 0] = out[1, 1] = v
    out[2, 2] = eff.t_q * (v + eff.n_q)
    out[3, 3] = eff.t_p * (v + eff.n_p)
    out[0, 2] = out[2, 0] = np.sqrt(eff.t_q) * z
    out[1, 3] = out[3, 1] = -np.sqrt(eff.t_p) * z
    return CovarianceMatrix(out)


def gain_constraint_max(v: float, t_span: float, excess_noise: float,
                        case: ProtocolCase) -> float:
    """Largest gain keeping the per-span optical power below the input power.

    PSA links (cases IIa/IIb): G_max = V / (1 + T (V + eps - 1)).  PIA links
    (case I): G_max = (1 + V) / (2 + T (V + eps - 1)).  The power budget is
    tightest on the first span, so satisfying it there satisfies it on all
    spans.  The result can drop below 1 for V close to 1 on noisy spans;
    an unamplified link (G = 1) is always admissible regardless.
    """
    if v < 1.0:
        raise ValueError(f"sub-vacuum modulation variance {v}")
    if not 0.0 < t_span <= 1.0:
        raise ValueError(f"span transmissivity {t_span} outside (0, 1]")
    if case is ProtocolCase.NO_AMPLIFIER:
        return 1.0
    denom = t_span * (v + excess_noise - 1.0)
    if case is ProtocolCase.CASE_I:
        return (1.0 + v) / (2.0 + denom)
    return v / (1.0 + denom)


def check_power_constraint(config: LinkConfig, v: float, tol: float = 1e-9) -> bool:
    """Verify span by span that the monitored quadrature never exceeds v.

    Tracks the amplified-quadrature variance (q; both quadratures for PIA)
    through every span of the link and checks it stays at or below the
    input variance v.
    """
    if config.amplifier is AmplifierKind.NONE:
        return True
    t, n_bar = span_params(config)
    add = (1.0 - t) * (1.0 + 2.0 * n_bar)
    var = v
    for _ in range(config.spans):
        var = config.gain * (t * var + add)
        if config.amplifier is AmplifierKind.PIA:
            var += config.gain - 1.0
        if var > v * (1.0 + tol) + tol:
            return False
    return True
