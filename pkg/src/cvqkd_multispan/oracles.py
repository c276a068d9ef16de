"""Independent cross-check routes for the generic symplectic engine.

Everything here re-derives quantities the library computes elsewhere, by a
different route: closed-form covariance-matrix assemblies built from
explicit geometric sums, finite-z Schur complements standing in for the
analytic homodyne limits, and the two-mode determinant formula for
symplectic spectra.  These functions back the self-check command and the
test suite; runtime code never calls them.
"""

from __future__ import annotations

import numpy as np

from .gaussian import I2, PAULI_Z, CovarianceMatrix, MeasurementKind
from .link import AmplifierKind

# Finite-z stand-in for the analytic homodyne limit; one part in 1e8 keeps
# both the limit error and the conditioning error of the Schur step small.
HOMODYNE_Z = 1e-8


# ---------------------------------------------------------------------------
# Finite-z measurement route
# ---------------------------------------------------------------------------

def measurement_cm_finite_z(kind: MeasurementKind, z: float = HOMODYNE_Z) -> np.ndarray:
    """Measurement matrix diag(z, 1/z) (q), diag(1/z, z) (p) or I2 (het)."""
    if kind is MeasurementKind.HETERODYNE:
        return I2.copy()
    if kind is MeasurementKind.HOMODYNE_Q:
        return np.diag([z, 1.0 / z])
    return np.diag([1.0 / z, z])


def conditional_cm_finite_z(sigma: np.ndarray, measured_mode: int,
                            kind: MeasurementKind, z: float = HOMODYNE_Z) -> np.ndarray:
    """Plain Schur complement with a finite measurement matrix."""
    n = sigma.shape[0] // 2
    keep = [i for m in range(n) if m != measured_mode for i in (2 * m, 2 * m + 1)]
    meas = [2 * measured_mode, 2 * measured_mode + 1]
    sig_a = sigma[np.ix_(keep, keep)]
    sig_b = sigma[np.ix_(meas, meas)]
    sig_c = sigma[np.ix_(keep, meas)]
    return sig_a - sig_c @ np.linalg.solve(sig_b + measurement_cm_finite_z(kind, z), sig_c.T)


def mutual_information_finite_z(sigma: np.ndarray, kind: MeasurementKind,
                                z: float = HOMODYNE_Z) -> float:
    """Raw determinant-ratio mutual information with a finite homodyne matrix.

    0.5 log2( det(sigma_A + I2) det(sigma_B + sigma_m)
              / det(sigma_AB + I2 (+) sigma_m) )
    for heterodyne Alice (mode 0) and homodyne Bob (mode 1).
    """
    sig_m = measurement_cm_finite_z(kind, z)
    sig_a = sigma[0:2, 0:2]
    sig_b = sigma[2:4, 2:4]
    joint = sigma + np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), sig_m]])
    num = np.linalg.det(sig_a + I2) * np.linalg.det(sig_b + sig_m)
    return float(0.5 * np.log2(num / np.linalg.det(joint)))


# ---------------------------------------------------------------------------
# Two-mode symplectic spectrum from block determinants
# ---------------------------------------------------------------------------

def symplectic_pair_delta_form(sigma: np.ndarray) -> tuple[float, float]:
    """Symplectic eigenvalues of a two-mode CM from the determinant formula.

    d^2 = (Delta +/- sqrt(Delta^2 - 4 det sigma)) / 2 with
    Delta = det A + det B + 2 det C for the block form [[A, C], [C^T, B]].
    """
    if sigma.shape != (4, 4):
        raise ValueError(f"need a two-mode covariance matrix, got shape {sigma.shape}")
    det_a = np.linalg.det(sigma[0:2, 0:2])
    det_b = np.linalg.det(sigma[2:4, 2:4])
    det_c = np.linalg.det(sigma[0:2, 2:4])
    delta = det_a + det_b + 2.0 * det_c
    root = np.sqrt(max(delta * delta - 4.0 * np.linalg.det(sigma), 0.0))
    d_plus = np.sqrt(max((delta + root) / 2.0, 0.0))
    d_minus = np.sqrt(max((delta - root) / 2.0, 0.0))
    return float(d_plus), float(d_minus)


# ---------------------------------------------------------------------------
# Closed-form link arms via explicit geometric sums
# ---------------------------------------------------------------------------

def _arm_after_spans(v: float, t: float, n_bar: float, gain_var: float,
                     gain_add: float, j: int) -> tuple[float, float]:
    """(variance, correlation) of Bob's arm after j spans, one quadrature.

    gain_var is the per-span amplifier variance gain on this quadrature
    (G for PIA and the amplified PSA quadrature, 1/G for the deamplified
    one); gain_add is the per-span additive amplifier noise (G - 1 for PIA,
    0 for PSA).  Uses t_j = (g t)^j and the geometric-sum form of the
    accumulated noise, so it is independent of the span-by-span engine.
    """
    x = gain_var * t
    t_j = x ** j
    noise_span = (1.0 - t) * (1.0 + 2.0 * n_bar) / t + gain_add / x
    geom = sum(x ** i for i in range(j))
    n_j = geom / x ** max(j - 1, 0) * noise_span if j > 0 else 0.0
    b_j = t_j * (v + n_j)
    z_j = np.sqrt(t_j) * np.sqrt(v * v - 1.0)
    return b_j, z_j


def _quadrature_gains(kind: AmplifierKind, g: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """((gain_var_q, add_q), (gain_var_p, add_p)) for one amplifier."""
    if kind is AmplifierKind.PIA:
        return (g, g - 1.0), (g, g - 1.0)
    if kind is AmplifierKind.PSA:
        return (g, 0.0), (1.0 / g, 0.0)
    return (1.0, 0.0), (1.0, 0.0)


def shared_cm_closed(v: float, t: float, n_bar: float, g: float, m: int,
                     kind: AmplifierKind) -> np.ndarray:
    """Alice-Bob CM after the full link, assembled from the closed forms."""
    (gq, aq), (gp, ap) = _quadrature_gains(kind, g)
    b_q, z_q = _arm_after_spans(v, t, n_bar, gq, aq, m)
    b_p, z_p = _arm_after_spans(v, t, n_bar, gp, ap, m)
    corr = np.diag([z_q, -z_p])
    return np.block([[v * I2, corr], [corr, np.diag([b_q, b_p])]])


# ---------------------------------------------------------------------------
# Closed-form tripartite states for the entangling-cloner attack
# ---------------------------------------------------------------------------

def tripartite_closed_pia(v: float, t: float, n_bar: float, g: float, m: int,
                          k: int, v_eps: float) -> np.ndarray:
    """Joint (A, B, E1, E2) CM for the attack on span k of a PIA link.

    Direct assembly of the closed-form blocks: Eve's reduced state, her
    correlations with Alice and Bob, and the untouched Alice-Bob block.
    """
    z_eps = np.sqrt(v_eps * v_eps - 1.0)
    b_prev, z_prev = _arm_after_spans(v, t, n_bar, g, g - 1.0, k - 1)

    e1 = (1.0 - t) * b_prev + t * v_eps
    sigma_e = np.block([[e1 * I2, np.sqrt(t) * z_eps * PAULI_Z],
                        [np.sqrt(t) * z_eps * PAULI_Z, v_eps * I2]])

    c1 = -np.sqrt(1.0 - t) * z_prev
    c2 = np.sqrt((g * t) ** (m - k + 1) * (1.0 - t)) * (v_eps - b_prev)
    c3 = np.sqrt((g * t) ** (m - k) * g * (1.0 - t)) * z_eps
    sigma_ae = np.hstack([c1 * PAULI_Z, np.zeros((2, 2))])
    sigma_be = np.hstack([c2 * I2, c3 * PAULI_Z])

    sigma_ab = shared_cm_closed(v, t, n_bar, g, m, AmplifierKind.PIA)
    top = np.hstack([sigma_ab, np.vstack([sigma_ae, sigma_be])])
    bottom = np.hstack([np.vstack([sigma_ae, sigma_be]).T, sigma_e])
    return np.vstack([top, bottom])


def tripartite_closed_psa(v: float, t: float, n_bar: float, g: float, m: int,
                          k: int, v_eps: float) -> np.ndarray:
    """Joint (A, B, E1, E2) CM for the attack on span k of a PSA link.

    Phase-sensitive variant: every block carries separate q and p entries
    built from the amplified (g t) and deamplified (t / g) chains.
    """
    z_eps = np.sqrt(v_eps * v_eps - 1.0)
    b1_prev, z1_prev = _arm_after_spans(v, t, n_bar, g, 0.0, k - 1)
    b2_prev, z2_prev = _arm_after_spans(v, t, n_bar, 1.0 / g, 0.0, k - 1)

    e1 = (1.0 - t) * b1_prev + t * v_eps
    e2 = (1.0 - t) * b2_prev + t * v_eps
    rz = np.sqrt(t) * z_eps
    sigma_e = np.array([
        [e1, 0.0, rz, 0.0],
        [0.0, e2, 0.0, -rz],
        [rz, 0.0, v_eps, 0.0],
        [0.0, -rz, 0.0, v_eps],
    ])

    c1_1 = -np.sqrt(1.0 - t) * z1_prev
    c1_2 = -np.sqrt(1.0 - t) * z2_prev
    c2_1 = np.sqrt((g * t) ** (m - k + 1) * (1.0 - t)) * (v_eps - b1_prev)
    c2_2 = np.sqrt((t / g) ** (m - k + 1) * (1.0 - t)) * (v_eps - b2_prev)
    c3_1 = np.sqrt((g * t) ** (m - k) * g * (1.0 - t)) * z_eps
    c3_2 = np.sqrt((t / g) ** (m - k) / g * (1.0 - t)) * z_eps
    sigma_ae = np.array([[c1_1, 0.0, 0.0, 0.0],
                         [0.0, -c1_2, 0.0, 0.0]])
    sigma_be = np.array([[c2_1, 0.0, c3_1, 0.0],
                         [0.0, c2_2, 0.0, -c3_2]])

    sigma_ab = shared_cm_closed(v, t, n_bar, g, m, AmplifierKind.PSA)
    top = np.hstack([sigma_ab, np.vstack([sigma_ae, sigma_be])])
    bottom = np.hstack([np.vstack([sigma_ae, sigma_be]).T, sigma_e])
    return np.vstack([top, bottom])


def eve_conditional_closed(tripartite: np.ndarray, kind: MeasurementKind) -> np.ndarray:
    """Eve's conditional CM after Bob's homodyne, from the closed-form blocks.

    sigma_E - outer(c, c) / var where c is the measured-quadrature row of
    the B-Eve correlation block and var Bob's measured variance; this is
    the analytic z-limit of sigma_E - sigma_BE^T [sigma_B + sigma_m]^{-1}
    sigma_BE.
    """
    j = kind.quadrature_index
    sigma_e = tripartite[4:8, 4:8]
    sigma_be = tripartite[2:4, 4:8]
    var = tripartite[2 + j, 2 + j]
    row = sigma_be[j, :]
    return sigma_e - np.outer(row, row) / var


def unconditional_d3_closed(v: float, n_eff: float) -> float:
    """Conditional symplectic eigenvalue V sqrt(1 - Z^2 / (V (V + N))).

    N is the effective added noise of the measured quadrature after the
    full link; this is the closed form of sqrt(det) of Alice's state
    conditioned on Bob's homodyne outcome.
    """
    z_sq = v * v - 1.0
    return float(v * np.sqrt(1.0 - z_sq / (v * (v + n_eff))))


# ---------------------------------------------------------------------------
# Random physical states for randomized suites
# ---------------------------------------------------------------------------

def random_two_mode_cm(rng: np.random.Generator) -> CovarianceMatrix:
    """Random physical two-mode CM built from CP maps on a squeezed seed."""
    v = 1.0 + rng.uniform(0.0, 7.0)
    sigma = np.block([[v * I2, np.sqrt(v * v - 1.0) * PAULI_Z],
                      [np.sqrt(v * v - 1.0) * PAULI_Z, v * I2]])
    # Local phase-sensitive gains keep the state pure but break symmetry.
    g0, g1 = rng.uniform(1.0, 1.5, size=2)
    squeeze = np.diag([np.sqrt(g0), 1.0 / np.sqrt(g0), np.sqrt(g1), 1.0 / np.sqrt(g1)])
    sigma = squeeze @ sigma @ squeeze.T
    # Independent thermal-loss channels on both arms make it properly mixed.
    for mode in (0, 1):
        t = rng.uniform(0.2, 1.0)
        y = (1.0 - t) * (1.0 + 2.0 * rng.uniform(0.0, 1.5))
        x_full = np.eye(4)
        x_full[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = np.sqrt(t) * I2
        y_full = np.zeros((4, 4))
        y_full[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = y * I2
        sigma = x_full @ sigma @ x_full.T + y_full
    return CovarianceMatrix(0.5 * (sigma + sigma.T))
