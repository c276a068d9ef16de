"""Gaussian-state primitives on covariance matrices.

All states are zero-mean Gaussian states of n bosonic modes, described in
shot-noise units (vacuum variance = 1) by a symmetric 2n x 2n covariance
matrix with interleaved quadrature ordering (q1, p1, q2, p2, ...).  First
moments are never tracked: every source in this package is zero-mean and
all derived quantities (entropies, mutual informations, key rates) depend
on second moments only.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.linalg import block_diag

# 2x2 building blocks reused all over the package.
I2 = np.eye(2)
PAULI_Z = np.diag([1.0, -1.0])
OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

# Symmetry is enforced exactly; deviations above this are construction bugs.
SYMMETRY_TOL = 1e-12
# Symplectic eigenvalues in [1 - CLAMP, 1) are treated as exactly 1 (pure
# states computed in double precision); below 1 - HARD the state is rejected.
PHYSICALITY_CLAMP = 1e-9
PHYSICALITY_HARD = 1e-6


_FORM_CACHE: dict[int, np.ndarray] = {}


def symplectic_form(n_modes: int) -> np.ndarray:
    """Symplectic form Omega for n modes in (q1,p1,...,qn,pn) ordering."""
    form = _FORM_CACHE.get(n_modes)
    if form is None:
        form = np.kron(np.eye(n_modes), OMEGA_1)
        form.setflags(write=False)
        _FORM_CACHE[n_modes] = form
    return form


class MeasurementKind(Enum):
    """Gaussian single-mode measurements used by the protocol.

    Heterodyne is represented by the 2x2 identity measurement matrix.
    Homodyne detections are the z->0 (q) and z->infinity (p) limits of
    diag(z, 1/z); those limits are always taken analytically here, never
    through a finite large/small z, which would lose precision to
    catastrophic cancellation.
    """

    HOMODYNE_Q = "homodyne_q"
    HOMODYNE_P = "homodyne_p"
    HETERODYNE = "heterodyne"

    @property
    def quadrature_index(self) -> int:
        """Index of the measured quadrature within a mode (q=0, p=1)."""
        if self is MeasurementKind.HOMODYNE_Q:
            return 0
        if self is MeasurementKind.HOMODYNE_P:
            return 1
        raise ValueError("heterodyne measures both quadratures")


class CovarianceMatrix:
    """Validated covariance matrix of an n-mode Gaussian state.

    The constructor checks squareness, even dimension, symmetry to
    SYMMETRY_TOL and strictly positive diagonal, then stores the
    symmetrized matrix read-only.  Physicality (all symplectic eigenvalues
    >= 1) is enforced where spectra are actually consumed, see
    :func:`symplectic_eigenvalues`, and can be queried via
    :meth:`is_physical`.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"covariance matrix must be square, got shape {arr.shape}")
        if arr.shape[0] % 2 != 0 or arr.shape[0] == 0:
            raise ValueError(f"covariance matrix must be 2n x 2n, got shape {arr.shape}")
        gap = arr - arr.T
        max_gap = abs(float(gap.max())) + abs(float(gap.min()))
        if max_gap > SYMMETRY_TOL:
            # Entries may legitimately be large; re-check entrywise against
            # the relative tolerance before rejecting.
            if np.any(np.abs(gap) > SYMMETRY_TOL * np.maximum(1.0, np.abs(arr))):
                raise ValueError(
                    f"covariance matrix is not symmetric (max gap {np.abs(gap).max():.3e})")
        if float(arr.diagonal().min()) <= 0.0:
            raise ValueError("covariance matrix has non-positive diagonal entries")
        sym = 0.5 * (arr + arr.T)
        sym.setflags(write=False)
        object.__setattr__(self, "data", sym)

    def __setattr__(self, name, value):
        raise AttributeError("CovarianceMatrix is immutable")

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2

    def block(self, modes) -> np.ndarray:
        """Sub-covariance-matrix of the given mode indices (writable copy)."""
        idx = _quadrature_indices(modes, self.n_modes)
        return self.data[np.ix_(idx, idx)].copy()

    def cross_block(self, row_modes, col_modes) -> np.ndarray:
        """Correlation block between two disjoint groups of modes."""
        rows = _quadrature_indices(row_modes, self.n_modes)
        cols = _quadrature_indices(col_modes, self.n_modes)
        return self.data[np.ix_(rows, cols)].copy()

    def is_physical(self, tol: float = PHYSICALITY_CLAMP) -> bool:
        """Whether sigma + i*Omega >= 0, i.e. all symplectic eigenvalues >= 1 - tol."""
        return bool(_symplectic_moduli(self.data).min() >= 1.0 - tol)

    def __repr__(self) -> str:
        return f"CovarianceMatrix(n_modes={self.n_modes})"


def _quadrature_indices(modes, n_modes) -> list:
    if isinstance(modes, int):
        modes = (modes,)
    idx = []
    for m in modes:
        if not 0 <= m < n_modes:
            raise IndexError(f"mode index {m} out of range for {n_modes} modes")
        idx.extend((2 * m, 2 * m + 1))
    return idx


class GaussianCPMap:
    """Gaussian completely positive map sigma -> X sigma X^T + Y.

    Symplectic (unitary) maps are the special case Y = 0 with X symplectic.
    Validation checks Y + i(Omega - X Omega X^T) >= 0 on the eigenvalues of
    the Hermitian part; pass ``validate=False`` only for maps that are CP by
    construction (e.g. embeddings of validated maps).
    """

    __slots__ = ("x", "y")

    def __init__(self, x: np.ndarray, y: np.ndarray, validate: bool = True):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] % 2:
            raise ValueError(f"X and Y must be matching 2n x 2n matrices, got {x.shape} and {y.shape}")
        if validate:
            gap = np.abs(y - y.T)
            if np.any(gap > SYMMETRY_TOL * np.maximum(1.0, np.abs(y))):
                raise ValueError("Y matrix of a Gaussian CP map must be symmetric")
            omega = symplectic_form(x.shape[0] // 2)
            herm = y + 1j * (omega - x @ omega @ x.T)
            if np.linalg.eigvalsh(herm).min() < -PHYSICALITY_CLAMP:
                raise ValueError("(X, Y) pair violates complete positivity")
        x = x.copy()
        y = 0.5 * (y + y.T)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianCPMap is immutable")

    @property
    def n_modes(self) -> int:
        return self.x.shape[0] // 2

    def __repr__(self) -> str:
        return f"GaussianCPMap(n_modes={self.n_modes})"


def identity_map(n_modes: int) -> GaussianCPMap:
    d = 2 * n_modes
    return GaussianCPMap(np.eye(d), np.zeros((d, d)), validate=False)


def tmsv_cm(v: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with quadrature variance v >= 1.

    The covariance matrix is [[v*I2, z*sigma_z], [z*sigma_z, v*I2]] with
    z = sqrt(v^2 - 1); v = 1 is the two-mode vacuum.
    """
    if v < 1.0:
        raise ValueError(f"sub-vacuum modulation variance {v}; need v >= 1")
    z = np.sqrt(v * v - 1.0)
    out = np.zeros((4, 4))
    out[0, 0] = out[1, 1] = out[2, 2] = out[3, 3] = v
    out[0, 2] = out[2, 0] = z
    out[1, 3] = out[3, 1] = -z
    return CovarianceMatrix(out)


def thermal_cm(n_bar: float) -> CovarianceMatrix:
    """Single-mode thermal state with mean photon number n_bar >= 0."""
    if n_bar < 0.0:
        raise ValueError(f"negative mean photon number {n_bar}")
    return CovarianceMatrix((1.0 + 2.0 * n_bar) * I2)


def vacuum_cm(n_modes: int = 1) -> CovarianceMatrix:
    """Vacuum state of n modes (identity covariance matrix)."""
    return CovarianceMatrix(np.eye(2 * n_modes))


def apply_cp(sigma: CovarianceMatrix, cp_map: GaussianCPMap) -> CovarianceMatrix:
    """Evolve a state through a Gaussian CP map: sigma -> X sigma X^T + Y."""
    if cp_map.n_modes != sigma.n_modes:
        raise ValueError(f"map acts on {cp_map.n_modes} modes, state has {sigma.n_modes}")
    # The constructor re-enforces symmetry as (A + A^T) / 2.
    return CovarianceMatrix(cp_map.x @ sigma.data @ cp_map.x.T + cp_map.y)


def tensor(a: CovarianceMatrix, b: CovarianceMatrix) -> CovarianceMatrix:
    """Direct sum of two states; modes of ``a`` come first."""
    return CovarianceMatrix(block_diag(a.data, b.data))


def embed_on_modes(cp_map: GaussianCPMap, target_modes, total_modes: int) -> GaussianCPMap:
    """Extend a map to ``total_modes`` modes, acting as identity elsewhere.

    ``target_modes`` lists the global mode index for each local mode of the
    map, e.g. a single-mode map on mode 1 of a bipartite state becomes
    X = I2 (+) X_local, Y = 0 (+) Y_local.
    """
    targets = tuple(target_modes)
    if len(targets) != cp_map.n_modes:
        raise ValueError(f"map has {cp_map.n_modes} modes but {len(targets)} targets given")
    if len(set(targets)) != len(targets):
        raise ValueError(f"target modes must be distinct, got {targets}")
    for t in targets:
        if not 0 <= t < total_modes:
            raise IndexError(f"target mode {t} out of range for {total_modes} modes")
    d = 2 * total_modes
    x_full = np.eye(d)
    y_full = np.zeros((d, d))
    for i, ti in enumerate(targets):
        for j, tj in enumerate(targets):
            x_full[2 * ti:2 * ti + 2, 2 * tj:2 * tj + 2] = cp_map.x[2 * i:2 * i + 2, 2 * j:2 * j + 2]
            y_full[2 * ti:2 * ti + 2, 2 * tj:2 * tj + 2] = cp_map.y[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    return GaussianCPMap(x_full, y_full, validate=False)


def beam_splitter_symplectic(transmissivity: float) -> GaussianCPMap:
    """Two-mode beam splitter of transmissivity T as a symplectic map.

    Output mode 0 is the transmitted port sqrt(T) a + sqrt(1-T) b.
    """
    t = transmissivity
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmissivity {t} outside [0, 1]")
    rt, rr = np.sqrt(t), np.sqrt(1.0 - t)
    x = np.block([[rt * I2, rr * I2], [-rr * I2, rt * I2]])
    return GaussianCPMap(x, np.zeros((4, 4)), validate=False)


def condition_on_measurement(sigma: CovarianceMatrix, measured_mode: int,
                             kind: MeasurementKind) -> CovarianceMatrix:
    """Conditional state of the remaining modes after a Gaussian measurement.

    For heterodyne this is the Schur complement with measurement matrix I2.
    For homodyne the z->0 / z->infinity limit is taken analytically: with Pi
    the projector on the measured quadrature, the update subtracts
    sigma_C Pi sigma_C^T / var(measured quadrature).  The conditional
    covariance matrix does not depend on the measurement outcome.
    """
    n = sigma.n_modes
    if not 0 <= measured_mode < n:
        raise IndexError(f"measured mode {measured_mode} out of range for {n} modes")
    if n < 2:
        raise ValueError("conditioning needs at least one unmeasured mode")
    data = sigma.data
    i0 = 2 * measured_mode
    keep = np.r_[0:i0, i0 + 2:2 * n]
    rows = data[keep]
    sig_a = rows[:, keep]
    sig_b = data[i0:i0 + 2, i0:i0 + 2]
    sig_c = rows[:, i0:i0 + 2]
    if kind is MeasurementKind.HETERODYNE:
        update = sig_c @ np.linalg.solve(sig_b + I2, sig_c.T)
    else:
        j = kind.quadrature_index
        var = sig_b[j, j]
        if var <= 0.0:
            raise ValueError(f"non-positive measured-quadrature variance {var}")
        col = sig_c[:, j]
        update = np.outer(col, col) / var
    return CovarianceMatrix(sig_a - update)


def _symplectic_moduli(data: np.ndarray) -> np.ndarray:
    """Moduli of the eigenvalues of i*Omega*sigma, paired into n values."""
    n = data.shape[0] // 2
    moduli = np.abs(np.linalg.eigvals(symplectic_form(n) @ data))
    moduli.sort()
    moduli = moduli[::-1]
    # Eigenvalues come in +/- pairs; average each pair to suppress the
    # asymmetric part of the numerical noise.
    return 0.5 * (moduli[0::2] + moduli[1::2])


def symplectic_eigenvalues(sigma: CovarianceMatrix) -> np.ndarray:
    """Symplectic spectrum of a physical state, sorted in descending order.

    Values in [1 - PHYSICALITY_CLAMP, 1) are clamped to 1.  A value below
    1 - PHYSICALITY_HARD flags a non-physical state and raises.
    """
    d = _symplectic_moduli(sigma.data)
    if d.min() < 1.0 - PHYSICALITY_HARD:
        raise ValueError(
            f"non-physical covariance matrix: symplectic eigenvalue {d.min():.9f} < 1")
    return np.where((d < 1.0) & (d >= 1.0 - PHYSICALITY_CLAMP), 1.0, d)


def entropy_h(x: float) -> float:
    """Bosonic entropy of a single symplectic eigenvalue, in bits.

    h(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2), continuously
    extended by h(1) = 0.  Inputs slightly below 1 (down to the hard
    physicality tolerance) are clamped to 1.
    """
    if x < 1.0 - PHYSICALITY_HARD:
        raise ValueError(f"symplectic eigenvalue {x} below 1")
    if x <= 1.0:
        return 0.0
    up = 0.5 * (x + 1.0)
    dn = 0.5 * (x - 1.0)
    return float(up * np.log2(up) - dn * np.log2(dn))


def von_neumann_entropy(sigma: CovarianceMatrix) -> float:
    """Von Neumann entropy in bits: sum of h over the symplectic spectrum."""
    return float(sum(entropy_h(d) for d in symplectic_eigenvalues(sigma)))
