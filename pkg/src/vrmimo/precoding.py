"""Linear precoding and SINR evaluation.

Conjugate beamforming (CB) and zero-forcing (ZF), each scaled by a single
scalar beta so the total-power constraint trace(P G^H G) = P holds exactly:

    CB:  G = beta * H,                  beta = sqrt(P / trace(P H^H H))
    ZF:  G = beta * H (H^H H)^{-1},     beta = sqrt(P / trace(P (H^H H)^{-1}))

with P = diag(p_1, ..., p_K) the signal-power allocation.  The downlink
SINR of user k under any precoder G is

    gamma_k = p_k |h_k^H g_k|^2 / (sum_{j != k} p_j |h_k^H g_j|^2 + sigma^2).

For the two precoders above this reduces to closed per-realization forms in
the Gram matrix A = H^H H, which `sinr_cb_closed` / `sinr_zf_closed`
implement; they must agree with the generic route to floating-point
accuracy, which the test suite checks on random instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannel, InvalidParam, ShapeError, SingularChannel
from .model import PowerAllocation

# Rank test used by the ZF factory: smallest/largest singular value at or
# below this ratio counts as rank deficient.
RANK_RTOL = 1e-10

# Provenance labels carried by SinrVector.
PROV_REALIZATION = "monte-carlo"            # exact per-realization value
PROV_DET_EQUIV = "deterministic-equivalent"
PROV_CLOSED_FORM = "closed-form"
PROV_LINK_LEVEL = "link-level"


@dataclass(frozen=True)
class PrecodingMatrix:
    """Precoder G (M x K) plus its scalar normalization and origin."""

    G: np.ndarray
    beta: float
    kind: str  # "cb" | "zf"


@dataclass(frozen=True)
class SinrVector:
    """Per-user SINR values (linear scale) with a provenance tag."""

    gamma: np.ndarray
    provenance: str

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ShapeError("SINR vector must be a nonempty 1-D vector")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise InvalidParam("SINR entries must be finite and nonnegative")
        g = np.array(g, copy=True)
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    def db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.gamma)


def _check_channel(H: np.ndarray, power: PowerAllocation) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ShapeError("channel matrix must be 2-D (antennas x users)")
    M, K = H.shape
    if M < K or K < 1:
        raise ShapeError(f"need M >= K >= 1, got shape {H.shape}")
    if power.n_users != K:
        raise ShapeError(f"power allocation has {power.n_users} entries for K={K} users")
    return H


def cb_precoder(H: np.ndarray, power: PowerAllocation, total_power: float) -> PrecodingMatrix:
    """Conjugate beamforming G = beta * H."""
    H = _check_channel(H, power)
    if total_power <= 0:
        raise InvalidParam("total power must be positive")
    # trace(P H^H H) = sum_k p_k ||h_k||^2
    weighted = float(np.sum(power.p * np.sum(np.abs(H) ** 2, axis=0)))
    if weighted <= 0.0:
        raise DegenerateChannel("channel matrix is zero; CB normalization undefined")
    beta = float(np.sqrt(total_power / weighted))
    return PrecodingMatrix(G=beta * H, beta=beta, kind="cb")


def zf_precoder(H: np.ndarray, power: PowerAllocation, total_power: float) -> PrecodingMatrix:
    """Zero-forcing G = beta * H (H^H H)^{-1}; raises SingularChannel when
    H is numerically rank deficient (singular-value ratio <= RANK_RTOL)."""
    H = _check_channel(H, power)
    if total_power <= 0:
        raise InvalidParam("total power must be positive")
    s = np.linalg.svd(H, compute_uv=False)
    if s[0] <= 0.0 or s[-1] <= RANK_RTOL * s[0]:
        raise SingularChannel(
            f"rank-deficient channel (sigma_min/sigma_max = "
            f"{0.0 if s[0] <= 0 else s[-1] / s[0]:.3e})")
    A = H.conj().T @ H
    G0 = np.linalg.solve(A, H.conj().T).conj().T          # H A^{-1}
    # G0^H G0 = A^{-1}, so its column norms give diag((H^H H)^{-1}).
    diag_inv = np.sum(np.abs(G0) ** 2, axis=0)
    beta = float(np.sqrt(total_power / float(np.sum(power.p * diag_inv))))
    return PrecodingMatrix(G=beta * G0, beta=beta, kind="zf")


def sinr_general(H: np.ndarray, prec: PrecodingMatrix, power: PowerAllocation,
                 noise_power: float) -> SinrVector:
    """Exact per-user SINR of an arbitrary precoder on one realization."""
    H = _check_channel(H, power)
    if noise_power <= 0:
        raise InvalidParam("noise power must be positive")
    if prec.G.shape != H.shape:
        raise ShapeError("precoder and channel shapes differ")
    A = H.conj().T @ prec.G                                # A[k, j] = h_k^H g_j
    cross = np.abs(A) ** 2
    sig = power.p * np.diag(cross)
    interf = cross @ power.p - sig
    return SinrVector(gamma=sig / (interf + noise_power), provenance=PROV_REALIZATION)


def sinr_cb_closed(H: np.ndarray, power: PowerAllocation, rho: float) -> SinrVector:
    """Per-realization CB SINR written directly in the Gram matrix A = H^H H:

        gamma_k = p_k rho |A_kk|^2 / (rho sum_{j!=k} p_j |A_kj|^2 + trace(P A)).
    """
    H = _check_channel(H, power)
    if rho <= 0:
        raise InvalidParam("rho must be positive")
    A = H.conj().T @ H
    diag = np.diag(A).real
    if not np.any(diag > 0):
        raise DegenerateChannel("channel matrix is zero")
    cross = np.abs(A) ** 2
    sig = power.p * rho * diag ** 2
    interf = rho * (cross @ power.p - power.p * diag ** 2)
    gamma = sig / (interf + float(np.sum(power.p * diag)))
    return SinrVector(gamma=gamma, provenance=PROV_REALIZATION)


def sinr_zf_closed(H: np.ndarray, power: PowerAllocation, rho: float) -> SinrVector:
    """Per-realization ZF SINR: gamma_k = p_k rho / trace(P (H^H H)^{-1})."""
    H = _check_channel(H, power)
    if rho <= 0:
        raise InvalidParam("rho must be positive")
    s = np.linalg.svd(H, compute_uv=False)
    if s[0] <= 0.0 or s[-1] <= RANK_RTOL * s[0]:
        raise SingularChannel("rank-deficient channel; ZF SINR undefined")
    A = H.conj().T @ H
    trace_p_ainv = float(np.sum(power.p * np.diag(np.linalg.inv(A)).real))
    gamma = power.p * rho / trace_p_ainv
    return SinrVector(gamma=gamma, provenance=PROV_REALIZATION)


def link_level_validate(H: np.ndarray, prec: PrecodingMatrix, power: PowerAllocation,
                        noise_power: float, n_symbols: int,
                        rng: np.random.Generator | None = None) -> SinrVector:
    """Estimate per-user SINR by actually transmitting symbols.

    Draws n_symbols unit-power complex Gaussian symbols per user, forms the
    received samples y_k = sum_j sqrt(p_j) h_k^H g_j s_j + n_k and estimates
    SINR from the sample powers of the signal, interference and noise parts.
    Slow by design; used as an end-to-end check of the algebraic routes.
    """
    H = _check_channel(H, power)
    if n_symbols < 1000:
        raise InvalidParam("need n_symbols >= 1000 for a stable estimate")
    if noise_power <= 0:
        raise InvalidParam("noise power must be positive")
    if rng is None:
        rng = np.random.default_rng()
    K = H.shape[1]
    # Effective gains including the per-user signal amplitudes.
    A = (H.conj().T @ prec.G) * np.sqrt(power.p)[None, :]
    S = (rng.standard_normal((K, n_symbols)) + 1j * rng.standard_normal((K, n_symbols))) \
        / np.sqrt(2.0)
    N = np.sqrt(noise_power / 2.0) * (rng.standard_normal((K, n_symbols))
                                      + 1j * rng.standard_normal((K, n_symbols)))
    desired = np.diag(A)[:, None] * S
    received = A @ S
    interference = received - desired
    sig_p = np.mean(np.abs(desired) ** 2, axis=1)
    int_p = np.mean(np.abs(interference) ** 2, axis=1)
    noise_p = np.mean(np.abs(N) ** 2, axis=1)
    return SinrVector(gamma=sig_p / (int_p + noise_p), provenance=PROV_LINK_LEVEL)
