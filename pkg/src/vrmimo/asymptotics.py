"""Large-system deterministic equivalents and supporting diagnostics.

For channels h_k = sqrt(M) Theta_k^{1/2} z_k the per-user SINR concentrates,
as M and K grow with fixed ratio, around values that depend on the model
only through the traces tr(Theta_k) and cross-traces tr(Theta_k Theta_j):

    CB:  gbar_k = p_k rho tr(Theta_k)^2
                  / (rho sum_{j!=k} p_j tr(Theta_k Theta_j) + sum_j p_j tr(Theta_j))

    ZF:  gbar_k = p_k rho / sum_i p_i / t_i,
         t_i    = tr(Theta_i) - sum_{j!=i} tr(Theta_i Theta_j) / tr(Theta_j)

The ZF form drops the off-diagonal part of the Gram matrix of the
interfering channels; `diagonal_approx_error` measures exactly the quantity
that this step discards, and `epsilon_scaling_study` fits its decay rate in
M (the error mean shrinks like 1/sqrt(M) for i.i.d. channels).  The t_i can
go negative for strongly overlapping visibility regions, in which case the
ZF equivalent is meaningless; `zf_det_equiv_approx` flags this rather than
raising, and `nonnegativity_certificate` reports the margins plus a simple
sufficient condition M >= (K-1) * lambda_max(Theta_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParam, ShapeError, SingularChannel
from .precoding import PROV_DET_EQUIV, RANK_RTOL, SinrVector
from .sampling import RngStream, _complex_unit_noise
from .model import NonStationaryCovariance, PowerAllocation


def _as_theta_array(thetas) -> np.ndarray:
    """Stack covariances (NonStationaryCovariance or plain arrays) into (K, M, M)."""
    mats = [np.asarray(t.theta if isinstance(t, NonStationaryCovariance) else t,
                       dtype=complex) for t in thetas]
    if not mats:
        raise InvalidParam("need at least one covariance")
    M = mats[0].shape[0]
    for t in mats:
        if t.ndim != 2 or t.shape != (M, M):
            raise ShapeError("covariances must all be square with a common size")
    return np.stack(mats)


def _traces(T: np.ndarray):
    tr = np.einsum("kmm->k", T).real
    cross = np.einsum("kmn,jnm->kj", T, T).real
    return tr, cross


@dataclass(frozen=True)
class DetEquivReport:
    """Deterministic-equivalent SINRs plus validity information.

    For ZF, `t` holds the per-user denominators and `t_positive` their signs;
    when any t_i <= 0 the values in gamma_bar are not meaningful and `valid`
    is False.  CB has no such failure mode (`t` is None, always valid)."""

    gamma_bar: np.ndarray
    precoder: str
    t: np.ndarray | None = None
    t_positive: np.ndarray | None = None

    @property
    def valid(self) -> bool:
        return self.t_positive is None or bool(np.all(self.t_positive))

    def sinr(self) -> SinrVector:
        """The values as a SinrVector; only callable when valid."""
        if not self.valid:
            raise InvalidParam("deterministic equivalent invalid (nonpositive t_i)")
        return SinrVector(gamma=self.gamma_bar, provenance=PROV_DET_EQUIV)


def cb_det_equiv(thetas, power: PowerAllocation, rho: float) -> DetEquivReport:
    """Large-system CB SINR from traces and cross-traces of the covariances."""
    T = _as_theta_array(thetas)
    if power.n_users != T.shape[0]:
        raise ShapeError("power allocation length does not match number of users")
    if rho <= 0:
        raise InvalidParam("rho must be positive")
    tr, cross = _traces(T)
    if np.any(tr <= 0):
        raise InvalidParam("every covariance must have positive trace")
    p = power.p
    interf = cross @ p - p * np.diag(cross)        # sum_{j!=k} p_j tr(Theta_k Theta_j)
    gamma = p * rho * tr ** 2 / (rho * interf + float(np.sum(p * tr)))
    return DetEquivReport(gamma_bar=gamma, precoder="cb")


def zf_det_equiv_approx(thetas, power: PowerAllocation, rho: float) -> DetEquivReport:
    """Large-system ZF SINR under the Gram-diagonal approximation.

    Nonpositive denominators t_i are reported through the flags, not raised:
    overlap regimes where the approximation breaks are data, not errors.
    """
    T = _as_theta_array(thetas)
    if power.n_users != T.shape[0]:
        raise ShapeError("power allocation length does not match number of users")
    if rho <= 0:
        raise InvalidParam("rho must be positive")
    tr, cross = _traces(T)
    if np.any(tr <= 0):
        raise InvalidParam("every covariance must have positive trace")
    p = power.p
    t = tr - ((cross / tr[None, :]).sum(axis=1) - np.diag(cross) / tr)
    positive = t > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = float(np.sum(p / t)) if np.all(positive) else np.nan
        gamma = p * rho / denom
    return DetEquivReport(gamma_bar=gamma, precoder="zf", t=t, t_positive=positive)


# ---------------------------------------------------------------------------
# Gram-diagonal approximation error


@dataclass(frozen=True)
class DiagApproxEntry:
    """Exact vs diagonal-approximated interference energy for one user."""

    user: int
    exact: float
    approx: float
    epsilon: float


@dataclass(frozen=True)
class DiagApproxReport:
    M: int
    K: int
    exact: np.ndarray
    approx: np.ndarray
    epsilon: np.ndarray


def _diag_entry_from_gram(A: np.ndarray, i: int) -> tuple[float, float, float]:
    # w = Hbar_i^H h_i, G = Hbar_i^H Hbar_i read out of the full Gram matrix.
    idx = [j for j in range(A.shape[0]) if j != i]
    w = A[idx, i]
    G = A[np.ix_(idx, idx)]
    exact = float((w.conj() @ np.linalg.solve(G, w)).real)
    approx = float(np.sum(np.abs(w) ** 2 / np.diag(G).real))
    return exact, approx, abs(exact - approx)


def diagonal_approx_error(H: np.ndarray, i: int) -> DiagApproxEntry:
    """epsilon_i = |h_i^H Hbar (Hbar^H Hbar)^{-1} Hbar^H h_i
                    - h_i^H Hbar diag(Hbar^H Hbar)^{-1} Hbar^H h_i|
    where Hbar collects every column of H except i."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ShapeError("channel matrix must be 2-D")
    M, K = H.shape
    if K < 2:
        raise InvalidParam("need at least two users to form the interference term")
    if not (0 <= i < K):
        raise InvalidParam(f"user index {i} out of range for K={K}")
    Hbar = np.delete(H, i, axis=1)
    s = np.linalg.svd(Hbar, compute_uv=False)
    if s[0] <= 0.0 or s[-1] <= RANK_RTOL * s[0]:
        raise SingularChannel("interfering channels are rank deficient")
    A = H.conj().T @ H
    exact, approx, eps = _diag_entry_from_gram(A, i)
    return DiagApproxEntry(user=i, exact=exact, approx=approx, epsilon=eps)


def diagonal_approx_report(H: np.ndarray) -> DiagApproxReport:
    """diagonal_approx_error for every user, sharing one Gram computation."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[1] < 2:
        raise ShapeError("need an M x K channel with K >= 2")
    M, K = H.shape
    s = np.linalg.svd(H, compute_uv=False)
    # Removing a column cannot shrink the singular-value ratio below this,
    # so a full-rank H certifies every leave-one-out submatrix at once.
    full_rank = s[0] > 0.0 and s[-1] > RANK_RTOL * s[0]
    A = H.conj().T @ H
    exact = np.empty(K)
    approx = np.empty(K)
    for i in range(K):
        if not full_rank:
            Hbar = np.delete(H, i, axis=1)
            sb = np.linalg.svd(Hbar, compute_uv=False)
            if sb[0] <= 0.0 or sb[-1] <= RANK_RTOL * sb[0]:
                raise SingularChannel(f"interfering channels of user {i} are rank deficient")
        exact[i], approx[i], _ = _diag_entry_from_gram(A, i)
    eps = np.abs(exact - approx)
    return DiagApproxReport(M=M, K=K, exact=exact, approx=approx, epsilon=eps)


@dataclass(frozen=True)
class EpsilonStudy:
    """Mean approximation error per array size and the fitted log-log slope."""

    K: int
    M_grid: tuple
    mean_epsilon: np.ndarray
    trials: int
    slope: float
    master_seed: int


def epsilon_scaling_study(K: int, M_grid: Sequence[int], trials: int,
                          master_seed: int = 0) -> EpsilonStudy:
    """Fit how the mean Gram-diagonal error decays with M on i.i.d. channels.

    Draws `trials` i.i.d. CN(0, I) channel matrices per grid point (seeded
    substreams, so the study is reproducible), averages epsilon over users
    and trials, and fits a line to log(mean) vs log(M).  The grid must span
    at least three octaves and keep M >= 4K so the interference term is well
    conditioned at every point.
    """
    Ms = sorted(int(m) for m in M_grid)
    if len(Ms) < 2 or len(set(Ms)) != len(Ms):
        raise InvalidParam("M grid must contain at least two distinct sizes")
    if Ms[-1] < 8 * Ms[0]:
        raise InvalidParam("M grid must span at least three octaves (max >= 8*min)")
    if K < 2:
        raise InvalidParam("need K >= 2")
    if Ms[0] < 4 * K:
        raise InvalidParam(f"need M >= 4K at every grid point, got min M={Ms[0]} for K={K}")
    if trials < 1:
        raise InvalidParam("trials must be >= 1")
    means = np.empty(len(Ms))
    for mi, M in enumerate(Ms):
        acc = 0.0
        for t in range(trials):
            H = np.empty((M, K), dtype=complex)
            for k in range(K):
                # Identity covariance: h = sqrt(M) z is already CN(0, I).
                z = _complex_unit_noise(RngStream(master_seed, t, k).generator(), M)
                H[:, k] = np.sqrt(M) * z
            acc += float(diagonal_approx_report(H).epsilon.mean())
        means[mi] = acc / trials
    slope = float(np.polyfit(np.log(Ms), np.log(means), 1)[0])
    return EpsilonStudy(K=K, M_grid=tuple(Ms), mean_epsilon=means, trials=trials,
                        slope=slope, master_seed=master_seed)


# ---------------------------------------------------------------------------
# Nonnegativity of the ZF denominators


@dataclass(frozen=True)
class NonnegativityCertificate:
    """Margins t_i plus a spectral sufficient condition for t_i >= 0."""

    t: np.ndarray
    holds: bool                  # all t_i >= 0 (direct evaluation)
    sufficient: np.ndarray       # per-user: M >= (K-1) * lambda_max(Theta_i)
    sufficient_holds: bool


def nonnegativity_certificate(thetas) -> NonnegativityCertificate:
    """Evaluate the ZF denominators t_i directly and via the sufficient
    condition M >= (K-1) * lambda_max(Theta_i).

    The sufficient condition only certifies trace-M normalized covariances
    (tr(Theta_j) = M for all j); it is reported for whatever is passed in,
    but `holds` always reflects the direct evaluation.
    """
    T = _as_theta_array(thetas)
    K, M = T.shape[0], T.shape[1]
    tr, cross = _traces(T)
    if np.any(tr <= 0):
        raise InvalidParam("every covariance must have positive trace")
    t = tr - ((cross / tr[None, :]).sum(axis=1) - np.diag(cross) / tr)
    lmax = np.array([float(np.linalg.eigvalsh(T[i])[-1]) for i in range(K)])
    sufficient = M >= (K - 1) * lmax
    return NonnegativityCertificate(
        t=t,
        holds=bool(np.all(t >= 0)),
        sufficient=sufficient,
        sufficient_holds=bool(np.all(sufficient)),
    )
