"""Core channel-statistics model.

A user's channel covariance is assembled from two ingredients: a stationary
spatial correlation profile R (trace M, unit diagonal for the built-in
generators) and a diagonal visibility-region mask D that switches antennas
on or off.  The non-stationary covariance is

    Theta = D^{1/2} R D^{1/2}

so entries of Theta vanish on every row/column outside the visibility
region.  Two mask scalings are supported: `TRACE_M` boosts the active
entries by M/|VR| so that trace(Theta) = M regardless of the region size
(the channel carries the same total energy as a stationary one), while
`TRACE_D` leaves the active entries at one so that trace(Theta) = |VR|
(energy shrinks with the visible aperture).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidParam, InvalidVR, NotPSD, ShapeError

# Tolerances used when validating / factoring Hermitian matrices.
HERMITIAN_ATOL = 1e-10    # max |A - A^H| accepted by hermitian_sqrt
EIG_CLAMP_REL = 1e-12     # eigenvalues below this (relative to the largest) are zeroed
EIG_REJECT_REL = 1e-8     # eigenvalues below -this (relative) raise NotPSD


class Normalization(Enum):
    """How the visibility-region mask scales the channel energy.

    TRACE_M: active diagonal entries are M/|VR|, so trace(Theta) = M.
    TRACE_D: active diagonal entries are 1, so trace(Theta) = |VR|.
    """

    TRACE_M = "trace-m"
    TRACE_D = "trace-d"

    @classmethod
    def parse(cls, text: str) -> "Normalization":
        for member in cls:
            if member.value == text:
                return member
        raise InvalidParam(f"unknown normalization {text!r}; "
                           f"expected one of {[m.value for m in cls]}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user transmit signal powers p_k >= 0 (linear scale)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ShapeError("power allocation must be a nonempty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise InvalidParam("signal powers must be finite")
        if np.any(p < 0):
            raise InvalidParam("signal powers must be nonnegative")
        object.__setattr__(self, "p", _readonly(p))

    @classmethod
    def equal(cls, total_power: float, n_users: int) -> "PowerAllocation":
        """Uniform split p_k = P/K."""
        if n_users < 1:
            raise InvalidParam("need at least one user")
        if total_power <= 0:
            raise InvalidParam("total power must be positive")
        return cls(np.full(n_users, total_power / n_users))

    @property
    def n_users(self) -> int:
        return int(self.p.size)

    @property
    def total(self) -> float:
        return float(self.p.sum())


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, power budget and trial bookkeeping of one downlink setup."""

    M: int                      # BS antennas
    K: int                      # single-antenna users
    total_power: float          # P (linear)
    noise_power: float          # sigma^2 (linear)
    power_alloc: PowerAllocation
    trials: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.M < self.K:
            raise InvalidParam(f"need M >= K >= 1, got M={self.M}, K={self.K}")
        if self.total_power <= 0:
            raise InvalidParam("total power must be positive")
        if self.noise_power <= 0:
            raise InvalidParam("noise power must be positive")
        if self.trials < 1:
            raise InvalidParam("trials must be >= 1")
        if self.power_alloc.n_users != self.K:
            raise ShapeError(f"power allocation has {self.power_alloc.n_users} "
                             f"entries but K={self.K}")

    @property
    def rho(self) -> float:
        """Transmit SNR rho = P / sigma^2."""
        return self.total_power / self.noise_power

    @classmethod
    def from_snr_db(cls, M: int, K: int, snr_db: float, *, total_power: float = 1.0,
                    trials: int = 1, master_seed: int = 0,
                    power_alloc: PowerAllocation | None = None) -> "SystemConfig":
        """Build a config with sigma^2 chosen so that P/sigma^2 hits `snr_db`."""
        noise_power = total_power / 10.0 ** (snr_db / 10.0)
        alloc = power_alloc if power_alloc is not None else PowerAllocation.equal(total_power, K)
        return cls(M=M, K=K, total_power=total_power, noise_power=noise_power,
                   power_alloc=alloc, trials=trials, master_seed=master_seed)


@dataclass(frozen=True)
class CorrelationProfile:
    """Stationary spatial correlation matrix of one user (Hermitian PSD).

    Construct directly for a custom matrix (validated), or through
    `identity_correlation` / `exponential_correlation`.
    """

    R: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        R = np.asarray(self.R, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ShapeError("correlation matrix must be square")
        if np.max(np.abs(R - R.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(R))):
            raise NotPSD("correlation matrix is not Hermitian")
        if self.kind == "custom":
            # Built-in generators are PSD by construction; only user-supplied
            # matrices pay for the eigenvalue check.
            w = np.linalg.eigvalsh(R)
            lmax = max(float(w[-1]), 0.0)
            if float(w[0]) < -1e-10 * max(lmax, np.finfo(float).tiny):
                raise NotPSD(f"correlation matrix has eigenvalue {w[0]:.3e}")
        object.__setattr__(self, "R", _readonly(R))

    @property
    def M(self) -> int:
        return int(self.R.shape[0])


def identity_correlation(M: int) -> CorrelationProfile:
    """Uncorrelated antennas: R = I_M."""
    if M < 1:
        raise InvalidParam("need M >= 1")
    return CorrelationProfile(R=np.eye(M, dtype=complex), kind="identity")


def exponential_correlation(M: int, r: float) -> CorrelationProfile:
    """Exponential (Kac-Murdock-Szego) profile R_{mn} = r^{|m-n|}, 0 <= r < 1.

    Toeplitz, unit diagonal, PSD for all r in [0, 1).
    """
    if M < 1:
        raise InvalidParam("need M >= 1")
    if not (0.0 <= r < 1.0):
        raise InvalidParam(f"exponential coefficient must satisfy 0 <= r < 1, got {r}")
    R = scipy.linalg.toeplitz(r ** np.arange(M)).astype(complex)
    return CorrelationProfile(R=R, kind=f"exponential({r:g})")


@dataclass(frozen=True)
class VisibilityRegion:
    """Set of antenna indices (0-based) visible to one user.

    Indices must be distinct and nonnegative; the upper range check against
    the array size happens in `build_mask`, which is where M is known.
    """

    active: tuple
    normalization: Normalization

    def __post_init__(self):
        idx = [int(a) for a in self.active]
        if len(idx) == 0:
            raise InvalidVR("visibility region is empty")
        if len(set(idx)) != len(idx):
            raise InvalidVR("visibility region has repeated indices")
        if min(idx) < 0:
            raise InvalidVR("antenna indices must be nonnegative")
        if not isinstance(self.normalization, Normalization):
            raise InvalidParam("normalization must be a Normalization member")
        object.__setattr__(self, "active", tuple(sorted(idx)))

    @property
    def size(self) -> int:
        return len(self.active)


@dataclass(frozen=True)
class MaskMatrix:
    """Diagonal of the visibility mask D (length M, zero outside the region)."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ShapeError("mask diagonal must be a nonempty 1-D vector")
        if np.any(d < 0):
            raise InvalidParam("mask entries must be nonnegative")
        object.__setattr__(self, "d", _readonly(d))

    @property
    def M(self) -> int:
        return int(self.d.size)

    @property
    def active(self) -> np.ndarray:
        """Indices of antennas inside the region."""
        return np.flatnonzero(self.d > 0)

    @property
    def vr_size(self) -> int:
        return int(np.count_nonzero(self.d))

    @property
    def sqrt_diag(self) -> np.ndarray:
        return np.sqrt(self.d)


def build_mask(vr: VisibilityRegion, M: int) -> MaskMatrix:
    """Materialize the diagonal mask for a visibility region on an M-antenna array.

    TRACE_M puts M/|VR| on the active entries (trace M); TRACE_D puts 1
    (trace |VR|).
    """
    if M < 1:
        raise InvalidParam("need M >= 1")
    active = np.asarray(vr.active, dtype=int)
    if active.size == 0:
        raise InvalidVR("visibility region is empty")
    if active.max() >= M:
        raise InvalidVR(f"antenna index {active.max()} out of range for M={M}")
    d = np.zeros(M)
    if vr.normalization is Normalization.TRACE_M:
        d[active] = M / active.size
    else:
        d[active] = 1.0
    return MaskMatrix(d=d)


@dataclass(frozen=True)
class NonStationaryCovariance:
    """Per-user covariance Theta = D^{1/2} R D^{1/2} with its ingredients."""

    theta: np.ndarray
    mask: MaskMatrix
    corr: CorrelationProfile

    def __post_init__(self):
        object.__setattr__(self, "theta", _readonly(np.asarray(self.theta, dtype=complex)))

    @property
    def M(self) -> int:
        return int(self.theta.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.theta).real)

    @cached_property
    def sqrt(self) -> np.ndarray:
        """Hermitian square root Theta^{1/2}, computed once and cached."""
        return hermitian_sqrt(self.theta)


def build_theta(corr: CorrelationProfile, mask: MaskMatrix) -> NonStationaryCovariance:
    """Assemble Theta = D^{1/2} R D^{1/2} from a profile and a mask."""
    if corr.M != mask.M:
        raise ShapeError(f"correlation is {corr.M}x{corr.M} but mask has length {mask.M}")
    s = mask.sqrt_diag
    theta = s[:, None] * corr.R * s[None, :]
    return NonStationaryCovariance(theta=theta, mask=mask, corr=corr)


def hermitian_sqrt(A: np.ndarray) -> np.ndarray:
    """Hermitian square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues below EIG_CLAMP_REL * lambda_max are clamped to zero before
    the root; an eigenvalue below -EIG_REJECT_REL * lambda_max raises NotPSD.
    The returned factor is re-symmetrized so S = S^H holds exactly.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError("hermitian_sqrt expects a square matrix")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale > 0 and float(np.max(np.abs(A - A.conj().T))) > HERMITIAN_ATOL * max(1.0, scale):
        raise NotPSD("matrix is not Hermitian")
    w, U = np.linalg.eigh(A)
    lmax = max(float(w[-1]), 0.0)
    if float(w[0]) < -EIG_REJECT_REL * max(lmax, np.finfo(float).tiny):
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e} below the PSD tolerance")
    w = np.where(w < EIG_CLAMP_REL * lmax, 0.0, w)
    S = (U * np.sqrt(w)) @ U.conj().T
    return (S + S.conj().T) / 2.0


@dataclass(frozen=True)
class AssumptionReport:
    """Summary of the large-system regularity quantities for a set of users."""

    max_spectral_norm: float      # max_k ||Theta_k||_2
    max_power_times_k: float      # max_k p_k * K  (uniform allocation gives P)
    min_vr_size: int
    n_users: int


def assumption_report(thetas: Sequence[NonStationaryCovariance],
                      power: PowerAllocation) -> AssumptionReport:
    """Report the quantities that must stay bounded for the large-system
    approximations to be meaningful: spectral norms of the covariances,
    the scaled per-user powers, and the smallest visibility region."""
    thetas = list(thetas)
    if not thetas:
        raise InvalidParam("need at least one covariance")
    if power.n_users != len(thetas):
        raise ShapeError("power allocation length does not match number of users")
    norms = [float(np.linalg.eigvalsh(t.theta)[-1]) for t in thetas]
    return AssumptionReport(
        max_spectral_norm=max(norms),
        max_power_times_k=float(np.max(power.p) * power.n_users),
        min_vr_size=min(t.mask.vr_size for t in thetas),
        n_users=len(thetas),
    )
