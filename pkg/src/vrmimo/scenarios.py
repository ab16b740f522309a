"""Canonical visibility-region placements and their closed-form SINRs.

Three structured placements on an M-antenna array with K users sharing a
common region size D, plus a randomized one:

* worst overlap   -- every user sees the same first D antennas;
* best tiling     -- user k occupies the D-block starting at (k*D) mod M,
                     which requires D | M and M | K*D and gives every user
                     exactly K*D/M - 1 fully overlapping interferers;
* stationary      -- D = M, all antennas visible to everyone;
* random blocks   -- contiguous blocks with seeded uniform starts, wrapping
                     around the array edge.

For the structured placements with identity correlation and uniform power
allocation, the deterministic equivalents collapse to closed forms in
(M, K, D, rho) only; `closed_form_sinr` evaluates them.  The zero-forcing
worst-overlap expressions go nonpositive once the regions overlap too much,
which is reported through a feasibility flag rather than an exception.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParam, InvalidScenario
from .model import (CorrelationProfile, Normalization, NonStationaryCovariance,
                    VisibilityRegion, build_mask, build_theta, identity_correlation)
from .sampling import PLACEMENT_STREAM, RngStream


class Placement(Enum):
    STATIONARY = "stationary"
    WORST_OVERLAP = "worst"
    BEST_TILING = "best"
    RANDOM_BLOCKS = "random"

    @classmethod
    def parse(cls, text: str) -> "Placement":
        for member in cls:
            if member.value == text:
                return member
        raise InvalidParam(f"unknown placement {text!r}; "
                           f"expected one of {[m.value for m in cls]}")


def _check_dims(M: int, K: int, D: int):
    if K < 1 or M < K:
        raise InvalidScenario(f"need M >= K >= 1, got M={M}, K={K}")
    if not (1 <= D <= M):
        raise InvalidScenario(f"need 1 <= D <= M, got D={D}, M={M}")


def best_tiling_feasible(M: int, K: int, D: int) -> bool:
    """The tiling needs D | M (blocks align) and M | K*D (users close the cycle)."""
    return M % D == 0 and (K * D) % M == 0


@dataclass(frozen=True)
class ScenarioSpec:
    """One scenario cell: placement, mask normalization and dimensions."""

    placement: Placement
    normalization: Normalization
    M: int
    K: int
    D: int

    def __post_init__(self):
        _check_dims(self.M, self.K, self.D)
        if self.placement is Placement.STATIONARY and self.D != self.M:
            raise InvalidScenario("stationary scenario requires D = M")


def place_worst(M: int, K: int, D: int,
                normalization: Normalization = Normalization.TRACE_M) -> list:
    """All K users pinned to the same leading block {0, ..., D-1}."""
    _check_dims(M, K, D)
    block = tuple(range(D))
    return [VisibilityRegion(active=block, normalization=normalization)
            for _ in range(K)]


def place_best(M: int, K: int, D: int,
               normalization: Normalization = Normalization.TRACE_M) -> list:
    """Cyclic tiling: user k gets the D-block starting at (k*D) mod M."""
    _check_dims(M, K, D)
    if not best_tiling_feasible(M, K, D):
        raise InvalidScenario(
            f"tiling needs D | M and M | K*D; got M={M}, K={K}, D={D}")
    regions = []
    for k in range(K):
        start = (k * D) % M
        regions.append(VisibilityRegion(active=tuple(range(start, start + D)),
                                        normalization=normalization))
    return regions


def place_random(M: int, K: int, D: int, seed: int,
                 normalization: Normalization = Normalization.TRACE_M) -> list:
    """Contiguous D-blocks with seeded uniform starts; blocks wrap around."""
    _check_dims(M, K, D)
    regions = []
    for k in range(K):
        rng = RngStream(seed, trial=0, user=k, kind=PLACEMENT_STREAM).generator()
        start = int(rng.integers(0, M))
        idx = tuple(int(i) for i in (start + np.arange(D)) % M)
        regions.append(VisibilityRegion(active=idx, normalization=normalization))
    return regions


def place_stationary(M: int, K: int,
                     normalization: Normalization = Normalization.TRACE_M) -> list:
    """Full visibility for everyone (equivalent to either normalization)."""
    return [VisibilityRegion(active=tuple(range(M)), normalization=normalization)
            for _ in range(K)]


def scenario_regions(spec: ScenarioSpec, seed: int = 0) -> list:
    if spec.placement is Placement.STATIONARY:
        return place_stationary(spec.M, spec.K, spec.normalization)
    if spec.placement is Placement.WORST_OVERLAP:
        return place_worst(spec.M, spec.K, spec.D, spec.normalization)
    if spec.placement is Placement.BEST_TILING:
        return place_best(spec.M, spec.K, spec.D, spec.normalization)
    return place_random(spec.M, spec.K, spec.D, seed, spec.normalization)


def scenario_covariances(spec: ScenarioSpec, corr: CorrelationProfile | None = None,
                         seed: int = 0) -> list:
    """Covariances Theta_k for every user of a scenario (identity correlation
    by default; pass a profile to add antenna correlation on top of the VRs)."""
    if corr is None:
        corr = identity_correlation(spec.M)
    elif corr.M != spec.M:
        raise InvalidScenario(f"correlation profile is {corr.M}x{corr.M} for M={spec.M}")
    regions = scenario_regions(spec, seed=seed)
    return [build_theta(corr, build_mask(vr, spec.M)) for vr in regions]


@dataclass(frozen=True)
class ClosedFormValue:
    """Closed-form SINR (linear) with a feasibility flag.

    `feasible` is False when the expression is nonpositive -- the regime
    where the underlying approximation has collapsed (overlap too strong
    for zero-forcing)."""

    value: float
    feasible: bool


def closed_form_sinr(precoder: str, placement: Placement,
                     normalization: Normalization,
                     M: int, K: int, D: int, rho: float) -> ClosedFormValue:
    """Closed-form large-system SINR for the structured placements.

    Assumes identity correlation and the uniform power split p_k = P/K.
    Random placements have no closed form and raise InvalidScenario.
    """
    _check_dims(M, K, D)
    if rho <= 0:
        raise InvalidParam("rho must be positive")
    if precoder not in ("cb", "zf"):
        raise InvalidParam(f"unknown precoder {precoder!r}")
    if placement is Placement.RANDOM_BLOCKS:
        raise InvalidScenario("random placements have no closed-form SINR")
    if placement is Placement.BEST_TILING and not best_tiling_feasible(M, K, D):
        raise InvalidScenario(
            f"tiling needs D | M and M | K*D; got M={M}, K={K}, D={D}")

    if placement is Placement.STATIONARY:
        if precoder == "cb":
            value = rho * M / (rho * (K - 1) + K)
        else:
            value = rho * (M - K + 1) / K
    elif normalization is Normalization.TRACE_M:
        if placement is Placement.WORST_OVERLAP:
            if precoder == "cb":
                value = rho * M / (rho * (M / D) * (K - 1) + K)
            else:
                value = rho * (M - (M / D) * (K - 1)) / K
        else:  # best tiling
            if precoder == "cb":
                value = rho * M / (rho * (K - M / D) + K)
            else:
                value = rho * (M - K + M / D) / K
    else:  # TRACE_D
        if placement is Placement.WORST_OVERLAP:
            if precoder == "cb":
                value = rho * D / (rho * (K - 1) + K)
            else:
                value = rho * (D - K + 1) / K
        else:  # best tiling
            if precoder == "cb":
                value = rho * D / (rho * (K * D / M - 1) + K)
            else:
                value = rho * (D - K * D / M + 1) / K

    value = float(value)
    return ClosedFormValue(value=value, feasible=bool(np.isfinite(value) and value > 0))
