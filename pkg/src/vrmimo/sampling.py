"""Seeded channel realizations.

Every random draw is addressed by (master_seed, kind, trial, user) through
`numpy.random.SeedSequence` spawn keys, so a given address always yields the
same bits no matter in which order draws happen or how trials are spread
over workers.  Channel, symbol and noise draws live on disjoint `kind`
lanes so that adding one consumer never shifts another.

The channel itself is h = sqrt(M) * Theta^{1/2} z with z ~ CN(0, I_M / M):
real and imaginary parts of z are i.i.d. Normal(0, 1/(2M)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .model import NonStationaryCovariance, SystemConfig

# Substream kinds.
CHANNEL_STREAM = 0
SYMBOL_STREAM = 1
NOISE_STREAM = 2
PLACEMENT_STREAM = 3


@dataclass(frozen=True)
class RngStream:
    """Deterministic substream addressed by (master_seed, kind, trial, user)."""

    master_seed: int
    trial: int
    user: int
    kind: int = CHANNEL_STREAM

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed,
                                      spawn_key=(self.kind, self.trial, self.user))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence())

    @property
    def stream_id(self) -> int:
        """64-bit label, a pure function of the address (handy for logs)."""
        return int(self.seed_sequence().generate_state(1, np.uint64)[0])


def _complex_unit_noise(rng: np.random.Generator, M: int) -> np.ndarray:
    # One standard_normal call of length 2M split into real/imag keeps the
    # draw layout fixed even if numpy changes how complex normals are filled.
    x = rng.standard_normal(2 * M)
    return (x[:M] + 1j * x[M:]) / np.sqrt(2.0 * M)


def draw_user_channel(theta_sqrt: np.ndarray, stream: RngStream) -> np.ndarray:
    """One channel vector h = sqrt(M) * Theta^{1/2} z for the given substream."""
    theta_sqrt = np.asarray(theta_sqrt)
    if theta_sqrt.ndim != 2 or theta_sqrt.shape[0] != theta_sqrt.shape[1]:
        raise ShapeError("theta_sqrt must be a square matrix")
    M = theta_sqrt.shape[0]
    z = _complex_unit_noise(stream.generator(), M)
    return np.sqrt(M) * (theta_sqrt @ z)


@dataclass(frozen=True)
class ChannelRealization:
    """One trial's channel matrix; user k sits in column k of H (M x K)."""

    H: np.ndarray
    config: SystemConfig
    trial: int


def draw_channel_matrix(config: SystemConfig,
                        thetas: Sequence[NonStationaryCovariance],
                        trial: int) -> ChannelRealization:
    """Draw all K users for one trial, one substream per user."""
    thetas = list(thetas)
    if len(thetas) != config.K:
        raise ShapeError(f"got {len(thetas)} covariances for K={config.K} users")
    H = np.empty((config.M, config.K), dtype=complex)
    for k, th in enumerate(thetas):
        if th.M != config.M:
            raise ShapeError(f"covariance of user {k} is {th.M}x{th.M}, expected M={config.M}")
        H[:, k] = draw_user_channel(th.sqrt, RngStream(config.master_seed, trial, k))
    return ChannelRealization(H=H, config=config, trial=trial)


def draw_noise_block(master_seed: int, trials: int, K: int, M: int) -> np.ndarray:
    """(trials, K, M) block of CN(0, I/M) vectors, one substream per (trial, user).

    Entry [t, k] is bit-identical to what `draw_user_channel` consumes for the
    same address, which lets sweep engines draw the randomness once and reuse
    it across every scenario cell (common random numbers).
    """
    Z = np.empty((trials, K, M), dtype=complex)
    for t in range(trials):
        for k in range(K):
            Z[t, k] = _complex_unit_noise(RngStream(master_seed, t, k).generator(), M)
    return Z
