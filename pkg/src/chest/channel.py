"""Channel synthesis: fading draws, space-frequency channel matrices, the
structural pilot-grid covariance, and the received pilot block.

Channel matrices are plain complex ndarrays of shape (..., n_rx, n_sc); a
leading batch axis holds independent symbols/trials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PilotPattern
from .propagation import ArrayGeometry, PathSet, frequency_response, steering_matrix
from .streams import complex_normal


@dataclass(frozen=True, eq=False)
class RxBlock:
    """Received pilot-subcarrier block together with the pilots that produced it."""

    y: np.ndarray            # (..., n_rx, n_pilots)
    pilots: PilotPattern

    def __post_init__(self):
        if self.y.shape[-1] != len(self.pilots):
            raise ValueError("RxBlock width must match the pilot count")


def draw_fading(amplitude: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Per-path complex gains c_l = alpha_l (g1 + j g2)/sqrt(2), fresh per symbol.

    Zero mean, E|c_l|^2 = alpha_l^2, uncorrelated across paths.
    """
    amplitude = np.asarray(amplitude, dtype=float)
    return amplitude * complex_normal(rng, amplitude.shape)


def assemble_channel(steering: np.ndarray, fading: np.ndarray,
                     freq: np.ndarray) -> np.ndarray:
    """H = A diag(c) K^T for one symbol, or a batch if ``fading`` is (..., L).

    ``steering`` is (n_rx, L), ``freq`` is (n_sc, L); the result is
    (..., n_rx, n_sc).
    """
    steering = np.asarray(steering)
    fading = np.asarray(fading)
    freq = np.asarray(freq)
    if steering.shape[1] != fading.shape[-1] or freq.shape[1] != fading.shape[-1]:
        raise ValueError("steering/fading/freq path counts disagree")
    return np.einsum("il,...l,kl->...ik", steering, fading, freq)


def channel_covariance(paths: PathSet, geometry: ArrayGeometry, n_subcarriers: int,
                       sample_interval: float, rolloff: float,
                       pilot_indices: np.ndarray) -> np.ndarray:
    """Covariance of the vectorized pilot-grid channel.

    With vec stacking columns (pilot-major), R = Phi diag(alpha^2) Phi^H where
    column l of Phi is kron(k_l, a_l).
    """
    a = steering_matrix(paths, geometry)                                  # (n_rx, L)
    k = frequency_response(paths, n_subcarriers, sample_interval, rolloff,
                           pilot_indices)                                 # (n_p, L)
    phi = (k[:, None, :] * a[None, :, :]).reshape(-1, len(paths))
    return (phi * (paths.amplitude ** 2)[None, :]) @ phi.conj().T


def apply_uplink(h_pilot: np.ndarray, pilots: PilotPattern, noise_variance: float,
                 unit_noise: np.ndarray) -> RxBlock:
    """Y = H diag(x) + W with W = sqrt(noise_variance) * unit_noise."""
    if noise_variance < 0:
        raise ValueError("noise_variance must be non-negative")
    y = h_pilot * pilots.symbols + np.sqrt(noise_variance) * unit_noise
    return RxBlock(y=y, pilots=pilots)


def simulate_uplink(h_pilot: np.ndarray, pilots: PilotPattern, noise_variance: float,
                    rng: np.random.Generator) -> RxBlock:
    """Received pilot block for one symbol (or a batch sharing one stream)."""
    if h_pilot.shape[-1] != len(pilots):
        raise ValueError("channel width must match the pilot count")
    return apply_uplink(h_pilot, pilots, noise_variance,
                        complex_normal(rng, h_pilot.shape))


def average_channel_gain(covariance: np.ndarray) -> float:
    """beta = trace(R) / dim(R): per-entry average channel power."""
    cov = np.asarray(covariance)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    beta = float(np.trace(cov).real) / cov.shape[0]
    if beta <= 0:
        raise ValueError("covariance trace must be positive")
    return beta


def average_gain_from_responses(amplitude: np.ndarray, freq_pilot: np.ndarray) -> float:
    """Same beta as :func:`average_channel_gain`, without forming R.

    trace(R) = sum_l alpha_l^2 ||k_l||^2 ||a_l||^2 and steering entries are
    unit modulus, so beta = sum_l alpha_l^2 ||k_l||^2 / n_pilots.
    """
    amplitude = np.asarray(amplitude, dtype=float)
    energy = np.sum(np.abs(freq_pilot) ** 2, axis=0)
    beta = float(np.sum(amplitude ** 2 * energy)) / freq_pilot.shape[0]
    if beta <= 0:
        raise ValueError("channel gain must be positive")
    return beta
