"""Estimation quality metrics: empirical and analytic NMSE, genie-aided
spectral efficiency, post-combining SNR samples, and ECDF utilities.

The analytic NMSE splits into a subspace floor (energy outside the projector
pair) and a noise term (noise passed by the projectors), evaluated from the
structural covariance of the vectorized pilot-grid channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import ChannelEstimate
from .subspaces import ProjectorPair


@dataclass(frozen=True)
class NmseBreakdown:
    """total = subspace_floor + noise_term, all normalized by trace(R)."""

    total: float
    subspace_floor: float
    noise_term: float


@dataclass(frozen=True)
class MetricsRecord:
    """One experiment result row (see the CSV schema in the harness)."""

    method: str
    snr_db: float
    n_pilots: int
    trials: int
    nmse_emp: float | None = None
    nmse_analytic: NmseBreakdown | None = None
    spectral_efficiency: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for v in (self.nmse_emp, self.spectral_efficiency):
            if v is not None and (not math.isfinite(v) or v < 0):
                raise ValueError("metrics must be finite and non-negative")


def _as_array(x) -> np.ndarray:
    return x.h if isinstance(x, ChannelEstimate) else np.asarray(x)


def empirical_nmse(pairs) -> float:
    """sum ||est - truth||_F^2 / sum ||truth||_F^2 over an ensemble of pairs."""
    num = 0.0
    den = 0.0
    count = 0
    for est, truth in pairs:
        e = _as_array(est)
        t = _as_array(truth)
        if e.shape != t.shape:
            raise ValueError("estimate/truth shapes disagree")
        num += float(np.sum(np.abs(e - t) ** 2))
        den += float(np.sum(np.abs(t) ** 2))
        count += 1
    if count == 0:
        raise ValueError("empirical_nmse needs at least one pair")
    if den <= 0:
        raise ValueError("ensemble truth energy is zero")
    return num / den


def analytic_nmse(projectors: ProjectorPair, covariance: np.ndarray, snr_db: float,
                  symbol_power: float, noise_variance: float) -> NmseBreakdown:
    """Closed-form NMSE of the projection estimator under a known covariance.

    The noise term is computed both from the projector traces and from the
    rank shortcut ranks/(n_rx * n_pilots * SNR); the two must agree to 1e-9,
    which guards the SNR bookkeeping end to end.
    """
    p_s = projectors.spatial
    p_t = projectors.temporal
    n_rx = p_s.shape[0]
    n_p = p_t.shape[0]
    cov = np.asarray(covariance)
    if cov.shape != (n_rx * n_p, n_rx * n_p):
        raise ValueError("covariance dimension does not match the projectors")
    if noise_variance < 0 or symbol_power <= 0:
        raise ValueError("need symbol_power > 0 and noise_variance >= 0")

    tr_r = float(np.trace(cov).real)
    if tr_r <= 0:
        raise ValueError("covariance trace must be positive")
    # trace(R Q) with Q = P_t^T kron P_s and pilot-major vec stacking
    r4 = cov.reshape(n_p, n_rx, n_p, n_rx)
    tr_rq = float(np.einsum("aibj,ab,ji->", r4, p_t, p_s).real)
    floor = max((tr_r - tr_rq) / tr_r, 0.0)

    tr_qqh = float((np.trace(p_t @ p_t.conj().T) * np.trace(p_s @ p_s.conj().T)).real)
    noise_trace_form = noise_variance * tr_qqh / (symbol_power * tr_r)
    snr = 10.0 ** (snr_db / 10.0)
    noise_simplified = (projectors.rank_spatial * projectors.rank_temporal
                        / (n_rx * n_p * snr))
    if not np.isclose(noise_trace_form, noise_simplified, rtol=1e-9, atol=1e-9):
        raise ValueError(
            f"noise-term forms disagree: trace {noise_trace_form:.12e} vs "
            f"simplified {noise_simplified:.12e}; snr_db/noise_variance inconsistent?")
    return NmseBreakdown(total=floor + noise_trace_form, subspace_floor=floor,
                         noise_term=noise_trace_form)


def _post_combining_snr(est_h: np.ndarray, truth_h: np.ndarray, symbol_power: float,
                        noise_variance: float) -> np.ndarray:
    """Per-subcarrier SNR after matched combining on the estimate.

    The combiner is the normalized conjugate of the estimated per-subcarrier
    channel; the decision-stage channel knowledge is exact.  Zero estimates
    yield zero SNR.
    """
    if noise_variance <= 0 or symbol_power <= 0:
        raise ValueError("need symbol_power > 0 and noise_variance > 0")
    if est_h.shape != truth_h.shape:
        raise ValueError("estimate/truth shapes disagree")
    num = np.abs(np.einsum("...ik,...ik->...k", est_h.conj(), truth_h)) ** 2
    den = np.sum(np.abs(est_h) ** 2, axis=-2)
    gain = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return symbol_power * gain / noise_variance


def post_combining_snr_samples(estimate, truth, symbol_power: float,
                               noise_variance: float) -> np.ndarray:
    """Flattened per-subcarrier post-combining SNRs over a batch."""
    return _post_combining_snr(_as_array(estimate), _as_array(truth), symbol_power,
                               noise_variance).ravel()


def genie_spectral_efficiency(estimate, truth, symbol_power: float,
                              noise_variance: float) -> float:
    """Mean over subcarriers (and any batch axis) of log2(1 + post-combining SNR)."""
    snr = _post_combining_snr(_as_array(estimate), _as_array(truth), symbol_power,
                              noise_variance)
    return float(np.mean(np.log2(1.0 + snr)))


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Right-continuous empirical CDF over a sample set."""

    thresholds: np.ndarray   # sorted samples
    fractions: np.ndarray    # cumulative fractions, ending at 1

    def evaluate(self, q: float) -> float:
        """P(X <= q)."""
        return float(np.searchsorted(self.thresholds, q, side="right")
                     / self.thresholds.size)

    def quantile(self, p: float) -> float:
        """Smallest threshold x with F(x) >= p."""
        if not 0 < p <= 1:
            raise ValueError("p must lie in (0, 1]")
        k = max(int(np.ceil(p * self.thresholds.size)) - 1, 0)
        return float(self.thresholds[k])


def ecdf(samples) -> Ecdf:
    arr = np.sort(np.asarray(samples, dtype=float).ravel())
    if arr.size == 0:
        raise ValueError("ecdf needs at least one sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("ecdf samples must be finite")
    return Ecdf(thresholds=arr, fractions=np.arange(1, arr.size + 1) / arr.size)
