"""
Per-user SINRs, exact two-phase mutual information and its lower bound.

User k observes the direct-phase sample and the relayed sample,
``y[k] = A s_k + B s_{-k} + N``, with 2x1 desired gains A, 2x(K-1)
interference gains B and diagonal noise covariance E[N N^H]. All rates are
in bits per channel use and carry the 1/2 half-duplex factor.
"""

from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .channel import ChannelSet
from .errors import DomainError, NonFiniteError
from .schemes import SchemeDesign

__all__ = [
    'PerUserBlocks', 'RateReport', 'user_blocks', 'all_user_blocks',
    'exact_user_rate', 'sinr_pair', 'lower_bound_user_rate', 'network_rates',
]


@dataclass(frozen=True, eq=False)
class PerUserBlocks:
    a: np.ndarray      # 2 x 1
    b: np.ndarray      # 2 x (K-1)
    n_cov: np.ndarray  # 2 x 2, diagonal


@dataclass(frozen=True, eq=False)
class RateReport:
    sinr1: np.ndarray
    sinr2: np.ndarray
    rate_exact: np.ndarray
    rate_lower: np.ndarray

    @property
    def sum_exact(self) -> float:
        return float(np.sum(self.rate_exact))

    @property
    def sum_lower(self) -> float:
        return float(np.sum(self.rate_lower))


def _effective_gains(ch: ChannelSet, d: SchemeDesign):
    direct = d.rho_s * (ch.h1 @ d.p)
    relayed = (d.rho_r * d.rho_s) * (ch.h2 @ d.f_t)
    # ||h2k F||^2 per user: relay noise forwarded to user k
    fwd_noise = np.sum(np.abs(ch.h2 @ d.f) ** 2, axis=1)
    return direct, relayed, fwd_noise


def _blocks_from_gains(direct, relayed, fwd_noise, rho_r, noise_var, k) -> PerUserBlocks:
    others = [j for j in range(direct.shape[1]) if j != k]
    a = np.array([[direct[k, k]], [relayed[k, k]]], dtype=np.complex128)
    b = np.vstack([direct[k, others], relayed[k, others]]).astype(np.complex128)
    n_cov = np.diag([noise_var, noise_var * rho_r ** 2 * fwd_noise[k] + noise_var]).astype(np.complex128)
    return PerUserBlocks(a=a, b=b.reshape(2, len(others)), n_cov=n_cov)


def user_blocks(ch: ChannelSet, d: SchemeDesign, k: int) -> PerUserBlocks:
    """Signal, interference and noise blocks seen by user `k` (0-based)."""
    if not 0 <= k < ch.k:
        raise IndexError(f"user index {k} out of range for K={ch.k}")
    direct, relayed, fwd_noise = _effective_gains(ch, d)
    return _blocks_from_gains(direct, relayed, fwd_noise, d.rho_r, ch.noise_var, k)


def all_user_blocks(ch: ChannelSet, d: SchemeDesign):
    direct, relayed, fwd_noise = _effective_gains(ch, d)
    return [_blocks_from_gains(direct, relayed, fwd_noise, d.rho_r, ch.noise_var, k)
            for k in range(ch.k)]


def exact_user_rate(blocks: PerUserBlocks) -> float:
    """
    ``0.5 * log2 det(I + A A^H (B B^H + E[N N^H])^{-1})``.

    The matrix ``M = A A^H C^{-1}`` is formed with a linear solve
    (``M^H = C^{-1} A A^H`` for Hermitian C) and the 2x2 determinant of
    ``I + M`` is taken in closed form.
    """
    a, b = blocks.a, blocks.b
    aa = a @ a.conj().T
    c = b @ b.conj().T + blocks.n_cov
    m = mk.adjoint(mk.solve(c, aa))
    det = (1.0 + m[0, 0]) * (1.0 + m[1, 1]) - m[0, 1] * m[1, 0]
    if not np.isfinite(det):
        raise NonFiniteError(f"non-finite determinant {det}")
    if not det.real > 0:
        raise DomainError(f"determinant {det} is not positive")
    return 0.5 * float(np.log2(det.real))


def sinr_pair(blocks: PerUserBlocks):
    """Per-phase SINRs treating the other phase's interference as independent."""
    a = np.abs(blocks.a[:, 0]) ** 2
    interference = np.sum(np.abs(blocks.b) ** 2, axis=1)
    noise = blocks.n_cov.diagonal().real
    sinr = a / (interference + noise)
    return float(sinr[0]), float(sinr[1])


def lower_bound_user_rate(sinr1: float, sinr2: float) -> float:
    return 0.5 * float(np.log2(1.0 + sinr1 + sinr2))


def network_rates(ch: ChannelSet, d: SchemeDesign) -> RateReport:
    """Per-user and summed rates; the direct phase counts for every scheme."""
    blocks = all_user_blocks(ch, d)
    sinrs = np.array([sinr_pair(bl) for bl in blocks], dtype=float).reshape(-1, 2)
    exact = np.array([exact_user_rate(bl) for bl in blocks], dtype=float)
    lower = np.array([lower_bound_user_rate(s1, s2) for s1, s2 in sinrs], dtype=float)
    return RateReport(sinr1=sinrs[:, 0], sinr2=sinrs[:, 1], rate_exact=exact, rate_lower=lower)
