"""
Precoder / relay beamformer designs for one channel realization.

Every builder returns a :class:`SchemeDesign` in canonical form: unscaled
``p`` and ``f`` plus explicit power factors ``rho_s`` and ``rho_r``, so the
transmitted signals are ``rho_s * P s`` at the BS and
``rho_r * F (rho_s G P s + n_r)`` at the RS. Baselines whose textbook form
folds a scalar into P or F are converted to this form.

``f_t`` holds the relay-path transmit columns used by the rate formulas,
i.e. the matrix T with ``H2 F G P == H2 T``. For the proposed scheme this is
the RZF transmit filter itself (the ZF receive filter cancels ``G P``); for
the other schemes it is ``F G P`` evaluated directly.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matkernel as mk
from .channel import ChannelSet
from .errors import DegenerateDrawError, SingularMatrixError

__all__ = [
    'SchemeId', 'PowerBudget', 'DesignOptions', 'SchemeDesign',
    'rzf_precoder', 'bs_power_factor', 'relay_transmit_bm', 'relay_receive_bm',
    'compose_relay_bm', 'relay_power_factor', 'relay_transmit_power',
    'build_proposed', 'build_svd_mf', 'build_svd_zf', 'build_svd_rzf',
    'build_i_mmse', 'build_design', 'BUILDERS',
]


class SchemeId(enum.Enum):
    PROPOSED_RZF_ZFRZF = 'proposed'
    SVD_MF = 'svd-mf'
    SVD_ZF = 'svd-zf'
    SVD_RZF = 'svd-rzf'
    I_MMSE = 'i-mmse'

    @classmethod
    def parse(cls, name: str) -> 'SchemeId':
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ', '.join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r} (expected one of: {valid})") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PowerBudget:
    """Transmit powers at BS and RS in linear units (relative to unit noise)."""
    p_s: float
    p_r: float

    def __post_init__(self):
        if not (self.p_s > 0 and self.p_r > 0 and np.isfinite(self.p_s) and np.isfinite(self.p_r)):
            raise ValueError(f"transmit powers must be finite and positive, got {self.p_s}, {self.p_r}")

    @classmethod
    def from_db(cls, p_s_db: float, p_r_db: float) -> 'PowerBudget':
        return cls(p_s=10.0 ** (p_s_db / 10.0), p_r=10.0 ** (p_r_db / 10.0))


@dataclass(frozen=True)
class DesignOptions:
    """Per-run knobs.

    alpha, gamma
        Regularization overrides for the BS precoder and the RS transmit
        filter. ``None`` selects ``K * noise_var / power``.
    immse_backward
        Channel inside the I-MMSE relay receive filter: ``'h1'`` (the
        published formula) or ``'g'`` (the BS-RS channel).
    """
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    immse_backward: str = 'h1'

    def __post_init__(self):
        if self.immse_backward not in ('h1', 'g'):
            raise ValueError(f"immse_backward must be 'h1' or 'g', got {self.immse_backward!r}")
        for name in ('alpha', 'gamma'):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise ValueError(f"{name} must be non-negative, got {value}")


@dataclass(frozen=True, eq=False)
class SchemeDesign:
    scheme: SchemeId
    p: np.ndarray
    f: np.ndarray
    rho_s: float
    rho_r: float
    f_t: np.ndarray


def _rzf(h: np.ndarray, reg: float) -> np.ndarray:
    # H^H (H H^H + reg I)^{-1} == ((H H^H + reg I)^{-1} H)^H since the Gramian is Hermitian
    gram = h @ h.conj().T + reg * mk.identity(h.shape[0])
    return mk.adjoint(mk.solve(gram, h))


def rzf_precoder(h1, alpha: float) -> np.ndarray:
    """
    Regularized zero-forcing precoder ``H1^H (H1 H1^H + alpha I)^{-1}``.

    Parameters
    ----------
    h1 : array_like
        K x M_b direct channel.
    alpha : float
        Diagonal loading, ``>= 0``. With ``alpha == 0`` this is the ZF
        pseudo-inverse and ``H1 H1^H`` must be nonsingular.

    Raises
    ------
    SingularMatrixError
        If the loaded Gramian is singular.
    """
    if not alpha >= 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    return _rzf(mk.as_matrix(h1), alpha)


def relay_transmit_bm(h2, gamma: float) -> np.ndarray:
    """RZF transmit filter at the relay, ``H2^H (H2 H2^H + gamma I)^{-1}``."""
    if not gamma >= 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    return _rzf(mk.as_matrix(h2), gamma)


def bs_power_factor(p, p_s: float) -> float:
    """Scalar ``rho_s`` with ``rho_s**2 tr(P P^H) == p_s``."""
    p = mk.as_matrix(p)
    power = mk.trace(p @ p.conj().T).real
    if not power > 0:
        raise DegenerateDrawError("precoder has zero power")
    return float(np.sqrt(p_s / power))


def relay_receive_bm(g, p) -> np.ndarray:
    """
    Zero-forcing receive filter for the effective BS-RS channel ``Q = G P``.

    Returns ``(Q^H Q)^{-1} Q^H`` which satisfies ``F_R Q == I``.

    Raises
    ------
    DegenerateDrawError
        If ``Q^H Q`` is singular to working precision.
    """
    q = mk.mul(g, p)
    qh = mk.adjoint(q)
    try:
        return mk.solve(qh @ q, qh)
    except SingularMatrixError as exc:
        raise DegenerateDrawError(f"effective BS-RS channel G P is singular ({exc})") from exc


def compose_relay_bm(f_t, f_r) -> np.ndarray:
    """Relay beamformer ``F = F_T F_R`` (transmit filter applied after the receive filter)."""
    return mk.mul(f_t, f_r)


def relay_transmit_power(f, g, p, rho_s: float, noise_var: float) -> float:
    """``tr(rho_s^2 F G P P^H G^H F^H + noise_var F F^H)`` before relay scaling."""
    fgp = mk.mul(mk.mul(f, g), p)
    return rho_s ** 2 * mk.frobenius_norm(fgp) ** 2 + noise_var * mk.frobenius_norm(f) ** 2


def relay_power_factor(f, g, p, rho_s: float, noise_var: float, p_r: float) -> float:
    """Scalar ``rho_r`` meeting the relay power budget exactly."""
    power = relay_transmit_power(f, g, p, rho_s, noise_var)
    if not power > 0:
        raise DegenerateDrawError("relay beamformer has zero power")
    return float(np.sqrt(p_r / power))


def _default_reg(override, k, noise_var, power):
    return k * noise_var / power if override is None else override


def build_proposed(ch: ChannelSet, budget: PowerBudget,
                   options: DesignOptions = DesignOptions()) -> SchemeDesign:
    """RZF precoding from the direct channel, ZF receive + RZF transmit at the relay."""
    alpha = _default_reg(options.alpha, ch.k, ch.noise_var, budget.p_s)
    gamma = _default_reg(options.gamma, ch.k, ch.noise_var, budget.p_r)
    try:
        p = rzf_precoder(ch.h1, alpha)
        f_t = relay_transmit_bm(ch.h2, gamma)
    except SingularMatrixError as exc:
        raise DegenerateDrawError(str(exc)) from exc
    rho_s = bs_power_factor(p, budget.p_s)
    f_r = relay_receive_bm(ch.g, p)
    f = compose_relay_bm(f_t, f_r)
    rho_r = relay_power_factor(f, ch.g, p, rho_s, ch.noise_var, budget.p_r)
    return SchemeDesign(SchemeId.PROPOSED_RZF_ZFRZF, p, f, rho_s, rho_r, f_t)


def _build_svd(scheme: SchemeId, ch: ChannelSet, budget: PowerBudget, f_t: np.ndarray) -> SchemeDesign:
    # G = U diag(s) V^H; BS sends along V, relay receives with U^H
    dec = ch.g_svd
    p = dec.v
    rho_s = bs_power_factor(p, budget.p_s)
    f = f_t @ dec.u.conj().T
    rho_r = relay_power_factor(f, ch.g, p, rho_s, ch.noise_var, budget.p_r)
    return SchemeDesign(scheme, p, f, rho_s, rho_r, f @ ch.g @ p)


def build_svd_mf(ch: ChannelSet, budget: PowerBudget,
                 options: DesignOptions = DesignOptions()) -> SchemeDesign:
    """SVD on the backward channel, matched filter (unit-norm columns) towards the users."""
    norms = np.sqrt(np.sum(np.abs(ch.h2) ** 2, axis=1))
    if np.any(norms <= 0):
        raise DegenerateDrawError("forward channel has a zero-norm user row")
    f_t = ch.h2.conj().T / norms
    return _build_svd(SchemeId.SVD_MF, ch, budget, f_t)


def build_svd_zf(ch: ChannelSet, budget: PowerBudget,
                 options: DesignOptions = DesignOptions()) -> SchemeDesign:
    try:
        f_t = relay_transmit_bm(ch.h2, 0.0)
    except SingularMatrixError as exc:
        raise DegenerateDrawError(f"H2 H2^H is singular ({exc})") from exc
    return _build_svd(SchemeId.SVD_ZF, ch, budget, f_t)


def build_svd_rzf(ch: ChannelSet, budget: PowerBudget,
                  options: DesignOptions = DesignOptions()) -> SchemeDesign:
    gamma = _default_reg(options.gamma, ch.k, ch.noise_var, budget.p_r)
    try:
        f_t = relay_transmit_bm(ch.h2, gamma)
    except SingularMatrixError as exc:
        raise DegenerateDrawError(str(exc)) from exc
    return _build_svd(SchemeId.SVD_RZF, ch, budget, f_t)


def build_i_mmse(ch: ChannelSet, budget: PowerBudget,
                 options: DesignOptions = DesignOptions()) -> SchemeDesign:
    """
    Identity precoding at the BS and an MMSE-type relay filter

    ``F = (H2^H H2 + noise_var/P_r I)^{-1} H2^H X^H (X^H X + noise_var I)^{-1}``

    where X is H1 (default, as published) or G (``immse_backward='g'``).
    """
    m_b = ch.h1.shape[1]
    m_r = ch.h2.shape[1]
    x = ch.h1 if options.immse_backward == 'h1' else ch.g
    p = mk.identity(m_b)
    rho_s = bs_power_factor(p, budget.p_s)
    nv = ch.noise_var
    try:
        # X^H (X^H X + nv I)^{-1} == ((X^H X + nv I)^{-1} X)^H
        right = mk.adjoint(mk.solve(x.conj().T @ x + nv * mk.identity(x.shape[1]), x))
        left_gram = ch.h2.conj().T @ ch.h2 + (nv / budget.p_r) * mk.identity(m_r)
        f = mk.solve(left_gram, ch.h2.conj().T @ right)
    except SingularMatrixError as exc:
        raise DegenerateDrawError(str(exc)) from exc
    rho_r = relay_power_factor(f, ch.g, p, rho_s, nv, budget.p_r)
    return SchemeDesign(SchemeId.I_MMSE, p, f, rho_s, rho_r, f @ ch.g @ p)


BUILDERS = {
    SchemeId.PROPOSED_RZF_ZFRZF: build_proposed,
    SchemeId.SVD_MF: build_svd_mf,
    SchemeId.SVD_ZF: build_svd_zf,
    SchemeId.SVD_RZF: build_svd_rzf,
    SchemeId.I_MMSE: build_i_mmse,
}


def build_design(scheme: SchemeId, ch: ChannelSet, budget: PowerBudget,
                 options: DesignOptions = DesignOptions()) -> SchemeDesign:
    return BUILDERS[SchemeId(scheme)](ch, budget, options)
