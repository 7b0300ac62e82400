"""
Fading realizations for the BS / RS / users line geometry.

Every channel entry is circularly symmetric complex Gaussian with variance
``1 / L**tau``, L being the distance between the two end nodes.

Random stream (version 1)
-------------------------
A realization is generated from a Philox-4x64 counter-based generator whose

* key is ``(master_seed, realization_index)``, one-to-one with the SeedSpec;
* counter starts at ``(0, 0, d0, d1)`` where ``(d0, d1)`` are the first 16
  bytes of SHA-256 over a label built from the dimensions and the geometry
  quantized to 1e-6 (see :func:`stream_label`).

The raw 64-bit outputs are consumed pairwise in order H1, G, H2 (each
row-major). Each pair ``(r1, r2)`` becomes one entry through Box-Muller:
``u1 = ((r1 >> 11) + 1) / 2**53``, ``u2 = (r2 >> 11) / 2**53`` and
``z = sqrt(-ln u1) * exp(2j*pi*u2)``, which has unit variance, then scaled by
the square root of the link variance. Only raw generator output is used, so
streams do not depend on numpy's distribution samplers.
"""

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import matkernel as mk
from .errors import DimensionError, GeometryError

__all__ = [
    'EPSILON_DIST', 'RNG_STREAM_VERSION', 'Geometry', 'Dimensions',
    'ChannelSet', 'SeedSpec', 'variance_profile', 'stream_label',
    'draw_channels',
]

EPSILON_DIST = 1e-3
RNG_STREAM_VERSION = 1
_U64 = 2 ** 64


@dataclass(frozen=True)
class Geometry:
    """Node positions on a normalized line and the path-loss exponent."""
    bs_pos: float = 0.0
    rs_pos: float = 0.25
    user_pos: float = 1.0
    tau: float = 3.0

    def __post_init__(self):
        for name in ('bs_pos', 'rs_pos', 'user_pos', 'tau'):
            if not np.isfinite(getattr(self, name)):
                raise GeometryError(f"{name} must be finite")
        for label, dist in self.distances().items():
            if dist < EPSILON_DIST:
                raise GeometryError(
                    f"{label} distance {dist:g} is below epsilon_dist={EPSILON_DIST:g}")
        if not 0.0 <= self.bs_pos < 1.0:
            raise GeometryError(f"bs_pos={self.bs_pos} outside [0, 1)")
        if not 0.0 < self.rs_pos < 1.0:
            raise GeometryError(f"rs_pos={self.rs_pos} outside (0, 1)")
        if self.tau < 0:
            raise GeometryError(f"path-loss exponent tau={self.tau} must be non-negative")

    def distances(self):
        return {
            'bs-user': abs(self.user_pos - self.bs_pos),
            'bs-rs': abs(self.rs_pos - self.bs_pos),
            'rs-user': abs(self.user_pos - self.rs_pos),
        }


@dataclass(frozen=True)
class Dimensions:
    """Antenna counts at BS and RS and the number of single-antenna users.

    Only the square configuration ``m_b == m_r == k`` is supported.
    """
    m_b: int
    m_r: int
    k: int

    def __post_init__(self):
        for name in ('m_b', 'm_r', 'k'):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise DimensionError(f"{name} must be a positive integer, got {value!r}")
        if self.k > self.m_b:
            raise DimensionError(
                f"k={self.k} exceeds m_b={self.m_b}: the BS needs K <= M_b to serve K streams")
        if not self.m_b == self.m_r == self.k:
            raise DimensionError(
                f"only m_b == m_r == k is supported (K <= M_b with equality), "
                f"got m_b={self.m_b}, m_r={self.m_r}, k={self.k}")

    @classmethod
    def square(cls, k: int) -> 'Dimensions':
        return cls(m_b=k, m_r=k, k=k)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    realization_index: int

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if not 0 <= self.realization_index < _U64:
            raise ValueError(f"realization_index out of range: {self.realization_index}")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One fading realization.

    Attributes
    ----------
    h1 : np.ndarray
        K x M_b direct channel (BS to users).
    g : np.ndarray
        M_r x M_b backward channel (BS to RS).
    h2 : np.ndarray
        K x M_r forward channel (RS to users).
    noise_var : float
        Per-antenna noise power at RS and users.
    """
    h1: np.ndarray
    g: np.ndarray
    h2: np.ndarray
    noise_var: float = 1.0

    def __post_init__(self):
        for name in ('h1', 'g', 'h2'):
            object.__setattr__(self, name, mk.as_matrix(getattr(self, name)))
        k, m_b = self.h1.shape
        if self.g.shape[1] != m_b or self.h2.shape[0] != k or self.h2.shape[1] != self.g.shape[0]:
            raise DimensionError(
                f"inconsistent channel shapes h1={self.h1.shape}, g={self.g.shape}, h2={self.h2.shape}")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be positive, got {self.noise_var}")

    @property
    def k(self) -> int:
        return self.h1.shape[0]

    @cached_property
    def g_svd(self) -> mk.SvdResult:
        # shared by all SVD-based baselines evaluated on this realization
        return mk.svd(self.g)

    def digest(self) -> str:
        h = hashlib.sha256()
        for m in (self.h1, self.g, self.h2):
            h.update(np.ascontiguousarray(m).tobytes())
        h.update(np.float64(self.noise_var).tobytes())
        return h.hexdigest()


def variance_profile(geometry: Geometry):
    """
    Large-scale variances ``1 / L**tau`` of the three links.

    Returns
    -------
    (sigma2_h1, sigma2_g, sigma2_h2) : tuple of float
        Direct (BS-users), backward (BS-RS) and forward (RS-users) channels.
    """
    d = geometry.distances()
    for label, dist in d.items():
        if dist < EPSILON_DIST:
            raise GeometryError(f"{label} distance {dist:g} is below epsilon_dist={EPSILON_DIST:g}")
    tau = geometry.tau
    return (d['bs-user'] ** -tau, d['bs-rs'] ** -tau, d['rs-user'] ** -tau)


def _quantize(x: float) -> int:
    return int(round(x * 1e6))


def stream_label(dims: Dimensions, geometry: Geometry) -> str:
    return (f"mimorelay-v{RNG_STREAM_VERSION}|k={dims.k}|mb={dims.m_b}|mr={dims.m_r}"
            f"|bs={_quantize(geometry.bs_pos)}|rs={_quantize(geometry.rs_pos)}"
            f"|user={_quantize(geometry.user_pos)}|tau={_quantize(geometry.tau)}")


def _bit_generator(seed: SeedSpec, label: str) -> np.random.Philox:
    d = hashlib.sha256(label.encode('ascii')).digest()
    d0 = int.from_bytes(d[:8], 'little')
    d1 = int.from_bytes(d[8:16], 'little')
    key = np.array([seed.master_seed, seed.realization_index], dtype=np.uint64)
    counter = np.array([0, 0, d0, d1], dtype=np.uint64)
    return np.random.Philox(counter=counter, key=key)


def _box_muller(raw: np.ndarray) -> np.ndarray:
    u1 = ((raw[0::2] >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * 2.0 ** -53
    u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def draw_channels(dims: Dimensions, geometry: Geometry, noise_var: float,
                  seed: SeedSpec) -> ChannelSet:
    """Draw (H1, G, H2) for one realization; bit-exact for a fixed `seed`."""
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    s_h1, s_g, s_h2 = variance_profile(geometry)
    shapes = [(dims.k, dims.m_b), (dims.m_r, dims.m_b), (dims.k, dims.m_r)]
    n = sum(r * c for r, c in shapes)
    z = _box_muller(_bit_generator(seed, stream_label(dims, geometry)).random_raw(2 * n))
    out = []
    offset = 0
    for (r, c), var in zip(shapes, (s_h1, s_g, s_h2)):
        out.append(np.sqrt(var) * z[offset:offset + r * c].reshape(r, c))
        offset += r * c
    return ChannelSet(h1=out[0], g=out[1], h2=out[2], noise_var=float(noise_var))
