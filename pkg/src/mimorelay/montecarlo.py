"""
Seeded Monte Carlo ensembles and parameter sweeps.

Realization ``i`` of a sweep point is drawn with ``SeedSpec(master_seed, i)``
and the *same* draw is fed to every scheme (paired comparison). Realizations
are the unit of parallelism; results are gathered by index and reduced in
index order, so the output does not depend on the worker count.

Draws for which any scheme design is degenerate are discarded for all
schemes and replaced by auxiliary indices ``N, N+1, ...`` in order of the
failed primary indices.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import Dimensions, Geometry, SeedSpec, draw_channels
from .errors import DegenerateDrawError, DiscardBudgetExceeded, SingularMatrixError
from .rates import network_rates
from .schemes import DesignOptions, PowerBudget, SchemeId, build_design

__all__ = [
    'SWEEP_AXES', 'WORKERS_ENV', 'MAX_DISCARD_FRACTION', 'BOUND_SLACK',
    'ExperimentConfig', 'PointConfig', 'SchemeStats', 'PointResult',
    'SweepResult', 'evaluate_realization', 'run_point', 'run_sweep',
    'default_workers',
]

logger = logging.getLogger(__name__)

SWEEP_AXES = ('power', 'rs_position', 'users')
WORKERS_ENV = 'MIMORELAY_WORKERS'
MAX_DISCARD_FRACTION = 1e-3
# a realization "violates" the bound when lower > exact + BOUND_SLACK
BOUND_SLACK = 1e-9


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, '').strip()
    if not value:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return n


@dataclass(frozen=True)
class PointConfig:
    """Everything needed to simulate one sweep point."""
    dims: Dimensions = field(default_factory=lambda: Dimensions.square(4))
    geometry: Geometry = field(default_factory=Geometry)
    budget: PowerBudget = field(default_factory=lambda: PowerBudget.from_db(28.0, 28.0))
    schemes: Tuple[SchemeId, ...] = tuple(SchemeId)
    realizations: int = 2000
    master_seed: int = 1
    noise_var: float = 1.0
    options: DesignOptions = field(default_factory=DesignOptions)

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        SeedSpec(self.master_seed, 0)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A sweep over one axis with every other parameter held fixed.

    ``sweep_axis`` is ``'power'`` (P_s = P_r in dB), ``'rs_position'`` or
    ``'users'`` (K = M_b = M_r), or ``None`` for a single operating point.
    """
    dims: Dimensions = field(default_factory=lambda: Dimensions.square(4))
    geometry: Geometry = field(default_factory=Geometry)
    p_s_db: float = 28.0
    p_r_db: float = 28.0
    schemes: Tuple[SchemeId, ...] = tuple(SchemeId)
    realizations: int = 2000
    master_seed: int = 1
    sweep_axis: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    noise_var: float = 1.0
    options: DesignOptions = field(default_factory=DesignOptions)

    def __post_init__(self):
        if self.sweep_axis is None:
            if self.sweep_values:
                raise ValueError("sweep values given without a sweep axis")
        else:
            if self.sweep_axis not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ValueError("sweep values must be non-empty")
            if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
                raise ValueError("sweep values must be strictly increasing")
        # validates every point eagerly (geometry, dims, powers)
        self.points()

    def base_point(self) -> PointConfig:
        return PointConfig(dims=self.dims, geometry=self.geometry,
                           budget=PowerBudget.from_db(self.p_s_db, self.p_r_db),
                           schemes=tuple(self.schemes), realizations=self.realizations,
                           master_seed=self.master_seed, noise_var=self.noise_var,
                           options=self.options)

    def points(self) -> List[Tuple[Optional[float], PointConfig]]:
        base = self.base_point()
        if self.sweep_axis is None:
            return [(None, base)]
        out = []
        for value in self.sweep_values:
            if self.sweep_axis == 'power':
                pt = replace(base, budget=PowerBudget.from_db(value, value))
            elif self.sweep_axis == 'rs_position':
                pt = replace(base, geometry=replace(self.geometry, rs_pos=float(value)))
            else:
                if int(value) != value:
                    raise ValueError(f"user counts must be integers, got {value}")
                pt = replace(base, dims=Dimensions.square(int(value)))
            out.append((value, pt))
        return out


@dataclass(frozen=True)
class SchemeStats:
    mean_sum_exact: float
    stderr_exact: float
    mean_sum_lower: float
    stderr_lower: float
    mean_gap: float
    bound_violation_fraction: float
    realizations: int
    discards: int


@dataclass(frozen=True)
class PointResult:
    stats: Dict[SchemeId, SchemeStats]
    discards: int
    # realizations x schemes x (exact, lower), in index order
    samples: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SweepResult:
    axis: Optional[str]
    points: List[Tuple[Optional[float], PointResult]]

    def get(self, value, scheme) -> SchemeStats:
        for v, res in self.points:
            if v == value:
                return res.stats[SchemeId(scheme)]
        raise KeyError(value)


def evaluate_realization(point: PointConfig, index: int) -> np.ndarray:
    """
    Sum rates of every scheme on realization `index`.

    Returns
    -------
    np.ndarray
        Shape ``(len(point.schemes), 2)``: exact and lower-bound sum rate.

    Raises
    ------
    DegenerateDrawError
        If any scheme cannot be designed on this draw.
    """
    ch = draw_channels(point.dims, point.geometry, point.noise_var,
                       SeedSpec(point.master_seed, index))
    out = np.empty((len(point.schemes), 2))
    for i, scheme in enumerate(point.schemes):
        try:
            design = build_design(scheme, ch, point.budget, point.options)
        except SingularMatrixError as exc:
            raise DegenerateDrawError(str(exc)) from exc
        report = network_rates(ch, design)
        out[i] = report.sum_exact, report.sum_lower
    return out


def _evaluate_chunk(point: PointConfig, indices: Sequence[int]):
    out = []
    for idx in indices:
        try:
            out.append((idx, evaluate_realization(point, idx)))
        except DegenerateDrawError as exc:
            logger.debug("realization %d discarded: %s", idx, exc)
            out.append((idx, None))
    return out


def _chunks(n: int, parts: int):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _stats(samples: np.ndarray, discards: int) -> SchemeStats:
    n = samples.shape[0]
    exact = samples[:, 0]
    lower = samples[:, 1]
    if n > 1:
        se_exact = float(np.std(exact, ddof=1) / np.sqrt(n))
        se_lower = float(np.std(lower, ddof=1) / np.sqrt(n))
    else:
        se_exact = se_lower = 0.0
    return SchemeStats(
        mean_sum_exact=float(np.mean(exact)),
        stderr_exact=se_exact,
        mean_sum_lower=float(np.mean(lower)),
        stderr_lower=se_lower,
        mean_gap=float(np.mean(exact - lower)),
        bound_violation_fraction=float(np.mean(lower > exact + BOUND_SLACK)),
        realizations=n,
        discards=discards,
    )


def run_point(point: PointConfig, workers: Optional[int] = None) -> PointResult:
    """
    Simulate `point.realizations` paired realizations of every scheme.

    Parameters
    ----------
    point : PointConfig
    workers : int, optional
        Number of worker processes. Defaults to the ``MIMORELAY_WORKERS``
        environment variable, else 1 (in-process).

    Raises
    ------
    DiscardBudgetExceeded
        If more than 0.1% of the realizations had to be redrawn.
    """
    n = point.realizations
    workers = default_workers() if workers is None else workers
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_evaluate_chunk, point, list(c))
                       for c in _chunks(n, workers * 4)]
            results = [r for fut in futures for r in fut.result()]
    else:
        results = _evaluate_chunk(point, range(n))
    results.sort(key=lambda r: r[0])

    samples = np.empty((n, len(point.schemes), 2))
    failed = []
    for idx, value in results:
        if value is None:
            failed.append(idx)
        else:
            samples[idx] = value

    discards = 0
    budget = MAX_DISCARD_FRACTION * n
    aux = n
    for idx in failed:
        while True:
            discards += 1
            if discards > budget:
                raise DiscardBudgetExceeded(
                    f"{discards} of {n} realizations were degenerate (limit "
                    f"{MAX_DISCARD_FRACTION:.1%}); first failed index {failed[0]}, "
                    f"dims={point.dims}, geometry={point.geometry}")
            try:
                samples[idx] = evaluate_realization(point, aux)
                aux += 1
                break
            except DegenerateDrawError:
                aux += 1

    stats = {s: _stats(samples[:, i, :], discards) for i, s in enumerate(point.schemes)}
    return PointResult(stats=stats, discards=discards, samples=samples)


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None) -> SweepResult:
    """
    Run every point of `cfg`.

    Channel streams depend on the dimensions and geometry of a point, so
    position and user-count sweeps get independent fades at each point,
    while a power sweep reuses the same draws across power levels.
    """
    points = []
    for value, pt in cfg.points():
        logger.info("sweep %s=%s: %d realizations", cfg.sweep_axis, value, pt.realizations)
        points.append((value, run_point(pt, workers=workers)))
    return SweepResult(axis=cfg.sweep_axis, points=points)
