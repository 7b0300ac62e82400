"""Linear precoding and relay beamforming for MIMO relay broadcast channels with a direct link."""

__version__ = '0.1.0'

from .channel import ChannelSet, Dimensions, Geometry, SeedSpec, draw_channels, variance_profile
from .montecarlo import ExperimentConfig, PointConfig, run_point, run_sweep
from .rates import RateReport, network_rates
from .schemes import DesignOptions, PowerBudget, SchemeDesign, SchemeId, build_design

__all__ = [
    'ChannelSet', 'Dimensions', 'Geometry', 'SeedSpec', 'draw_channels',
    'variance_profile', 'ExperimentConfig', 'PointConfig', 'run_point',
    'run_sweep', 'RateReport', 'network_rates', 'DesignOptions',
    'PowerBudget', 'SchemeDesign', 'SchemeId', 'build_design',
]
