"""
Plain-text experiment configuration.

One ``key = value`` pair per line, ``#`` starts a comment. Keys::

    dims.k              number of users (default 4)
    dims.m_b, dims.m_r  BS / RS antennas (default: equal to dims.k)
    geometry.bs         BS position on the line (default 0.0)
    geometry.rs         RS position (default 0.25)
    geometry.user       user position (default 1.0)
    geometry.tau        path-loss exponent (default 3)
    power.ps_db         BS power in dB over unit noise (default 28)
    power.pr_db         RS power in dB over unit noise (default 28)
    mc.realizations     realizations per sweep point (default 2000)
    mc.seed             64-bit master seed (default 1)
    schemes             comma-separated scheme names (default: all five)
    sweep.axis          power | rs_position | users | none (default none)
    sweep.values        comma-separated, strictly increasing
    rzf.alpha           BS regularization, number or "auto" (default auto)
    rzf.gamma           RS regularization, number or "auto" (default auto)
    immse.backward      h1 | g (default h1)
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional

from .channel import Dimensions, Geometry
from .errors import ConfigError, MimoRelayError
from .montecarlo import SWEEP_AXES, ExperimentConfig
from .schemes import DesignOptions, SchemeId

__all__ = ['KNOWN_KEYS', 'BUILTIN_CONFIGS', 'parse_config_text', 'load_config',
           'build_config', 'render_config']

KNOWN_KEYS = (
    'dims.k', 'dims.m_b', 'dims.m_r',
    'geometry.bs', 'geometry.rs', 'geometry.user', 'geometry.tau',
    'power.ps_db', 'power.pr_db',
    'mc.realizations', 'mc.seed',
    'schemes',
    'sweep.axis', 'sweep.values',
    'rzf.alpha', 'rzf.gamma',
    'immse.backward',
)

BUILTIN_CONFIGS = {
    'paper_defaults': """\
# K = M_b = M_r = 4, BS at 0, RS at 0.25, users at 1, tau = 3, 28 dB
dims.k = 4
geometry.bs = 0.0
geometry.rs = 0.25
geometry.user = 1.0
geometry.tau = 3
power.ps_db = 28
power.pr_db = 28
mc.realizations = 2000
mc.seed = 1
schemes = proposed, svd-mf, svd-zf, svd-rzf, i-mmse
""",
}


# first token found in a geometry error message decides the reported key
_GEOMETRY_KEYS = (
    ('tau', 'geometry.tau'), ('bs_pos', 'geometry.bs'), ('user_pos', 'geometry.user'),
    ('bs-rs', 'geometry.rs'), ('rs-user', 'geometry.rs'), ('rs_pos', 'geometry.rs'),
    ('bs-user', 'geometry.user'),
)


def parse_config_text(text: str) -> Dict[str, str]:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split('=', 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key (line {lineno})", key=key)
        if key in entries:
            raise ConfigError(f"duplicate key (line {lineno})", key=key)
        entries[key] = value
    return entries


def _number(entries, key, default, kind=float):
    if key not in entries:
        return default
    text = entries[key]
    try:
        if kind is int:
            value = int(text, 0)
        else:
            value = float(text)
    except ValueError:
        raise ConfigError(f"expected {'an integer' if kind is int else 'a number'}, got {text!r}",
                          key=key) from None
    return value


def _optional_reg(entries, key):
    text = entries.get(key, 'auto')
    if text.lower() == 'auto':
        return None
    return _number(entries, key, None)


def _value_list(text, key):
    items = [s.strip() for s in text.split(',') if s.strip()]
    if not items:
        raise ConfigError("empty list", key=key)
    try:
        return tuple(float(s) for s in items)
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", key=key) from None


def build_config(entries: Dict[str, str]) -> ExperimentConfig:
    """Turn parsed entries into a validated :class:`ExperimentConfig`.

    Raises :class:`ConfigError` naming the offending key.
    """
    k = _number(entries, 'dims.k', 4, int)
    m_b = _number(entries, 'dims.m_b', k, int)
    m_r = _number(entries, 'dims.m_r', k, int)
    try:
        dims = Dimensions(m_b=m_b, m_r=m_r, k=k)
    except MimoRelayError as exc:
        raise ConfigError(str(exc), key='dims.k' if k > m_b else 'dims.m_b') from None

    geo_kwargs = dict(
        bs_pos=_number(entries, 'geometry.bs', 0.0),
        rs_pos=_number(entries, 'geometry.rs', 0.25),
        user_pos=_number(entries, 'geometry.user', 1.0),
        tau=_number(entries, 'geometry.tau', 3.0),
    )
    try:
        geometry = Geometry(**geo_kwargs)
    except MimoRelayError as exc:
        message = str(exc)
        key = next((k for token, k in _GEOMETRY_KEYS if token in message), 'geometry.rs')
        raise ConfigError(message, key=key) from None

    realizations = _number(entries, 'mc.realizations', 2000, int)
    if realizations < 1:
        raise ConfigError("must be >= 1", key='mc.realizations')
    seed = _number(entries, 'mc.seed', 1, int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("must be a 64-bit unsigned integer", key='mc.seed')

    schemes = tuple(SchemeId)
    if 'schemes' in entries:
        try:
            schemes = tuple(SchemeId.parse(s) for s in entries['schemes'].split(',') if s.strip())
        except ValueError as exc:
            raise ConfigError(str(exc), key='schemes') from None
        if not schemes:
            raise ConfigError("no schemes listed", key='schemes')
        if len(set(schemes)) != len(schemes):
            raise ConfigError("duplicate scheme", key='schemes')

    axis = entries.get('sweep.axis', 'none').strip().lower()
    values = ()
    if axis == 'none':
        axis = None
        if 'sweep.values' in entries:
            raise ConfigError("values given but sweep.axis is none", key='sweep.values')
    else:
        if axis not in SWEEP_AXES:
            raise ConfigError(f"expected one of none, {', '.join(SWEEP_AXES)}", key='sweep.axis')
        if 'sweep.values' not in entries:
            raise ConfigError("required when sweep.axis is set", key='sweep.values')
        values = _value_list(entries['sweep.values'], 'sweep.values')

    backward = entries.get('immse.backward', 'h1').strip().lower()
    if backward not in ('h1', 'g'):
        raise ConfigError("expected h1 or g", key='immse.backward')
    alpha = _optional_reg(entries, 'rzf.alpha')
    gamma = _optional_reg(entries, 'rzf.gamma')
    for key, reg in (('rzf.alpha', alpha), ('rzf.gamma', gamma)):
        if reg is not None and not reg >= 0:
            raise ConfigError("must be non-negative", key=key)

    try:
        return ExperimentConfig(
            dims=dims, geometry=geometry,
            p_s_db=_number(entries, 'power.ps_db', 28.0),
            p_r_db=_number(entries, 'power.pr_db', 28.0),
            schemes=schemes, realizations=realizations, master_seed=seed,
            sweep_axis=axis, sweep_values=values,
            options=DesignOptions(alpha=alpha, gamma=gamma, immse_backward=backward),
        )
    except (MimoRelayError, ValueError) as exc:
        raise ConfigError(str(exc), key='sweep.values' if axis else 'power.ps_db') from None


def load_config(source: Optional[str]) -> ExperimentConfig:
    """Load a config from a file path or a builtin name (``paper_defaults``).

    ``None`` gives the defaults.
    """
    if source is None:
        return build_config({})
    if source in BUILTIN_CONFIGS:
        return build_config(parse_config_text(BUILTIN_CONFIGS[source]))
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc.strerror}") from None
    return build_config(parse_config_text(text))


def with_sweep(cfg: ExperimentConfig, axis, values) -> ExperimentConfig:
    try:
        return replace(cfg, sweep_axis=axis, sweep_values=tuple(values) if axis else ())
    except (MimoRelayError, ValueError) as exc:
        raise ConfigError(str(exc), key='sweep.values') from None


def render_config(cfg: ExperimentConfig) -> str:
    """Fully resolved configuration in the config-file syntax."""
    def fmt(x):
        return format(x, '.12g')

    opts = cfg.options
    lines = [
        f"dims.k = {cfg.dims.k}",
        f"dims.m_b = {cfg.dims.m_b}",
        f"dims.m_r = {cfg.dims.m_r}",
        f"geometry.bs = {fmt(cfg.geometry.bs_pos)}",
        f"geometry.rs = {fmt(cfg.geometry.rs_pos)}",
        f"geometry.user = {fmt(cfg.geometry.user_pos)}",
        f"geometry.tau = {fmt(cfg.geometry.tau)}",
        f"power.ps_db = {fmt(cfg.p_s_db)}",
        f"power.pr_db = {fmt(cfg.p_r_db)}",
        f"mc.realizations = {cfg.realizations}",
        f"mc.seed = {cfg.master_seed}",
        f"schemes = {', '.join(s.value for s in cfg.schemes)}",
        f"sweep.axis = {cfg.sweep_axis or 'none'}",
    ]
    if cfg.sweep_axis:
        lines.append(f"sweep.values = {', '.join(fmt(v) for v in cfg.sweep_values)}")
    lines += [
        f"rzf.alpha = {'auto' if opts.alpha is None else fmt(opts.alpha)}",
        f"rzf.gamma = {'auto' if opts.gamma is None else fmt(opts.gamma)}",
        f"immse.backward = {opts.immse_backward}",
    ]
    return '\n'.join(lines) + '\n'
