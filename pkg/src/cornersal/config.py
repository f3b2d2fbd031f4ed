"""Pipeline configuration: a flat key=value file with strict, typed parsing.

Every key is optional and maps to exactly one PipelineConfig field; unknown
or duplicate keys fail loudly. `#` starts a comment line.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    """Malformed configuration text or out-of-range value."""


@dataclass(frozen=True)
class PipelineConfig:
    sigma1: float = 0.1  # color kernel bandwidth
    sigma2: float = 0.25  # spatial kernel bandwidth
    eta: float = 6.0  # fusion saturation factor
    scales: tuple[int, ...] = (100, 150, 200, 250, 300)  # superpixel counts
    corner_fraction: float = 0.15  # corner square side as a fraction of min side
    h_count: int = 200  # windows kept per scale
    beta: float = 1.0  # window accuracy guard
    guided_radius: int = 0  # 0 = derive from image size
    guided_eps: float = 1e-3
    f_mode: str = "const"  # corner prior modulation: const | luma
    squared_distance: bool = False  # square the kernel distances
    literal_log_sign: bool = False  # keep the negative log anchor weights
    beta2: float = 0.3  # F-measure precision emphasis
    seed: int = 0  # synthetic corpus seed


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return lowered == "true"


def _parse_scales(text: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in text.split(","))


_PARSERS = {
    "sigma1": float,
    "sigma2": float,
    "eta": float,
    "scales": _parse_scales,
    "corner_fraction": float,
    "h_count": int,
    "beta": float,
    "guided_radius": int,
    "guided_eps": float,
    "f_mode": str,
    "squared_distance": _parse_bool,
    "literal_log_sign": _parse_bool,
    "beta2": float,
    "seed": int,
}


def validate_config(config: PipelineConfig) -> PipelineConfig:
    if config.sigma1 <= 0 or config.sigma2 <= 0 or config.guided_eps <= 0:
        raise ConfigError("bandwidths and guided_eps must be > 0")
    if config.eta <= 0 or config.beta <= 0 or config.beta2 <= 0:
        raise ConfigError("eta, beta and beta2 must be > 0")
    if not config.scales or any(s <= 0 for s in config.scales):
        raise ConfigError("scales must be a nonempty list of positive counts")
    if any(a >= b for a, b in zip(config.scales, config.scales[1:])):
        raise ConfigError("scales must be strictly ascending")
    if not 0.0 < config.corner_fraction < 0.5:
        raise ConfigError("corner_fraction must lie in (0, 0.5)")
    if config.h_count < 1 or config.guided_radius < 0 or config.seed < 0:
        raise ConfigError("h_count must be >= 1; guided_radius and seed must be >= 0")
    if config.f_mode not in ("const", "luma"):
        raise ConfigError(f"unknown f_mode {config.f_mode!r}")
    return config


def parse_config(text: str) -> PipelineConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except ValueError as err:
            raise ConfigError(f"line {lineno}: bad value for {key}: {err}") from err
    return validate_config(PipelineConfig(**values))


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(config: PipelineConfig, overrides: dict[str, str]) -> PipelineConfig:
    """Overlay textual key/value pairs (e.g. CLI flags) onto an existing config."""
    values = {}
    for key, text in overrides.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](text)
        except ValueError as err:
            raise ConfigError(f"bad value for {key}: {err}") from err
    return validate_config(replace(config, **values))


def serialize_config(config: PipelineConfig) -> str:
    lines = []
    for field in fields(config):
        value = getattr(config, field.name)
        if field.name == "scales":
            text = ",".join(str(s) for s in value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = str(value)
        lines.append(f"{field.name}={text}")
    return "\n".join(lines) + "\n"
