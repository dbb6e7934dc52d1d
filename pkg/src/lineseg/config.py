"""Tool configuration: shipped defaults, flat key=value files, overrides.

The config file is a flat text document (``key = value`` per line, ``#``
comments); command-line flags override file values, and the effective
configuration is echoed into every JSON report for provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .metric import MetricConfig
from .pipeline import WindowSpec
from .postprocess import PostprocessParams

__all__ = ["ToolConfig"]

_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


@dataclass(frozen=True)
class ToolConfig:
    n_subsets: int = 10
    epsilon: float = 0.2
    kernel_length: int = 21
    kernel_thickness: int = 3
    window: int = 320
    core: int = 100
    threshold: float = 0.5
    averaging: str = "macro"
    singleton_policy: str = "beginning_of_line"
    count_unassigned_in_ei: bool = False
    connectivity: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        # Delegate validation to the owning modules' invariants.
        self.postprocess_params()
        self.window_spec()
        self.metric_config()
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")

    def postprocess_params(self) -> PostprocessParams:
        return PostprocessParams(
            n_subsets=self.n_subsets,
            epsilon=self.epsilon,
            kernel_length=self.kernel_length,
            kernel_thickness=self.kernel_thickness,
            connectivity=self.connectivity,
        )

    def window_spec(self) -> WindowSpec:
        return WindowSpec(window=self.window, core=self.core)

    def metric_config(self) -> MetricConfig:
        return MetricConfig(
            averaging=self.averaging,
            singleton_policy=self.singleton_policy,
            count_unassigned_in_ei=self.count_unassigned_in_ei,
        )

    def merged(self, **overrides) -> "ToolConfig":
        """New config with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_file(cls, path) -> "ToolConfig":
        values: dict = {}
        types = {f.name: f.type for f in fields(cls)}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in types:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, value, types[key], f"{path}:{lineno}")
        return cls(**values)


def _coerce(key: str, value: str, typ, where: str):
    typ = str(typ)
    try:
        if "bool" in typ:
            return _BOOL_WORDS[value.lower()]
        if "int" in typ:
            return int(value)
        if "float" in typ:
            return float(value)
        return value
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{where}: bad value for {key}: {value!r}") from exc
