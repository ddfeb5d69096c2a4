"""Flat ``key = value`` experiment configs.

Example::

    # edge moments at the two-point law
    kind = moments
    seed = 20240611
    distribution = two-point
    p = 0.8
    sigma = 0.5
    n = 500, 1000
    epsilon = 0.05
    trials = 200

Blank lines and ``#`` comments are ignored.  Unknown keys, repeated keys and
malformed values are errors reported with their line number.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .ensemble import EntryDistribution, distribution_from_spec

__all__ = ["KINDS", "ConfigError", "ExperimentConfig", "parse_config", "load_config"]

KINDS = (
    "exact-vs-mc",
    "moments",
    "variance",
    "lln",
    "concentration",
    "scaling",
    "glue-audit",
    "dyck",
    "bound-chain",
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One declared experiment.  ``seed`` is mandatory; there is no clock seeding."""

    kind: str
    seed: int
    name: str = ""
    distribution: str = "two-point"
    p: float = 0.8
    sigma: float = 0.5
    n: tuple[int, ...] = ()
    s: int | None = None
    epsilon: float = 0.1
    delta: float = 0.3
    trials: int = 100
    reference_trials: int | None = None
    t_grid: tuple[float, ...] = (4.0, 8.0, 12.0)
    s_grid: tuple[int, ...] = (64, 128, 256, 512, 1024)
    samples: int = 200
    const: float = 1.0
    log10_n_max: float = 60.0
    plot: bool = False
    out: str = ""

    @property
    def experiment_id(self) -> str:
        return self.name or self.kind

    def entry_distribution(self) -> EntryDistribution:
        spec = {"name": self.distribution, "sigma": self.sigma}
        if self.distribution == "two-point":
            spec["p"] = self.p
        return distribution_from_spec(spec)

    def canonical(self) -> str:
        """Canonical text form; parsing it gives back an equal config."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == "" or value == ():
                continue
            lines.append(f"{f.name} = {_render(value)}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_render(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_PARSERS = {
    "kind": str,
    "seed": int,
    "name": str,
    "distribution": str,
    "p": float,
    "sigma": float,
    "n": _ints,
    "s": int,
    "epsilon": float,
    "delta": float,
    "trials": int,
    "reference_trials": int,
    "t_grid": _floats,
    "s_grid": _ints,
    "samples": int,
    "const": float,
    "log10_n_max": float,
    "plot": _bool,
    "out": str,
}


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    for required in ("kind", "seed"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    if values["kind"] not in KINDS:
        raise ConfigError(f"unknown experiment kind {values['kind']!r}; expected one of {', '.join(KINDS)}")
    cfg = ExperimentConfig(**values)
    try:
        cfg.entry_distribution()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
