"""Experiment configuration: flat ``key = value`` text with ``[section]`` headers.

See ``docs/config.md`` for the grammar.  Parsing goes through
:mod:`configparser`; unknown sections or keys are rejected so that a typo
cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from ..convolve import ThetaVector
from ..exponents import Exponent
from ..grid import TorusGrid
from ..kernels import KernelSpec, kernel_from_params

ALL_CHECKS = (
    "bconst",
    "young",
    "claim21",
    "duality",
    "case1",
    "case2prefix",
    "theorem1",
    "vertices",
    "hull",
)

DEFAULTS = {
    "grid": {"d": "1", "L": "4", "n": "64"},
    "kernel": {"name": "bump", "radius": "1", "order": "inf"},
    "theta": {"values": "1, 2", "young": "1, 2, 3"},
    "exponents": {
        "p": "4, 4",
        "case2": "2, 2",
        "young": "3, 3, 3",
        "r": "2",
        "hull_q": "3/2",
    },
    "run": {
        "seed": "0",
        "instances": "20",
        "bandlimit": "3",
        "lattice_radius": "16",
        "cube_truncation": "10",
        "checks": ", ".join(ALL_CHECKS),
        "family": "localized",
        "slack": "1e-9",
        "duality_tol": "1e-8",
        "spectral_tol": "1e-10",
    },
}

_KERNEL_KEYS = {"name", "a", "sigma", "radius", "order"}


class ConfigError(ValueError):
    pass


def _csv(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    grid: TorusGrid
    kernel: KernelSpec
    theta: ThetaVector
    ps: tuple
    case2_ps: tuple
    young_theta: ThetaVector
    young_ps: tuple
    r: Exponent
    hull_q: Exponent
    seed: int
    instances: int
    bandlimit: int
    lattice_radius: int
    cube_truncation: int
    checks: tuple
    family: str
    slack: float
    duality_tol: float
    spectral_tol: float
    sections: dict = field(default_factory=dict, compare=False, repr=False)

    def canonical_text(self) -> str:
        """One ``section.key=value`` line per setting, sorted; the digest input."""
        lines = []
        for sec in sorted(self.sections):
            for key in sorted(self.sections[sec]):
                value = " ".join(self.sections[sec][key].split())
                lines.append(f"{sec}.{key}={value}")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Return a copy with ``[run]`` settings replaced; keeps the digest honest."""
        return self.with_settings({f"run.{k}": v for k, v in changes.items()})

    def with_settings(self, changes: dict) -> "ExperimentConfig":
        """Copy with ``{"section.key": value}`` replacements (``None`` values skipped)."""
        parsed = {k: dict(v) for k, v in self.sections.items()}
        name = changes.get("kernel.name")
        if name is not None and str(name).strip().lower() != parsed["kernel"]["name"].strip().lower():
            parsed["kernel"] = {}  # parameters of the old kernel do not carry over
        for dotted, value in changes.items():
            if value is None:
                continue
            sec, _, key = dotted.partition(".")
            if not key:
                raise ConfigError(f"expected section.key, got {dotted!r}")
            if isinstance(value, (list, tuple)):
                value = ", ".join(str(v) for v in value)
            parsed.setdefault(sec, {})[key] = str(value)
        return from_sections(_merge(parsed))


def _merge(parsed: dict) -> dict:
    merged = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for sec, vals in parsed.items():
        if sec not in merged:
            raise ConfigError(f"unknown section [{sec}]")
        if sec == "kernel":
            if "name" in vals and vals["name"].strip().lower() != merged["kernel"]["name"]:
                merged["kernel"] = {}
            bad = set(vals) - _KERNEL_KEYS
        else:
            bad = set(vals) - set(DEFAULTS[sec])
        if bad:
            raise ConfigError(f"unknown keys in [{sec}]: {sorted(bad)}")
        merged[sec].update(vals)
    return merged


def from_sections(sections: dict) -> ExperimentConfig:
    s = sections
    try:
        grid = TorusGrid(int(s["grid"]["d"]), int(s["grid"]["L"]), int(s["grid"]["n"]))
        kparams = {k: v for k, v in s["kernel"].items() if k != "name"}
        kernel = kernel_from_params(s["kernel"]["name"], kparams)
        theta = ThetaVector(_csv(s["theta"]["values"]))
        young_theta = ThetaVector(_csv(s["theta"]["young"]))
        ex = s["exponents"]
        ps = tuple(Exponent.of(p) for p in _csv(ex["p"]))
        case2 = tuple(Exponent.of(p) for p in _csv(ex["case2"]))
        young = tuple(Exponent.of(p) for p in _csv(ex["young"]))
        run = s["run"]
        checks = tuple(_csv(run["checks"]))
        cfg = ExperimentConfig(
            grid=grid,
            kernel=kernel,
            theta=theta,
            ps=ps,
            case2_ps=case2,
            young_theta=young_theta,
            young_ps=young,
            r=Exponent.of(ex["r"]),
            hull_q=Exponent.of(ex["hull_q"]),
            seed=int(run["seed"]),
            instances=int(run["instances"]),
            bandlimit=int(run["bandlimit"]),
            lattice_radius=int(run["lattice_radius"]),
            cube_truncation=int(run["cube_truncation"]),
            checks=checks,
            family=run["family"].strip().lower(),
            slack=float(run["slack"]),
            duality_tol=float(run["duality_tol"]),
            spectral_tol=float(run["spectral_tol"]),
            sections=s,
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    unknown = set(cfg.checks) - set(ALL_CHECKS)
    if unknown:
        raise ConfigError(f"unknown checks: {sorted(unknown)}")
    if len(cfg.ps) != cfg.theta.m or len(cfg.case2_ps) != cfg.theta.m:
        raise ConfigError("exponent tuples p and case2 must have one entry per θ value")
    if len(cfg.young_ps) != cfg.young_theta.m:
        raise ConfigError("exponents.young must have one entry per theta.young value")
    if cfg.family not in {"localized", "trig"}:
        raise ConfigError(f"unknown family {cfg.family!r}")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case (``L``)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    parsed = {sec: dict(parser[sec]) for sec in parser.sections()}
    return from_sections(_merge(parsed))


def load_config(path: Union[str, Path, None]) -> ExperimentConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text(encoding="utf-8"))
