"""Declarative run configuration: one INI-style file drives every command.

The emitted text round-trips exactly (parse(emit(c)) == c) because all
floats are written with 17 significant digits; that makes a checked-in
config plus its outputs a reproducible experiment.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from io import StringIO

from .geometry import MoebiusMap, Polynomial
from .nevanlinna import NevanlinnaSpec
from .utils import fmt_float

__all__ = ["ConfigError", "RunConfig", "default_config", "emit_config",
           "load_config", "parse_config"]


class ConfigError(Exception):
    """Malformed or inconsistent configuration (exit code 2 territory)."""


@dataclass(frozen=True)
class RunConfig:
    coeffs: tuple[complex, ...]
    moebius: tuple[complex, complex, complex, complex]
    basepoint: complex = 0j
    ode_tol: float = 1e-12
    census_radius: float = 20.0
    R: float = 10.0
    window: tuple[float, float, float, float] = (-8.0, 8.0, -8.0, 8.0)
    nx: int = 200
    ny: int = 200
    n_steps: int = 6
    r_ladder: tuple[float, ...] = (1e2, 1e3, 1e4)
    alphabet_sizes: tuple[int, ...] = (100, 1000, 10000)
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           tuple(complex(c) for c in self.coeffs))
        object.__setattr__(self, "moebius",
                           tuple(complex(c) for c in self.moebius))
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        object.__setattr__(self, "window",
                           tuple(float(v) for v in self.window))
        object.__setattr__(self, "r_ladder",
                           tuple(float(v) for v in self.r_ladder))
        object.__setattr__(self, "alphabet_sizes",
                           tuple(int(v) for v in self.alphabet_sizes))
        if len(self.moebius) != 4:
            raise ConfigError("moebius needs exactly 4 entries")
        if self.census_radius <= 0 or self.R <= 0 or self.ode_tol <= 0:
            raise ConfigError("radii and tolerance must be positive")
        if self.nx < 1 or self.ny < 1 or self.n_steps < 1:
            raise ConfigError("grid resolution and step count must be >= 1")
        if any(R <= 0 for R in self.r_ladder):
            raise ConfigError("ladder radii must be positive")
        if any(s < 1 for s in self.alphabet_sizes):
            raise ConfigError("alphabet sizes must be >= 1")
        try:
            MoebiusMap(*self.moebius)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if Polynomial(self.coeffs).is_zero:
            raise ConfigError("coefficient polynomial must be nonzero")

    def spec(self) -> NevanlinnaSpec:
        return NevanlinnaSpec(Polynomial(self.coeffs),
                              MoebiusMap(*self.moebius),
                              self.basepoint, ode_tol=self.ode_tol)


def default_config() -> RunConfig:
    # tangent function: w'' + w = 0 with the w2/w1 = sin/cos Moebius choice
    return RunConfig(coeffs=(1.0,), moebius=(0.0, 1.0, 1.0, 0.0),
                     window=(30.0, 40.0, -1.0, 1.0), nx=200, ny=40,
                     n_steps=4)


def _c_text(z: complex) -> str:
    return f"{fmt_float(z.real)} {fmt_float(z.imag)}"


def _c_parse(text: str) -> complex:
    parts = text.split()
    if len(parts) != 2:
        raise ConfigError(f"expected 're im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _list_text(values, one) -> str:
    return ", ".join(one(v) for v in values)


def _list_parse(text: str, one):
    items = [chunk.strip() for chunk in text.split(",") if chunk.strip()]
    return tuple(one(item) for item in items)


def emit_config(cfg: RunConfig) -> str:
    parser = configparser.ConfigParser()
    parser["function"] = {
        "coeffs": _list_text(cfg.coeffs, _c_text),
        "moebius": _list_text(cfg.moebius, _c_text),
        "basepoint": _c_text(cfg.basepoint),
        "ode_tol": fmt_float(cfg.ode_tol),
    }
    parser["census"] = {"radius": fmt_float(cfg.census_radius)}
    parser["escape"] = {
        "r": fmt_float(cfg.R),
        "window": _list_text(cfg.window, fmt_float),
        "nx": str(cfg.nx),
        "ny": str(cfg.ny),
        "n_steps": str(cfg.n_steps),
    }
    parser["dimension"] = {
        "r_ladder": _list_text(cfg.r_ladder, fmt_float),
        "alphabet_sizes": _list_text(cfg.alphabet_sizes, str),
    }
    parser["run"] = {"out_dir": cfg.out_dir, "seed": str(cfg.seed)}
    out = StringIO()
    parser.write(out)
    return out.getvalue()


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparsable config: {exc}") from exc
    try:
        fn = parser["function"]
        cfg = default_config()
        cfg = replace(
            cfg,
            coeffs=_list_parse(fn["coeffs"], _c_parse),
            moebius=_list_parse(fn["moebius"], _c_parse),
            basepoint=_c_parse(fn.get("basepoint", "0 0")),
            ode_tol=float(fn.get("ode_tol", "1e-12")),
        )
        if parser.has_section("census"):
            cfg = replace(cfg, census_radius=float(parser["census"]["radius"]))
        if parser.has_section("escape"):
            esc = parser["escape"]
            cfg = replace(
                cfg,
                R=float(esc.get("r", str(cfg.R))),
                window=_list_parse(esc.get("window",
                                           _list_text(cfg.window, fmt_float)),
                                   float),
                nx=int(esc.get("nx", str(cfg.nx))),
                ny=int(esc.get("ny", str(cfg.ny))),
                n_steps=int(esc.get("n_steps", str(cfg.n_steps))),
            )
        if parser.has_section("dimension"):
            dim = parser["dimension"]
            cfg = replace(
                cfg,
                r_ladder=_list_parse(
                    dim.get("r_ladder", _list_text(cfg.r_ladder, fmt_float)),
                    float),
                alphabet_sizes=_list_parse(
                    dim.get("alphabet_sizes",
                            _list_text(cfg.alphabet_sizes, str)), int),
            )
        if parser.has_section("run"):
            run = parser["run"]
            cfg = replace(cfg, out_dir=run.get("out_dir", cfg.out_dir),
                          seed=int(run.get("seed", str(cfg.seed))))
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if len(cfg.window) != 4:
        raise ConfigError("window needs exactly 4 entries")
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
