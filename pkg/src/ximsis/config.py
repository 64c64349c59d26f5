"""YAML scenario files for the simulation harness.

Schema (every key optional when ``preset`` supplies it)::

    preset: example1-n200-cr30   # start from a built-in design
    model: cox                   # cox | transformation | aft | nonlinear
    n: 200
    p: 2000
    covariance: ar1              # ar1 | cs
    rho: 0.6
    target_cr: 0.3
    seed: 20240101
    beta: [0.35, 0.35, 0.35, 0.35, 0.35]   # leading coefficients, cox/transformation
    baseline_hazard: 0.5
    n_reps: 500
    m_variants: [sqrt-1, sqrt, sqrt+1]
    model_sizes: [38, 199]       # default: ceil(n / ln n) and n - 1
    quick:                       # overrides applied with --quick
      n_reps: 100
      p: 500
"""

from __future__ import annotations

from dataclasses import fields, replace
from pathlib import Path

import yaml

from .experiment import DEFAULT_VARIANTS, ExperimentSpec
from .simgen import SimScenario, preset

__all__ = ["QUICK_DEFAULTS", "load_config", "spec_from_dict"]

QUICK_DEFAULTS = {"n_reps": 100, "p": 500}

_SCENARIO_KEYS = {f.name for f in fields(SimScenario)}
_SPEC_KEYS = {"n_reps", "m_variants", "model_sizes", "workers"}
_KNOWN = _SCENARIO_KEYS | _SPEC_KEYS | {"preset", "quick"}


def spec_from_dict(raw: dict, quick: bool = False, name: str = "") -> ExperimentSpec:
    """Build an ExperimentSpec from a parsed config mapping."""
    if not isinstance(raw, dict):
        raise ValueError("config must be a mapping")
    unknown = set(raw) - _KNOWN
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    raw = dict(raw)
    if quick:
        overrides = raw.get("quick") or QUICK_DEFAULTS
        bad = set(overrides) - (_SCENARIO_KEYS | _SPEC_KEYS)
        if bad:
            raise ValueError(f"unknown quick keys: {sorted(bad)}")
        raw.update(overrides)
    raw.pop("quick", None)

    scen_kw = {k: raw[k] for k in _SCENARIO_KEYS if k in raw}
    if "beta" in scen_kw:
        scen_kw["beta"] = tuple(float(b) for b in scen_kw["beta"])
    base = raw.get("preset")
    if base is not None:
        scenario = replace(preset(str(base)), **scen_kw)
    else:
        missing = {"model", "n", "p", "covariance", "rho", "target_cr"} - set(scen_kw)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        scenario = SimScenario(**scen_kw)
    if not scenario.name:
        scenario = replace(scenario, name=name or str(base or scenario.model))

    return ExperimentSpec(
        scenario=scenario,
        n_reps=int(raw.get("n_reps", 500)),
        m_variants=tuple(raw.get("m_variants") or DEFAULT_VARIANTS),
        model_sizes=raw.get("model_sizes"),
        workers=raw.get("workers"),
    )


def load_config(path, quick: bool = False) -> ExperimentSpec:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    raw = yaml.safe_load(path.read_text()) or {}
    return spec_from_dict(raw, quick=quick, name=path.stem)
