"""Run configuration: a JSON document describing model, method and outputs.

Example::

    {
      "model": {
        "domain": {"kind": "interval", "a": -1, "b": 1},
        "fitness": {"form": "quadratic", "params": {"r0": 1, "s": 1}},
        "kernel": {"form": "house-of-cards",
                   "params": {"mu": 1, "m": {"form": "constant", "params": {"r0": 0.5}}}}
      },
      "method": "nystrom",
      "levels": {"base": 0, "count": 1, "cells": 1024},
      "solver": {"tol": 1e-10, "max_iterations": 100000, "path": "direct"},
      "output": {"format": "json"}
    }

Unknown keys are rejected; omitted keys take the defaults below.
"""

import json
import numbers
from dataclasses import dataclass, field

from .discretize import METHODS
from .exceptions import ConfigError
from .model import FitnessProfile, Interval, ModelSpec, MutationKernel, RealLine

PROFILE_PARAMS = {
    "quadratic": {"r0": 1.0, "s": 1.0},
    "linear": {"r0": 0.0, "slope": 1.0},
    "constant": {"r0": 1.0},
    "gaussian": {"r0": 1.0, "s": 1.0},
    "table": {"x": None, "r": None},
}
KERNEL_PARAMS = {
    "gaussian-difference": {"mu": 1.0, "sigma": 1.0},
    "house-of-cards": {"mu": 1.0, "m": None},
    "exponential-tilted": {"gamma": 0.0, "mu": 1.0, "sigma": 1.0, "nu": 1.0},
    "regularized-gamma": {"mu": 1.0, "theta": 0.5, "d": 1.0, "eps": 1e-3},
}
POSITIVE = {"sigma", "nu", "theta", "d", "eps", "half_width"}
NON_NEGATIVE = {"mu"}

SOLVER_DEFAULTS = {"tol": 1e-10, "max_iterations": 100000, "path": "direct", "subquad": 4}
LEVEL_DEFAULTS = {"base": 0, "count": 1, "cells": 128}
OUTPUT_DEFAULTS = {"path": None, "format": None}


def _fail(key, message):
    raise ConfigError(f"{key} {message}", key=key)


def _mapping(value, key, allowed):
    if not isinstance(value, dict):
        _fail(key, "must be an object")
    unknown = sorted(set(value) - set(allowed))
    if unknown:
        _fail(f"{key}.{unknown[0]}" if key else unknown[0], "is not a recognized key")
    return value


def _number(value, key, positive=False, non_negative=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        _fail(key, "must be a number")
    if positive and not value > 0:
        _fail(key, "must be positive")
    if non_negative and value < 0:
        _fail(key, "must be non-negative")
    return float(value)


def _integer(value, key, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(key, "must be an integer")
    if value < minimum:
        _fail(key, f"must be >= {minimum}")
    return value


def _profile(spec, key):
    spec = _mapping(spec, key, ("form", "params"))
    form = spec.get("form")
    if form not in PROFILE_PARAMS:
        _fail(f"{key}.form", f"must be one of {sorted(PROFILE_PARAMS)}")
    defaults = PROFILE_PARAMS[form]
    params = _mapping(spec.get("params", {}), f"{key}.params", defaults)
    out = {}
    if form == "table":
        for name in ("x", "r"):
            seq = params.get(name)
            if not isinstance(seq, list) or len(seq) < 2:
                _fail(f"{key}.params.{name}", "must be a list of at least two numbers")
            out[name] = [_number(v, f"{key}.params.{name}") for v in seq]
        if len(out["x"]) != len(out["r"]):
            _fail(f"{key}.params", "x and r must have equal length")
        if any(b <= a for a, b in zip(out["x"], out["x"][1:])):
            _fail(f"{key}.params.x", "must be strictly increasing")
    else:
        for name, default in defaults.items():
            out[name] = _number(params.get(name, default), f"{key}.params.{name}")
    return {"form": form, "params": out}


def _kernel(spec, key):
    spec = _mapping(spec, key, ("form", "params"))
    form = spec.get("form")
    if form not in KERNEL_PARAMS:
        _fail(f"{key}.form", f"must be one of {sorted(KERNEL_PARAMS)}")
    defaults = KERNEL_PARAMS[form]
    params = _mapping(spec.get("params", {}), f"{key}.params", defaults)
    out = {}
    for name, default in defaults.items():
        pkey = f"{key}.params.{name}"
        if name == "m":
            m = params.get("m", {"form": "constant", "params": {"r0": 1.0}})
            out["m"] = _profile(m, pkey)
        else:
            out[name] = _number(
                params.get(name, default), pkey,
                positive=name in POSITIVE, non_negative=name in NON_NEGATIVE,
            )
    return {"form": form, "params": out}


def _domain(spec, key):
    if not isinstance(spec, dict):
        _fail(key, "must be an object")
    kind = spec.get("kind")
    if kind == "interval":
        spec = _mapping(spec, key, ("kind", "a", "b"))
        a = _number(spec.get("a"), f"{key}.a")
        b = _number(spec.get("b"), f"{key}.b")
        if not a < b:
            _fail(key, "needs a < b")
        return {"kind": kind, "a": a, "b": b}
    if kind == "real-line":
        spec = _mapping(spec, key, ("kind", "half_width"))
        return {"kind": kind, "half_width": _number(spec.get("half_width", 4.0), f"{key}.half_width", positive=True)}
    _fail(f"{key}.kind", "must be 'interval' or 'real-line'")


def _section(doc, name, defaults):
    raw = _mapping(doc.get(name, {}), name, defaults)
    return {k: raw.get(k, v) for k, v in defaults.items()}


@dataclass
class RunConfig:
    model: dict
    method: str
    levels: dict
    solver: dict
    output: dict
    maxp: dict = field(default_factory=lambda: {"nu": [1.0, 2.0, 4.0, 8.0, 16.0]})

    def to_dict(self):
        return {
            "model": self.model,
            "method": self.method,
            "levels": self.levels,
            "solver": self.solver,
            "output": self.output,
            "maxp": self.maxp,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def build_model(self):
        dom = self.model["domain"]
        cells = self.levels["cells"]
        if dom["kind"] == "interval":
            domain = Interval(dom["a"], dom["b"], cells)
        else:
            domain = RealLine(dom["half_width"], cells)
        return ModelSpec(domain, build_profile(self.model["fitness"]), build_kernel(self.model["kernel"]))


def build_profile(spec):
    params = spec["params"]
    if spec["form"] == "table":
        return FitnessProfile.table(params["x"], params["r"])
    return getattr(FitnessProfile, spec["form"])(**params)


def build_kernel(spec):
    form, params = spec["form"], dict(spec["params"])
    if form == "gaussian-difference":
        return MutationKernel.gaussian_difference(**params)
    if form == "house-of-cards":
        return MutationKernel.house_of_cards(params["mu"], build_profile(params["m"]))
    if form == "exponential-tilted":
        return MutationKernel.exponential_tilted(**params)
    return MutationKernel.regularized_gamma(**params)


def parse_config(text):
    """Parse and validate a JSON run configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno, column=exc.colno,
        ) from None
    doc = _mapping(doc, "", ("model", "method", "levels", "solver", "output", "maxp"))
    if "model" not in doc:
        _fail("model", "is required")
    model_doc = _mapping(doc["model"], "model", ("domain", "fitness", "kernel"))
    for name in ("domain", "fitness", "kernel"):
        if name not in model_doc:
            _fail(f"model.{name}", "is required")
    model = {
        "domain": _domain(model_doc["domain"], "model.domain"),
        "fitness": _profile(model_doc["fitness"], "model.fitness"),
        "kernel": _kernel(model_doc["kernel"], "model.kernel"),
    }

    default_method = "nystrom" if model["domain"]["kind"] == "interval" else "galerkin-sampled"
    method = doc.get("method", default_method)
    if method not in METHODS:
        _fail("method", f"must be one of {list(METHODS)}")

    levels = _section(doc, "levels", LEVEL_DEFAULTS)
    levels["base"] = _integer(levels["base"], "levels.base", 0)
    levels["count"] = _integer(levels["count"], "levels.count", 1)
    levels["cells"] = _integer(levels["cells"], "levels.cells", 1)

    solver = _section(doc, "solver", SOLVER_DEFAULTS)
    solver["tol"] = _number(solver["tol"], "solver.tol", positive=True)
    solver["max_iterations"] = _integer(solver["max_iterations"], "solver.max_iterations", 1)
    solver["subquad"] = _integer(solver["subquad"], "solver.subquad", 1)
    if solver["path"] not in ("direct", "bisection"):
        _fail("solver.path", "must be 'direct' or 'bisection'")

    output = _section(doc, "output", OUTPUT_DEFAULTS)
    if output["format"] not in (None, "csv", "json"):
        _fail("output.format", "must be 'csv' or 'json'")
    if output["path"] is not None and not isinstance(output["path"], str):
        _fail("output.path", "must be a string")

    maxp = _section(doc, "maxp", {"nu": [1.0, 2.0, 4.0, 8.0, 16.0]})
    if not isinstance(maxp["nu"], list) or not maxp["nu"]:
        _fail("maxp.nu", "must be a non-empty list")
    maxp["nu"] = [_number(v, "maxp.nu", positive=True) for v in maxp["nu"]]
    if maxp["nu"] != sorted(maxp["nu"]):
        _fail("maxp.nu", "must be ascending")

    return RunConfig(model, method, levels, solver, output, maxp)
