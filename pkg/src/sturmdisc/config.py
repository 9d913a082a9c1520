"""JSON run configurations for the command-line front-end.

A config is a single JSON document with a ``problems`` map plus the
parameters of one command.  Validation errors carry the JSON path of the
offending field so a bad config points at itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .expr import ExprError, PotentialExpr
from .problem import Problem


class ConfigError(Exception):
    """A validation failure, with the JSON path of the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _as_complex(value, path: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(path, "expected a number or [re, im] pair")


def problem_from_config(spec, path: str) -> Problem:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    if "q" not in spec:
        raise ConfigError(path + ".q", "missing potential expression")
    try:
        q = PotentialExpr.from_spec(spec["q"])
    except ExprError as exc:
        raise ConfigError(path + ".q", str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(path + ".q", str(exc)) from exc
    kwargs = {"q": q}
    if "h" in spec:
        kwargs["h"] = _as_complex(spec["h"], path + ".h")
    if "H" in spec:
        if spec["H"] == "dirichlet":
            kwargs["H"] = None
        else:
            kwargs["H"] = _as_complex(spec["H"], path + ".H")
    if "gamma" in spec:
        kwargs["gamma"] = _as_complex(spec["gamma"], path + ".gamma")
    for name in ("beta", "d"):
        if name in spec:
            if not isinstance(spec[name], (int, float)):
                raise ConfigError(path + "." + name, "expected a real number")
            kwargs[name] = float(spec[name])
    known = {"q", "h", "H", "beta", "gamma", "d"}
    for key in spec:
        if key not in known:
            raise ConfigError(path + "." + key, "unknown field")
    try:
        return Problem(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


@dataclass
class RunConfig:
    command: str
    problems: dict  # name -> Problem
    params: dict  # command-specific, already validated for shape
    raw: dict  # the resolved document, embedded in reports

    def problem(self, key: str, path: str) -> Problem:
        name = self.params.get(key)
        if not isinstance(name, str):
            raise ConfigError(path, "expected a problem name")
        if name not in self.problems:
            raise ConfigError(path, f"unknown problem {name!r}")
        return self.problems[name]


def load_config(path: str, command: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("$", f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be an object")
    problems_spec = doc.get("problems", {})
    if not isinstance(problems_spec, dict):
        raise ConfigError("$.problems", "expected an object")
    problems = {
        name: problem_from_config(spec, f"$.problems.{name}")
        for name, spec in problems_spec.items()
    }
    params = doc.get(command, {})
    if not isinstance(params, dict):
        raise ConfigError(f"$.{command}", "expected an object")
    return RunConfig(command=command, problems=problems, params=params, raw=doc)


def require(params: dict, key: str, path: str):
    if key not in params:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return params[key]


def get_real(params: dict, key: str, path: str, default=None) -> float:
    if key not in params:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = params[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "expected a real number")
    return float(value)


def get_int(params: dict, key: str, path: str, default=None) -> int:
    if key not in params:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = params[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "expected an integer")
    return value
