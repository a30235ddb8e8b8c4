"""JSON experiment configuration.

Example::

    {
      "variant": "toffoli",
      "control_measurement": true,
      "r_prep": "0",
      "u_ctrl": "+",
      "r_prot": {"axis": "X"},
      "epsilon": {"start": 0, "stop": "pi/2", "num": 10},
      "alpha": {"start": 0, "stop": "pi", "num": 20},
      "shots": 8192,
      "seed": 7
    }

``r_prep`` is a Pauli-eigenstate label (0, 1, +, -, +i, -i) or
``{"axis": ..., "angle": ...}``.  ``u_ctrl`` is a label, ``"follow"`` or a
2x2 matrix of ``[re, im]`` pairs.  Grids are a single angle, a list of
angles or a ``start/stop/num`` range (endpoints included).  Angles are numbers
or arithmetic over numbers and ``pi`` (``"pi/2"``, ``"3*pi/4"``, ``"-pi/18"``).
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from dataclasses import dataclass

from .errors import ConfigError, InvalidArgument
from .protocol import PREP_ROTATIONS, ExperimentConfig, default_alpha_grid, default_eps_grid

KEYS = {"variant", "control_measurement", "r_prep", "u_ctrl", "r_prot", "epsilon", "alpha", "shots", "seed"}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_angle(value):
    """Number, or a string expression over numbers, ``pi`` and + - * /."""
    if isinstance(value, bool):
        raise ValueError("booleans are not angles")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse angle {value!r}") from exc
        out = float(_eval(tree.body, value))
    else:
        raise ValueError(f"angle must be a number or string, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ValueError(f"angle {value!r} is not finite")
    return out


def _eval(node, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, src), _eval(node.right, src))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval(node.operand, src))
    raise ValueError(f"disallowed expression in angle {src!r}")


def parse_grid(value):
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra or "num" not in value:
            raise ValueError("range needs keys start, stop, num")
        num = value["num"]
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            raise ValueError("num must be a positive integer")
        start, stop = parse_angle(value.get("start", 0)), parse_angle(value["stop"])
        if num == 1:
            return [start]
        return [start + (stop - start) * k / (num - 1) for k in range(num)]
    if isinstance(value, list):
        if not value:
            raise ValueError("grid is empty")
        return [parse_angle(v) for v in value]
    return [parse_angle(value)]


@dataclass(frozen=True)
class Settings:
    """Resolved configuration: a template point plus the sweep grids."""

    template: ExperimentConfig
    eps_grid: tuple
    alpha_grid: tuple

    def to_dict(self):
        d = self.template.to_dict()
        d.pop("epsilon")
        d["r_prot"] = {"axis": self.template.r_prot[0]}
        d["epsilon"] = list(self.eps_grid)
        d["alpha"] = list(self.alpha_grid)
        return d


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(source, text, field, msg):
    line = _line_of(text, field.split(".")[0])
    where = f"{source}:{line}" if line else source
    raise ConfigError(f"{where}: field '{field}': {msg}")


def settings_from_dict(data, source="<config>", text=None):
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = sorted(set(data) - KEYS)
    if unknown:
        _fail(source, text, unknown[0], "unknown key")

    def field(name, fn):
        try:
            return fn(data[name])
        except (ValueError, TypeError, KeyError) as exc:
            _fail(source, text, name, str(exc))

    kwargs = {}
    if "r_prep" in data:
        kwargs["r_prep"] = field("r_prep", _parse_rotation_or_label)
    if "u_ctrl" in data:
        kwargs["u_ctrl"] = field("u_ctrl", _parse_u_ctrl)
    prot_axis = "X"
    if "r_prot" in data:
        prot_axis = field("r_prot", _parse_prot_axis)
    for key in ("variant",):
        if key in data:
            kwargs[key] = field(key, _str)
    if "control_measurement" in data:
        kwargs["control_measurement"] = field("control_measurement", _bool)
    if "shots" in data:
        kwargs["shots"] = field("shots", _shots)
    if "seed" in data:
        kwargs["seed"] = field("seed", _int)
    eps_grid = field("epsilon", parse_grid) if "epsilon" in data else default_eps_grid()
    alpha_grid = field("alpha", parse_grid) if "alpha" in data else default_alpha_grid()
    try:
        template = ExperimentConfig(epsilon=eps_grid[0], r_prot=(prot_axis, alpha_grid[0]), **kwargs)
        for e in eps_grid:
            for a in alpha_grid:
                template.at(e, a)
    except InvalidArgument as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return Settings(template, tuple(eps_grid), tuple(alpha_grid))


def load_settings(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return settings_from_dict(data, str(path), text)


def _str(v):
    if not isinstance(v, str):
        raise ValueError("expected a string")
    return v


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError("expected true or false")
    return v


def _int(v):
    if not isinstance(v, int) or isinstance(v, bool):
        raise ValueError("expected an integer")
    return v


def _shots(v):
    if v is None:
        return None
    v = _int(v)
    if v < 1:
        raise ValueError("shots must be >= 1")
    return v


def _parse_rotation_or_label(v):
    if isinstance(v, str):
        if v not in PREP_ROTATIONS:
            raise ValueError(f"unknown preparation label {v!r}")
        return PREP_ROTATIONS[v]
    if isinstance(v, dict) and set(v) <= {"axis", "angle"} and "axis" in v:
        axis = _str(v["axis"]).upper()
        if axis not in ("X", "Y", "Z"):
            raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
        return (axis, parse_angle(v.get("angle", 0)))
    raise ValueError("expected a preparation label or {axis, angle}")


def _parse_prot_axis(v):
    if isinstance(v, str):
        v = {"axis": v}
    if not isinstance(v, dict) or "axis" not in v or set(v) - {"axis"}:
        raise ValueError("expected {\"axis\": X|Y|Z}; angles come from the alpha grid")
    axis = _str(v["axis"]).upper()
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    return axis


def _parse_u_ctrl(v):
    if isinstance(v, str):
        return v
    if isinstance(v, list) and len(v) == 2 and all(isinstance(r, list) and len(r) == 2 for r in v):
        return [[complex(float(z[0]), float(z[1])) for z in row] for row in v]
    raise ValueError("expected a label, 'follow' or a 2x2 matrix of [re, im] pairs")
