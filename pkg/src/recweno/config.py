"""Run configuration: a line-oriented ``section.key = value`` format.

Lines are ``key = value`` pairs; ``#`` starts a comment and blank lines are
ignored. Only ``problem`` is required. The accepted keys, their types and
defaults are listed in :data:`OPTIONS`. ``echo`` writes every key with its
resolved value, and parsing that text gives back an equal config.

Example::

    problem = double_mach
    problem.n = 480, 120
    scheme.kind = weno6
    scheme.weights = js
    output.formats = vtk
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from . import reconstruction as rc
from .problems import PROBLEMS, MESH_LABELS, ProblemSpec, get_problem
from .solver import Discretization, TimeControls


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the offending entry."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class UnknownKey(ConfigError):
    pass


class UnknownValue(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


# value codecs: text -> value, value -> text --------------------------------

AUTO = "auto"


def _int(text):
    return int(text)


def _float(text):
    return float(text)


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(text)


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _words(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _fmt(value) -> str:
    if value is None:
        return AUTO
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Option:
    key: str
    attr: str
    parse: object
    default: object = None
    choices: Optional[tuple] = None
    optional: bool = False  # accepts "auto" meaning "use the problem's value"
    help: str = ""


OPTIONS = (
    Option("problem", "problem", str, None, tuple(PROBLEMS), help="benchmark name (required)"),
    Option("problem.n", "n", _ints, None, optional=True, help="cells per axis, e.g. 480, 120"),
    Option("problem.t_end", "t_end", _float, None, optional=True),
    Option("problem.gamma", "gamma", _float, None, optional=True),
    Option("scheme.kind", "kind", str, "weno6", ("weno5", "weno6")),
    Option("scheme.weights", "weights", str, "js", ("linear", "js", "z")),
    Option("scheme.p", "p", _int, 2),
    Option("scheme.q", "q", _int, 2),
    Option("scheme.epsilon", "epsilon", _float, 1e-6),
    Option("scheme.flux", "flux", str, "hllc", ("hllc", "llf")),
    Option("scheme.variables", "variables", str, "characteristic", ("characteristic", "component")),
    Option("scheme.backend", "backend", str, "compiled", ("compiled", "array")),
    Option("scheme.fallback", "fallback", _bool, False, help="first-order interface fallback (opt-in)"),
    Option("time.cfl", "cfl", _float, None, optional=True),
    Option("time.dt_law", "dt_law", str, "cfl", ("cfl", "dt_equals_c_dx", "dt_equals_dx_squared")),
    Option("study.resolutions", "resolutions", _ints, (10, 20, 40, 80)),
    Option("study.schemes", "schemes", _words, ("linear", "js", "z")),
    Option("study.mesh", "mesh", str, "inverse_dx", MESH_LABELS),
    Option("study.workers", "workers", _int, 1),
    Option("reference.n", "n_ref", _ints, None, optional=True),
    Option("output.dir", "output_dir", str, None, optional=True, help="relative to the output root"),
    Option("output.formats", "formats", _words, ("csv", "vtk"), ("csv", "vtk", "slice", "snapshot")),
    Option("output.every", "every", _int, 0, help="snapshot cadence in steps; 0 writes the final state only"),
)

_BY_KEY = {o.key: o for o in OPTIONS}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run settings; build with :func:`parse_config`."""

    problem: str
    n: Optional[tuple] = None
    t_end: Optional[float] = None
    gamma: Optional[float] = None
    kind: str = "weno6"
    weights: str = "js"
    p: int = 2
    q: int = 2
    epsilon: float = 1e-6
    flux: str = "hllc"
    variables: str = "characteristic"
    backend: str = "compiled"
    fallback: bool = False
    cfl: Optional[float] = None
    dt_law: str = "cfl"
    resolutions: tuple = (10, 20, 40, 80)
    schemes: tuple = ("linear", "js", "z")
    mesh: str = "inverse_dx"
    workers: int = 1
    n_ref: Optional[tuple] = None
    output_dir: Optional[str] = None
    formats: tuple = ("csv", "vtk")
    every: int = 0

    @property
    def order(self) -> int:
        return int(self.kind[-1])

    def weight_scheme(self, kind: Optional[str] = None) -> rc.WeightScheme:
        return rc.WeightScheme(kind or self.weights, p=self.p, q=self.q, epsilon=self.epsilon)

    def discretization(self, weights: Optional[str] = None) -> Discretization:
        return Discretization(
            self.order, self.weight_scheme(weights), self.flux, self.variables, self.backend, self.fallback
        )

    def problem_spec(self) -> ProblemSpec:
        overrides = {}
        for attr in ("n", "t_end", "gamma"):
            value = getattr(self, attr)
            if value is not None:
                overrides[attr] = value
        return get_problem(self.problem, **overrides)

    def time_controls(self, spec: Optional[ProblemSpec] = None) -> TimeControls:
        spec = spec or self.problem_spec()
        cfl = spec.cfl if self.cfl is None else self.cfl
        return TimeControls(spec.t_end, cfl, self.dt_law)

    def as_dict(self) -> dict:
        return {o.key: _fmt(getattr(self, o.attr)) for o in OPTIONS}


def echo(config: RunConfig) -> str:
    """Deterministic text form; ``parse_config`` reads it back unchanged."""
    return "".join(f"{k} = {v}\n" for k, v in config.as_dict().items())


def _convert(option: Option, text: str, line):
    if option.optional and text == AUTO:
        return None
    try:
        value = option.parse(text)
    except ValueError:
        kind = getattr(option.parse, "__name__", "value").lstrip("_")
        raise TypeMismatch(f"cannot read {text!r} as {kind}", option.key, line) from None
    items = value if isinstance(value, tuple) else (value,)
    if option.choices is not None:
        for item in items:
            if item not in option.choices:
                raise UnknownValue(
                    f"{item!r} is not one of {', '.join(option.choices)}", option.key, line
                )
    return value


def _entries(text: str, origin: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", line=f"{origin}:{number}")
        key, value = (part.strip() for part in body.split("=", 1))
        yield key, value, f"{origin}:{number}"


def parse_config(source=None, overrides=(), text: Optional[str] = None) -> RunConfig:
    """Read a config file (or ``text``) and apply ``key=value`` overrides.

    Later entries win. Errors name the key and ``file:line`` (overrides are
    located as ``override:k``).
    """
    if text is None:
        if source is None:
            text, origin = "", "<none>"
        else:
            path = Path(source)
            try:
                text = path.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc.strerror}", line=str(path)) from None
            origin = str(path)
    else:
        origin = "<text>"
    entries = list(_entries(text, origin))
    entries += list(_entries("\n".join(overrides), "override"))
    values = {}
    for key, value, line in entries:
        option = _BY_KEY.get(key)
        if option is None:
            raise UnknownKey("unknown key", key, line)
        values[option.attr] = _convert(option, value, line)
    if values.get("problem") is None:
        raise MissingRequired("a problem name is required", "problem", origin)
    config = RunConfig(**values)
    _validate(config, {o.attr: line for o, line in _locate(entries)})
    return config


def _locate(entries):
    for key, _, line in entries:
        yield _BY_KEY[key], line


def _validate(config: RunConfig, lines: dict):
    def fail(cls, message, attr):
        key = next(o.key for o in OPTIONS if o.attr == attr)
        raise cls(message, key, lines.get(attr))

    spec = PROBLEMS[config.problem]
    if config.n is not None and len(config.n) not in (1, spec.dim):
        fail(TypeMismatch, f"{config.problem} needs 1 or {spec.dim} cell counts", "n")
    if config.n is not None and min(config.n) < 1:
        fail(TypeMismatch, "cell counts must be positive", "n")
    if config.cfl is not None and not 0 < config.cfl <= 1:
        fail(TypeMismatch, "cfl must lie in (0, 1]", "cfl")
    if config.t_end is not None and config.t_end < 0:
        fail(TypeMismatch, "t_end must be non-negative", "t_end")
    if config.gamma is not None and config.gamma <= 1:
        fail(TypeMismatch, "gamma must exceed 1", "gamma")
    if config.epsilon <= 0:
        fail(TypeMismatch, "epsilon must be positive", "epsilon")
    if config.p < 1 or config.q < 1:
        fail(TypeMismatch, "weight exponents must be positive", "p" if config.p < 1 else "q")
    if config.every < 0:
        fail(TypeMismatch, "snapshot cadence must be non-negative", "every")
    if config.workers < 1:
        fail(TypeMismatch, "workers must be at least 1", "workers")
    if any(b != 2 * a for a, b in zip(config.resolutions, config.resolutions[1:])):
        fail(TypeMismatch, "study resolutions must double", "resolutions")


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    """Copy of ``config`` with attribute changes, re-validated."""
    return parse_config(text=echo(replace(config, **changes)))


__all__ = [
    "ConfigError",
    "UnknownKey",
    "UnknownValue",
    "TypeMismatch",
    "MissingRequired",
    "OPTIONS",
    "RunConfig",
    "echo",
    "parse_config",
    "with_overrides",
]
