"""Line-oriented experiment configs.

Format: one `section.key = value` per line, `#` starts a comment.  Sections
and keys come from a fixed registry; unknown names are errors that carry the
offending line number.  Scalar values accept pi-expressions like `3pi/2`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..domains import TrigPoly
from ..errors import ConfigError

__all__ = ["Config", "parse_config", "parse_config_text", "resolve_config",
           "profile_from_text", "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = ("mesh", "solve", "converge", "hardy", "stability",
                    "geometry-check", "norms-check")

# section -> key -> value kind
REGISTRY: dict[str, dict[str, str]] = {
    "experiment": {"kind": "str", "levels": "int", "L0": "int", "problem": "str",
                   "seed": "int", "samples": "int", "field": "str"},
    "domain": {"template": "str", "omega": "float", "alpha": "float",
               "b": "floats", "depth": "float", "profile0": "profile",
               "profile1": "profile", "dirichlet": "names"},
    "weight": {"lam": "float", "lambdas": "floats", "epsilon": "float",
               "s": "floats", "f_lam": "float"},
    "mesh": {"H": "float", "kappa": "float", "L": "int", "sigma": "float",
             "n": "int", "mode": "str", "theta_min": "float"},
    "fem": {"degree": "int", "quad_degree": "int", "solver": "str",
            "tol": "float", "workers": "int"},
    "output": {"dir": "str"},
}

_PI_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/((?:\d+\.?\d*|\.\d+)))?$")
_LINE_RE = re.compile(r"^([a-z][a-z\-]*)\.([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*)$")
_PROFILE_TERM_RE = re.compile(r"^(const|sin(\d+)|cos(\d+))$")


def parse_scalar(text: str, line: int | None = None) -> float:
    """A float literal or a pi-expression: `pi`, `3pi/2`, `-0.5pi`, `pi/4`."""
    t = text.strip().lower().replace(" ", "")
    m = _PI_RE.match(t)
    if m:
        head = m.group(1)
        if head in ("", "+"):
            coef = 1.0
        elif head == "-":
            coef = -1.0
        else:
            coef = float(head)
        value = coef * math.pi
        if m.group(2):
            value /= float(m.group(2))
        return value
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a number", line) from None


def _parse_profile(text: str, line: int | None) -> TrigPoly:
    """`const:3pi/4, sin1:0.2, cos2:-0.05` -> TrigPoly."""
    const = 0.0
    cos_terms: dict[int, float] = {}
    sin_terms: dict[int, float] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"profile term {part!r} needs the form name:value", line)
        name, _, val = part.partition(":")
        name = name.strip().lower()
        m = _PROFILE_TERM_RE.match(name)
        if not m:
            raise ConfigError(
                f"unknown profile term {name!r} (use const, sinK, cosK)", line
            )
        coeff = parse_scalar(val, line)
        if name == "const":
            const = coeff
        elif name.startswith("sin"):
            sin_terms[int(m.group(2))] = coeff
        else:
            cos_terms[int(m.group(3))] = coeff
    k_max_sin = max(sin_terms, default=0)
    k_max_cos = max(cos_terms, default=0)
    return TrigPoly(
        const,
        tuple(cos_terms.get(k, 0.0) for k in range(1, k_max_cos + 1)),
        tuple(sin_terms.get(k, 0.0) for k in range(1, k_max_sin + 1)),
    )


def profile_from_text(text: str) -> TrigPoly:
    """Rebuild a boundary profile from its config-file text."""
    return _parse_profile(text, None)


def _parse_value(kind: str, raw: str, line: int):
    if kind == "float":
        return parse_scalar(raw, line)
    if kind == "int":
        try:
            return int(raw.strip())
        except ValueError:
            raise ConfigError(f"cannot parse {raw!r} as an integer", line) from None
    if kind == "str":
        return raw.strip()
    if kind == "floats":
        return tuple(parse_scalar(p, line) for p in raw.split(",") if p.strip())
    if kind == "names":
        t = raw.strip()
        if t == "all":
            return "all"
        return tuple(p.strip() for p in t.split(",") if p.strip())
    if kind == "profile":
        return _parse_profile(raw, line)
    raise ConfigError(f"internal: unknown value kind {kind}", line)


@dataclass
class Config:
    path: str
    values: dict = field(default_factory=dict)   # section -> key -> parsed
    raw: dict = field(default_factory=dict)      # section -> key -> source text
    lines: dict = field(default_factory=dict)    # (section, key) -> line number

    def get(self, section: str, key: str, default=None):
        return self.values.get(section, {}).get(key, default)

    def line_of(self, section: str, key: str) -> int | None:
        return self.lines.get((section, key))


def parse_config_text(text: str, path: str = "<config>") -> Config:
    cfg = Config(path)
    for lineno, full_line in enumerate(text.splitlines(), start=1):
        line = full_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise ConfigError(f"expected `section.key = value`, got {line!r}", lineno)
        section, key, raw = m.group(1), m.group(2), m.group(3).strip()
        if section not in REGISTRY:
            raise ConfigError(
                f"unknown section {section!r} (known: {', '.join(sorted(REGISTRY))})",
                lineno,
            )
        if key not in REGISTRY[section]:
            raise ConfigError(
                f"unknown key {section}.{key} "
                f"(known keys: {', '.join(sorted(REGISTRY[section]))})",
                lineno,
            )
        if (section, key) in cfg.lines:
            raise ConfigError(f"duplicate key {section}.{key}", lineno)
        cfg.values.setdefault(section, {})[key] = _parse_value(
            REGISTRY[section][key], raw, lineno
        )
        cfg.raw.setdefault(section, {})[key] = raw
        cfg.lines[(section, key)] = lineno
    return cfg


def parse_config(path) -> Config:
    with open(path) as fh:
        return parse_config_text(fh.read(), str(path))


_DEFAULT_LEVELS = {"converge": 6, "hardy": 6, "stability": 5, "norms-check": 4}


def resolve_config(cfg: Config, kind: str | None = None,
                   levels: int | None = None, out: str | None = None) -> dict:
    """Fill defaults, validate requirements, and return the echoable config.

    kind/levels/out override the file (CLI flags win).  The returned dict is
    JSON-serializable: profiles echo as their source text.
    """
    file_kind = cfg.get("experiment", "kind")
    if kind is not None and file_kind is not None and kind != file_kind:
        raise ConfigError(
            f"experiment.kind = {file_kind!r} conflicts with subcommand {kind!r}",
            cfg.line_of("experiment", "kind"),
        )
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("experiment.kind is not set and no subcommand given")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"unknown experiment kind {kind!r} (known: {', '.join(EXPERIMENT_KINDS)})",
            cfg.line_of("experiment", "kind"),
        )

    template = cfg.get("domain", "template")
    if template is None:
        raise ConfigError("domain.template is required")
    if template not in ("sector", "cusp", "oscillating", "circle-cusp"):
        raise ConfigError(f"unknown domain template {template!r}",
                          cfg.line_of("domain", "template"))

    tline = cfg.line_of("domain", "template")
    domain: dict = {"template": template}
    if template == "sector":
        omega = cfg.get("domain", "omega")
        if omega is None:
            raise ConfigError("sector template requires domain.omega", tline)
        domain["omega"] = omega
    elif template == "cusp":
        alpha = cfg.get("domain", "alpha")
        if alpha is None:
            raise ConfigError("cusp template requires domain.alpha", tline)
        domain["alpha"] = alpha
        domain["b"] = list(cfg.get("domain", "b", (-1.0, 1.0)))
        if len(domain["b"]) != 2:
            raise ConfigError("domain.b needs exactly two values",
                              cfg.line_of("domain", "b"))
    elif template == "oscillating":
        for key in ("profile0", "profile1"):
            if cfg.get("domain", key) is None:
                raise ConfigError(f"oscillating template requires domain.{key}", tline)
        domain["profile0"] = cfg.raw["domain"]["profile0"]
        domain["profile1"] = cfg.raw["domain"]["profile1"]
        domain["depth"] = cfg.get("domain", "depth", 5.0)
    dirichlet = cfg.get("domain", "dirichlet", "all")
    domain["dirichlet"] = dirichlet if dirichlet == "all" else list(dirichlet)

    # lam = None means "template default" (1 for sector, alpha for cusp)
    lam = cfg.get("weight", "lam")
    weight = {
        "lam": lam,
        "lambdas": list(cfg.get("weight", "lambdas",
                                (lam if lam is not None else 1.0,))),
        "epsilon": cfg.get("weight", "epsilon", 0.0),
        "s": list(cfg.get("weight", "s", (0.0,))),
        "f_lam": cfg.get("weight", "f_lam", 1.0),
    }

    mode = cfg.get("mesh", "mode", "sized")
    if mode not in ("sized", "fixed-n"):
        raise ConfigError(f"mesh.mode must be sized or fixed-n, got {mode!r}",
                          cfg.line_of("mesh", "mode"))
    mesh = {
        "H": cfg.get("mesh", "H", 0.25),
        "kappa": cfg.get("mesh", "kappa", 1.0),
        "L": cfg.get("mesh", "L", 8),
        "sigma": cfg.get("mesh", "sigma", 0.5),
        "n": cfg.get("mesh", "n"),
        "mode": mode,
        "theta_min": cfg.get("mesh", "theta_min", 15.0),
    }

    solver = cfg.get("fem", "solver", "auto")
    if solver not in ("auto", "cg", "cholesky"):
        raise ConfigError(f"fem.solver must be auto, cg or cholesky, got {solver!r}",
                          cfg.line_of("fem", "solver"))
    degree = cfg.get("fem", "degree", 1)
    if degree not in (1, 2):
        raise ConfigError(f"fem.degree must be 1 or 2, got {degree}",
                          cfg.line_of("fem", "degree"))
    workers = cfg.get("fem", "workers", 1)
    if workers < 1:
        raise ConfigError(f"fem.workers must be >= 1, got {workers}",
                          cfg.line_of("fem", "workers"))
    fem = {
        "degree": degree,
        "quad_degree": cfg.get("fem", "quad_degree", 4),
        "solver": solver,
        "tol": cfg.get("fem", "tol", 1e-10),
        "workers": workers,
    }

    n_levels = levels if levels is not None else cfg.get(
        "experiment", "levels", _DEFAULT_LEVELS.get(kind, 5))
    if kind in ("converge", "hardy", "stability", "norms-check") and n_levels < 3:
        raise ConfigError(f"{kind} needs at least 3 levels, got {n_levels}",
                          cfg.line_of("experiment", "levels"))
    if kind == "converge" and n_levels < 4:
        raise ConfigError(f"converge needs at least 4 levels, got {n_levels}",
                          cfg.line_of("experiment", "levels"))
    experiment = {
        "kind": kind,
        "levels": n_levels,
        "L0": cfg.get("experiment", "L0", 6),
        "problem": cfg.get("experiment", "problem", "corner"),
        "seed": cfg.get("experiment", "seed", 0),
        "samples": cfg.get("experiment", "samples", 1000),
        "field": cfg.get("experiment", "field", "identity"),
    }

    return {
        "experiment": experiment,
        "domain": domain,
        "weight": weight,
        "mesh": mesh,
        "fem": fem,
        "output": {"dir": out if out is not None else cfg.get("output", "dir", "out")},
    }
