"""Flat key=value run configuration.

One `key = value` pair per line, `#` starts a comment, blank lines are
skipped. Keys are validated against the schema below; unknown keys and
malformed values report the offending line. kernel.delta is the only
required key, everything else has a default.
"""

import numpy as np

from .kernels import EUCLIDEAN_NORM, INF_NORM, default_kernel
from .mesh import circle_polyline
from .optimizer import LineSearchParams, OptimizerOptions
from .system import ProblemConfig

__all__ = ["ConfigError", "SCHEMA", "parse_config", "default_config",
           "problem_from_config", "optimizer_options_from_config",
           "line_search_params_from_config", "target_polyline",
           "initial_polyline", "check_t_values"]


class ConfigError(Exception):
    pass


_REQUIRED = object()


def _float(s):
    return float(s)


def _int(s):
    v = int(s)
    return v


def _pair(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError("expected two comma separated numbers")
    return (float(parts[0]), float(parts[1]))


def _float_list(s):
    parts = [p.strip() for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma separated number list")
    return tuple(float(p) for p in parts)


def _enum(*allowed):
    def conv(s):
        if s not in allowed:
            raise ValueError("must be one of %s" % ", ".join(allowed))
        return s
    return conv


def _onoff(s):
    if s not in ("on", "off"):
        raise ValueError("must be on or off")
    return s == "on"


# key -> (converter, default); _REQUIRED marks keys without a default
SCHEMA = {
    "kernel.delta": (_float, _REQUIRED),
    "kernel.norm": (_enum(INF_NORM, EUCLIDEAN_NORM), INF_NORM),
    "kernel.preset": (_enum("default", "paper", "custom"), "default"),
    "kernel.phi1_scale": (_float, 1e-3),
    "kernel.phi2_scale": (_float, 100.0),
    "kernel.ramp": (_float, 0.05),
    "quad.outer_order": (_int, 5),
    "quad.inner_order": (_int, 5),
    "assembly.parallel": (_onoff, False),
    "assembly.backend": (_enum("auto", "python", "compiled"), "auto"),
    "problem.eps": (_float, 1e-4),
    "problem.f1": (_float, 100.0),
    "problem.f2": (_float, 1.0),
    "problem.nu": (_float, 0.0),
    "lame.mu_min": (_float, 0.0),
    "lame.mu_max": (_float, 20.0),
    "lame.lambda": (_float, 0.0),
    "target.center": (_pair, (0.5, 0.5)),
    "target.radius": (_float, 0.25),
    "target.n_points": (_int, 16),
    "init.center": (_pair, (0.45, 0.45)),
    "init.radius": (_float, 0.2),
    "init.n_points": (_int, 16),
    "mesh.n": (_int, 28),
    "mesh.n_fine": (_int, 0),
    "mesh.coarse_iters": (_int, 0),
    "data.n": (_int, 42),
    "opt.tol": (_float, 1e-6),
    "opt.max_iter": (_int, 100),
    "opt.memory": (_int, 15),
    "opt.max_restarts": (_int, 3),
    "ls.alpha0": (_float, 1.0),
    "ls.tau": (_float, 0.5),
    "ls.c": (_float, 0.99),
    "ls.n_up": (_int, 1),
    "ls.n_down": (_int, 4),
    "ls.n_restart": (_int, 8),
    "ls.c_up": (_float, 1.2),
    "ls.c_down": (_float, 0.8),
    "ls.alpha_min": (_float, 1e-12),
    "rng.seed": (_int, 0),
    "check.n_fields": (_int, 5),
    "check.t_values": (_float_list, (1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-3,
                                     5e-4, 2.5e-4, 1e-4)),
}


def default_config():
    """Defaults for every key that has one (kernel.delta stays absent)."""
    return {k: d for k, (_, d) in SCHEMA.items() if d is not _REQUIRED}


def parse_config(path):
    values = default_config()
    seen = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected key = value" % (path, lineno))
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in SCHEMA:
                raise ConfigError("%s:%d: unknown key %r" % (path, lineno, key))
            if key in seen:
                raise ConfigError("%s:%d: duplicate key %r" % (path, lineno, key))
            seen.add(key)
            conv, _default = SCHEMA[key]
            try:
                values[key] = conv(val)
            except ValueError as exc:
                raise ConfigError("%s:%d: bad value for %s: %s"
                                  % (path, lineno, key, exc)) from None
    missing = [k for k, (_, d) in SCHEMA.items()
               if d is _REQUIRED and k not in values]
    if missing:
        raise ConfigError("%s: missing required key(s): %s"
                          % (path, ", ".join(missing)))
    _validate(values, path)
    return values


def _validate(c, path):
    if not (c["kernel.delta"] > 0.0):
        raise ConfigError("%s: kernel.delta must be positive" % path)
    if not (0.0 <= c["kernel.ramp"] < 1.0):
        raise ConfigError("%s: kernel.ramp must lie in [0, 1)" % path)
    if not (c["problem.eps"] > 0.0):
        raise ConfigError("%s: problem.eps must be positive (the unperturbed "
                          "problem is not solvable)" % path)
    for key in ("mesh.n", "data.n", "target.n_points", "init.n_points"):
        if c[key] < 4 and not (key.endswith("n_points") and c[key] >= 3):
            raise ConfigError("%s: %s is too small" % (path, key))
    if c["mesh.n_fine"] < 0 or c["mesh.coarse_iters"] < 0:
        raise ConfigError("%s: mesh.n_fine and mesh.coarse_iters must be >= 0" % path)
    if c["mesh.n_fine"] > 0 and c["mesh.coarse_iters"] <= 0:
        raise ConfigError("%s: two-stage runs need mesh.coarse_iters > 0" % path)


def problem_from_config(c):
    # the presets share the polynomial construction; "custom" exists so
    # configs can state explicitly that the scales were chosen by hand
    kernel = default_kernel(c["kernel.delta"],
                            phi1_scale=c["kernel.phi1_scale"],
                            phi2_scale=c["kernel.phi2_scale"],
                            norm=c["kernel.norm"],
                            ramp=c["kernel.ramp"])
    return ProblemConfig(kernel=kernel,
                         eps=c["problem.eps"],
                         f1=c["problem.f1"],
                         f2=c["problem.f2"],
                         nu=c["problem.nu"],
                         quad_outer=c["quad.outer_order"],
                         quad_inner=c["quad.inner_order"])


def optimizer_options_from_config(c):
    backend = None if c["assembly.backend"] == "auto" else c["assembly.backend"]
    return OptimizerOptions(tol=c["opt.tol"],
                            max_iter=c["opt.max_iter"],
                            memory=c["opt.memory"],
                            max_restarts=c["opt.max_restarts"],
                            mu_min=c["lame.mu_min"],
                            mu_max=c["lame.mu_max"],
                            lam=c["lame.lambda"],
                            backend=backend)


def line_search_params_from_config(c):
    return LineSearchParams(alpha0=c["ls.alpha0"], tau=c["ls.tau"], c=c["ls.c"],
                            n_up=c["ls.n_up"], n_down=c["ls.n_down"],
                            n_restart=c["ls.n_restart"], c_up=c["ls.c_up"],
                            c_down=c["ls.c_down"], alpha_min=c["ls.alpha_min"])


def target_polyline(c):
    return circle_polyline(c["target.center"], c["target.radius"],
                           c["target.n_points"])


def initial_polyline(c):
    return circle_polyline(c["init.center"], c["init.radius"],
                           c["init.n_points"])


def check_t_values(c):
    return np.asarray(c["check.t_values"], dtype=np.float64)
