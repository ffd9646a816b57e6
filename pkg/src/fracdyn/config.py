"""Experiment configuration: YAML schema, defaults, validation, object building.

A config is a mapping with the sections ``experiment``, ``kernel``,
``grid``, ``noise``, ``system``, ``output`` and ``ensemble``. Loading fills
every default, so ``dump(load(text))`` is a fixed point.
"""

from dataclasses import dataclass, field
import copy
import hashlib
import json
import math

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .kernel import (
    Constant,
    KernelSpec,
    SingularityPolicy,
    alpha_from_dict,
    check_alpha_range,
    validate_grid,
)
from .processes import GridSpec

__all__ = ["ExperimentConfig", "KINDS", "load", "loads", "dump"]

KINDS = (
    "hybrid_sde",
    "stock_stochastic",
    "stock_fuzzy",
    "hp",
    "hamiltonian",
    "metric",
    "pendulum",
    "fractional_wiener",
    "fractional_liu",
)
MECHANICS_KINDS = ("hp", "hamiltonian", "metric", "pendulum")
POTENTIAL_PRESETS = ("pendulum", "harmonic", "free")
METRIC_PRESETS = ("euclidean", "polar")

_SYSTEM_DEFAULTS = {
    "hybrid_sde": {"x0": [1.0], "drift": {}, "diffusion": {}, "fuzzy": {}, "volterra": False},
    "stock_stochastic": {"mu": 0.05, "sigma": 0.2, "alpha1": 0.6, "x0": 1.0, "volterra": False},
    "stock_fuzzy": {"mu": 0.03, "sigma": 0.1, "beta1": 0.8, "x0": 1.0, "volterra": False},
    "pendulum": {"alpha1": 0.1, "alpha2": 0.3, "q0": 1.0, "p0": 0.0, "scheme": "proportional"},
    "hp": {"preset": "pendulum", "params": {}, "q0": [1.0], "p0": [0.0], "scheme": "proportional"},
    "hamiltonian": {"preset": "pendulum", "params": {}, "q0": [1.0], "p0": [0.0], "scheme": "proportional"},
    "metric": {"preset": "euclidean", "dimension": 2, "analytic": True, "form": "momentum",
               "q0": [1.0, 0.0], "p0": [0.0, 1.0]},
    "fractional_wiener": {},
    "fractional_liu": {},
}


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError("missing required field", field=f"{where}.{key}" if where else key)
    return d[key]


def _mapping(d, where):
    if d is None:
        return {}
    if not isinstance(d, dict):
        raise ConfigError("expected a mapping", field=where)
    return d


def _float(v, where):
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {v!r}", field=where) from None
    if not math.isfinite(x):
        raise ConfigError(f"expected a finite number, got {v!r}", field=where)
    return x


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(f"expected an integer, got {v!r}", field=where)
    return int(v)


def _floats(v, where):
    seq = v if isinstance(v, (list, tuple)) else [v]
    return [_float(x, f"{where}[{i}]") for i, x in enumerate(seq)]


@dataclass
class ExperimentConfig:
    experiment: str
    kernel: dict
    grid: dict
    noise: dict
    system: dict
    output: dict = field(default_factory=dict)
    ensemble: dict = field(default_factory=dict)

    # -- serialization -------------------------------------------------

    @classmethod
    def from_dict(cls, raw):
        """Normalize a raw mapping, filling defaults and checking types."""
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        kind = _require(raw, "experiment", "")
        if kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {kind!r} (expected one of {list(KINDS)})",
                              field="experiment")
        grid_raw = _mapping(_require(raw, "grid", ""), "grid")
        grid = {
            "t0": _float(grid_raw.get("t0", 0.0), "grid.t0"),
            "T": _float(_require(grid_raw, "T", "grid"), "grid.T"),
            "N": _int(_require(grid_raw, "N", "grid"), "grid.N"),
        }
        k_raw = _mapping(raw.get("kernel"), "kernel")
        sing = _mapping(k_raw.get("singularity"), "kernel.singularity")
        kernel = {
            "alpha": alpha_from_dict(k_raw.get("alpha", {"family": "constant", "a": 1.0}),
                                     "kernel.alpha").to_dict(),
            "rho": _float(k_raw.get("rho", 0.0), "kernel.rho"),
            "observed_time": _float(k_raw.get("observed_time", grid["T"]), "kernel.observed_time"),
            "h_convention": str(k_raw.get("h_convention", "paper")),
            "singularity": {
                "mode": str(sing.get("mode", "error")),
                "epsilon": _float(sing.get("epsilon", 1e-8), "kernel.singularity.epsilon"),
            },
        }
        for extra in ("beta", "gamma"):
            if k_raw.get(extra) is not None:
                kernel[extra] = alpha_from_dict(k_raw[extra], f"kernel.{extra}").to_dict()
        n_raw = _mapping(raw.get("noise"), "noise")
        noise = {
            "seed": _int(n_raw.get("seed", 0), "noise.seed"),
            "z": _float(n_raw.get("z", 0.0), "noise.z"),
            "e": _float(n_raw.get("e", 0.0), "noise.e"),
            "sigma_liu": _float(n_raw.get("sigma_liu", 1.0), "noise.sigma_liu"),
        }
        system = copy.deepcopy(_SYSTEM_DEFAULTS[kind])
        system.update(copy.deepcopy(_mapping(raw.get("system"), "system")))
        o_raw = _mapping(raw.get("output"), "output")
        output = {
            "dir": str(o_raw.get("dir", "out")),
            "prefix": str(o_raw.get("prefix", kind)),
            "plot": bool(o_raw.get("plot", False)),
            "per_run": bool(o_raw.get("per_run", False)),
        }
        e_raw = _mapping(raw.get("ensemble"), "ensemble")
        ensemble = {}
        if e_raw:
            if "seeds" in e_raw:
                ensemble["seeds"] = _key_list(e_raw["seeds"], "ensemble.seeds", _int)
            if "zs" in e_raw:
                ensemble["zs"] = _key_list(e_raw["zs"], "ensemble.zs", _float)
            ensemble["workers"] = _int(e_raw.get("workers", 1), "ensemble.workers")
        cfg = cls(kind, kernel, grid, noise, system, output, ensemble)
        unknown = set(raw) - {"experiment", "kernel", "grid", "noise", "system", "output", "ensemble"}
        if unknown:
            raise ConfigError(f"unknown section(s) {sorted(unknown)}", field=sorted(unknown)[0])
        return cfg

    def to_dict(self):
        d = {
            "experiment": self.experiment,
            "kernel": copy.deepcopy(self.kernel),
            "grid": dict(self.grid),
            "noise": dict(self.noise),
            "system": copy.deepcopy(self.system),
            "output": dict(self.output),
        }
        if self.ensemble:
            d["ensemble"] = copy.deepcopy(self.ensemble)
        return d

    def digest(self):
        """SHA-256 of the canonical JSON form; output locations excluded."""
        d = self.to_dict()
        d["output"] = {k: v for k, v in d["output"].items() if k != "dir"}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_noise(self, **overrides):
        d = self.to_dict()
        d["noise"].update(overrides)
        return ExperimentConfig.from_dict(d)

    # -- building ------------------------------------------------------

    def grid_spec(self):
        try:
            return GridSpec(self.grid["t0"], self.grid["T"], self.grid["N"])
        except DomainError as exc:
            raise ConfigError(str(exc), field="grid") from None

    def policy(self):
        s = self.kernel["singularity"]
        try:
            return SingularityPolicy(epsilon=s["epsilon"], mode=s["mode"])
        except DomainError as exc:
            raise ConfigError(str(exc), field="kernel.singularity") from None

    def kernel_spec(self, which="alpha"):
        alpha = alpha_from_dict(self.kernel.get(which, self.kernel["alpha"]), f"kernel.{which}")
        try:
            return KernelSpec(alpha, self.kernel["rho"], self.kernel["observed_time"],
                              self.kernel["h_convention"])
        except DomainError as exc:
            raise ConfigError(str(exc), field="kernel") from None

    # -- validation ----------------------------------------------------

    def validate(self):
        """Check every statically checkable invariant; raises :class:`ConfigError`."""
        grid = self.grid_spec()
        policy = self.policy()
        kind = self.experiment
        if not self.noise["sigma_liu"] > 0:
            raise ConfigError("must be positive", field="noise.sigma_liu")
        nodes = grid.nodes
        volterra = bool(self.system.get("volterra", False))
        lags = -(nodes[1:] - nodes[0])  # s_k - s_n for history nodes in Volterra-type sums
        if kind in ("fractional_wiener", "fractional_liu"):
            self._check_order(self.kernel_spec().alpha, lags, "kernel.alpha")
        elif kind in ("stock_stochastic", "stock_fuzzy"):
            order = "alpha1" if kind == "stock_stochastic" else "beta1"
            a = _float(self.system.get(order), f"system.{order}")
            if not 0.0 < a <= 1.0:
                raise ConfigError(f"must lie in (0, 1], got {a!r}", field=f"system.{order}")
            for f in ("mu", "sigma", "x0"):
                _float(self.system.get(f), f"system.{f}")
            t = self.kernel["observed_time"]
            if not volterra:
                self._check_singular(KernelSpec(Constant(a), 0.0, t), nodes[:-1], policy)
        else:
            which = ("alpha", "beta", "gamma") if kind == "hybrid_sde" else ("alpha",)
            for w in which:
                spec = self.kernel_spec(w)
                if volterra and kind == "hybrid_sde":
                    self._check_order(spec.alpha, lags, f"kernel.{w}")
                else:
                    self._check_order(spec.alpha, nodes[:-1] - spec.observed_time, f"kernel.{w}")
                    self._check_singular(spec, nodes[:-1], policy)
        getattr(self, f"_validate_{kind}", lambda: None)()
        return self

    @staticmethod
    def _check_order(alpha, z, where):
        try:
            check_alpha_range(alpha, z)
        except DomainError as exc:
            raise ConfigError(str(exc), field=where) from None

    @staticmethod
    def _check_singular(spec, nodes, policy):
        if policy.mode != "error":
            return
        bad = validate_grid(spec, nodes, policy)
        if bad:
            raise ConfigError(
                f"grid node {bad[0]} (s={nodes[bad[0]]!r}) is within epsilon of the observed "
                f"time {spec.observed_time!r}; move the grid or use singularity.mode=clamp",
                field="kernel.observed_time",
            )

    def _validate_hybrid_sde(self):
        x0 = _floats(self.system.get("x0"), "system.x0")
        for name in ("drift", "diffusion", "fuzzy"):
            block = _mapping(self.system.get(name), f"system.{name}")
            if "offset" in block and len(_floats(block["offset"], f"system.{name}.offset")) != len(x0):
                raise ConfigError("length must match system.x0", field=f"system.{name}.offset")
            if "matrix" in block:
                m = np.asarray(block["matrix"], dtype=float)
                if m.shape != (len(x0), len(x0)):
                    raise ConfigError(f"must be {len(x0)}x{len(x0)}", field=f"system.{name}.matrix")

    def _validate_pendulum(self):
        for f in ("alpha1", "alpha2", "q0", "p0"):
            _float(self.system.get(f), f"system.{f}")
        self._check_scheme()

    def _check_scheme(self):
        if self.system.get("scheme") not in ("proportional", "verbatim"):
            raise ConfigError("must be 'proportional' or 'verbatim'", field="system.scheme")

    def _validate_potential(self):
        preset = self.system.get("preset")
        if preset not in POTENTIAL_PRESETS:
            raise ConfigError(f"unknown preset {preset!r} (expected one of {list(POTENTIAL_PRESETS)})",
                              field="system.preset")
        q0 = _floats(self.system.get("q0"), "system.q0")
        p0 = _floats(self.system.get("p0"), "system.p0")
        if len(q0) != len(p0):
            raise ConfigError("length must match system.q0", field="system.p0")
        if preset == "pendulum" and len(q0) != 1:
            raise ConfigError("pendulum is one-dimensional", field="system.q0")
        self._check_scheme()

    _validate_hp = _validate_potential
    _validate_hamiltonian = _validate_potential

    def _validate_metric(self):
        preset = self.system.get("preset")
        if preset not in METRIC_PRESETS:
            raise ConfigError(f"unknown preset {preset!r} (expected one of {list(METRIC_PRESETS)})",
                              field="system.preset")
        if self.system.get("form") not in ("velocity", "momentum"):
            raise ConfigError("must be 'velocity' or 'momentum'", field="system.form")
        q0 = _floats(self.system.get("q0"), "system.q0")
        p0 = _floats(self.system.get("p0"), "system.p0")
        dim = 2 if preset == "polar" else _int(self.system.get("dimension"), "system.dimension")
        if len(q0) != dim or len(p0) != dim:
            raise ConfigError(f"expected {dim} entries", field="system.q0")
        from .mechanics import MetricError, euclidean_metric, polar_metric

        system = polar_metric(bool(self.system.get("analytic", True))) if preset == "polar" \
            else euclidean_metric(dim)
        try:
            system.g(np.asarray(q0))
        except MetricError as exc:
            raise ConfigError(str(exc), field="system.q0") from None


def _key_list(v, where, conv):
    if isinstance(v, dict) and "range" in v:
        lo, hi = v["range"]
        items = list(range(_int(lo, where), _int(hi, where)))
    elif isinstance(v, dict) and "linspace" in v:
        lo, hi, n = v["linspace"]
        items = [float(x) for x in np.linspace(_float(lo, where), _float(hi, where), _int(n, where))]
    elif isinstance(v, list):
        items = v
    else:
        raise ConfigError("expected a list, {range: [lo, hi]} or {linspace: [lo, hi, n]}", field=where)
    if not items:
        raise ConfigError("must not be empty", field=where)
    return [conv(x, f"{where}[{i}]") for i, x in enumerate(items)]


def loads(text):
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse YAML: {exc}") from None
    return ExperimentConfig.from_dict(raw)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)
