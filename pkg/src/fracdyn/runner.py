"""Build objects from an :class:`ExperimentConfig`, run them, write outputs."""

from dataclasses import asdict, dataclass, field
import datetime as _dt
import json
import os
import tempfile

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ConfigError, DomainError
from .integrate import (
    CoefficientField,
    HybridSystem,
    Trajectory,
    euler_hybrid,
    linear_field,
    run_ensemble,
    stock_model_fuzzy,
    stock_model_stochastic,
    summary_csv,
)
from .kernel import KernelSpec
from .mechanics import (
    HPState,
    euclidean_metric,
    euler_mechanics,
    free_preset,
    harmonic_preset,
    pendulum_preset,
    polar_metric,
)
from .processes import (
    fractional_process,
    fractional_terminal,
    format_float,
    path_to_csv,
    sample_liu,
    sample_wiener,
)
from .svg import line_plot

__all__ = ["RunManifest", "execute", "run", "sweep", "output_dir", "OUTPUT_ENV"]

OUTPUT_ENV = "FRACDYN_OUTPUT_DIR"


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str
    started: str
    finished: str
    outputs: list = field(default_factory=list)
    kind: str = ""

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass
class Result:
    """In-memory outcome of one experiment."""

    trajectory: Trajectory = None
    path: object = None
    values: np.ndarray = None
    terminal: np.ndarray = None
    labels: tuple = ()


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def output_dir(cfg):
    return os.environ.get(OUTPUT_ENV) or cfg.output["dir"]


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _field(block, dim):
    block = block or {}
    matrix = block.get("matrix", np.zeros((dim, dim)))
    return linear_field(matrix, block.get("offset", np.zeros(dim)))


def _potential_system(system):
    preset = system["preset"]
    params = dict(system.get("params") or {})
    dim = len(np.atleast_1d(system["q0"]))
    if preset == "pendulum":
        return pendulum_preset(params.get("alpha1", 0.1), params.get("alpha2", 0.3))
    if preset == "harmonic":
        return harmonic_preset(dim, **params)
    return free_preset(dim)


def execute(cfg, terminal_only=False):
    """Run one validated experiment in memory."""
    grid = cfg.grid_spec()
    policy = cfg.policy()
    noise = cfg.noise
    sysb = cfg.system
    kind = cfg.experiment

    if kind == "hybrid_sde":
        x0 = np.atleast_1d(np.asarray(sysb["x0"], dtype=float))
        dim = x0.size
        system = HybridSystem(
            drift=_field(sysb.get("drift"), dim),
            diffusion=_field(sysb.get("diffusion"), dim),
            fuzzy=_field(sysb.get("fuzzy"), dim),
            kernel_alpha=cfg.kernel_spec("alpha"),
            kernel_beta=cfg.kernel_spec("beta"),
            kernel_gamma=cfg.kernel_spec("gamma"),
            x0=x0,
            name="hybrid_sde",
        )
        traj = euler_hybrid(
            system, grid, sample_wiener(grid, noise["seed"]),
            sample_liu(grid, noise["z"], noise["e"], noise["sigma_liu"]),
            policy, volterra=bool(sysb.get("volterra", False)),
        )
        return Result(trajectory=traj, terminal=traj.terminal, labels=traj.labels)

    if kind == "stock_stochastic":
        traj = stock_model_stochastic(
            sysb["mu"], sysb["sigma"], sysb["alpha1"], sysb["x0"], grid, noise["seed"],
            policy, cfg.kernel["observed_time"], bool(sysb.get("volterra", False)),
        )
        return Result(trajectory=traj, terminal=traj.terminal, labels=traj.labels)

    if kind == "stock_fuzzy":
        traj = stock_model_fuzzy(
            sysb["mu"], sysb["sigma"], sysb["beta1"], sysb["x0"], grid, noise["z"],
            noise["e"], noise["sigma_liu"], policy, cfg.kernel["observed_time"],
            bool(sysb.get("volterra", False)),
        )
        return Result(trajectory=traj, terminal=traj.terminal, labels=traj.labels)

    if kind in ("fractional_wiener", "fractional_liu"):
        kernel = cfg.kernel_spec()
        if kind == "fractional_wiener":
            path = sample_wiener(grid, noise["seed"])
        else:
            path = sample_liu(grid, noise["z"], noise["e"], noise["sigma_liu"])
        if terminal_only:
            return Result(path=path, terminal=np.array([fractional_terminal(kernel, path, policy)]),
                          labels=("value",))
        values = fractional_process(kernel, path, policy).values
        return Result(path=path, values=values, terminal=values[-1:], labels=("value",))

    # mechanics kinds
    kernel = cfg.kernel_spec()
    wiener = sample_wiener(grid, noise["seed"])
    liu = sample_liu(grid, noise["z"], noise["e"], noise["sigma_liu"])
    if kind == "pendulum":
        system = pendulum_preset(sysb["alpha1"], sysb["alpha2"])
        initial = (sysb["q0"], sysb["p0"])
        traj = euler_mechanics(system, initial, grid, kernel, wiener, liu, policy,
                               scheme=sysb["scheme"])
    elif kind in ("hp", "hamiltonian"):
        system = _potential_system(sysb)
        q0 = np.atleast_1d(np.asarray(sysb["q0"], dtype=float))
        p0 = np.atleast_1d(np.asarray(sysb["p0"], dtype=float))
        initial = HPState(q0, p0, p0) if kind == "hp" else (q0, p0)
        traj = euler_mechanics(system, initial, grid, kernel, wiener, liu, policy,
                               scheme=sysb["scheme"], equations=kind)
    else:
        dim = 2 if sysb["preset"] == "polar" else int(sysb["dimension"])
        system = polar_metric(bool(sysb.get("analytic", True))) if sysb["preset"] == "polar" \
            else euclidean_metric(dim)
        traj = euler_mechanics(system, (sysb["q0"], sysb["p0"]), grid, kernel, wiener, liu,
                               policy, form=sysb["form"])
    return Result(trajectory=traj, terminal=traj.terminal, labels=traj.labels)


def _series_csv(x, y, xname, yname):
    lines = [f"{xname},{yname}"]
    for a, b in zip(x, y):
        xa = str(int(a)) if xname == "n" else format_float(a)
        lines.append(f"{xa},{format_float(b)}")
    return "\n".join(lines) + "\n"


def _write_result(cfg, result, out, prefix):
    """Write CSV (and SVG) files for one result; returns the file names."""
    written = []
    plot = cfg.output["plot"]

    def emit(name, text):
        _atomic_write(os.path.join(out, name), text)
        written.append(name)

    if result.trajectory is None:
        emit(f"{prefix}_path.csv", path_to_csv(result.path, result.values))
        if plot:
            emit(f"{prefix}_path.svg", line_plot(result.path.grid.nodes, result.values,
                                                 f"{prefix}: fractional process", "s", "value",
                                                 __version__))
        return written

    traj = result.trajectory
    emit(f"{prefix}_trajectory.csv", traj.to_csv())
    n = np.arange(traj.states.shape[0])
    if cfg.experiment in ("hp", "hamiltonian", "pendulum", "metric") and traj.states.shape[1] == 2:
        qname, pname = traj.labels
        q, p = traj.states[:, 0], traj.states[:, 1]
        series = [
            (f"{prefix}_n_{qname}", n, q, "n", qname),
            (f"{prefix}_n_{pname}", n, p, "n", pname),
            (f"{prefix}_{qname}_{pname}", q, p, qname, pname),
        ]
        for stem, x, y, xn, yn in series:
            emit(f"{stem}.csv", _series_csv(x, y, xn, yn))
            if plot:
                emit(f"{stem}.svg", line_plot(x, y, f"{prefix}: ({xn}, {yn})", xn, yn, __version__))
    elif plot:
        for i, label in enumerate(traj.labels):
            emit(f"{prefix}_{label}.svg",
                 line_plot(traj.times, traj.states[:, i], f"{prefix}: {label}", "s", label,
                           __version__))
    return written


def _manifest(cfg, out, prefix, started, outputs):
    m = RunManifest(cfg.digest(), __version__, started, _now(), outputs, cfg.experiment)
    _atomic_write(os.path.join(out, f"{prefix}_manifest.json"), m.to_json())
    return m


def run(cfg):
    """Validate, execute and write outputs for a single experiment."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    cfg.validate()
    started = _now()
    result = execute(cfg)
    out = output_dir(cfg)
    prefix = cfg.output["prefix"]
    outputs = _write_result(cfg, result, out, prefix)
    return _manifest(cfg, out, prefix, started, outputs)


def _sweep_member(args):
    cfg_dict, key_name, key, keep = args
    cfg = ExperimentConfig.from_dict(cfg_dict).with_noise(**{key_name: key})
    result = execute(cfg, terminal_only=not keep)
    return result.terminal, result.labels, (result if keep else None)


def sweep(cfg):
    """Run the ensemble block: one member per seed (or per ``z``).

    Writes ``<prefix>_summary.csv`` with terminal states sorted by key, and
    per-member files when ``output.per_run`` is set. The summary does not
    depend on ``ensemble.workers``.
    """
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    ens = cfg.ensemble
    if not ens or not (ens.get("seeds") or ens.get("zs")):
        raise ConfigError("sweep needs a non-empty seeds or zs list", field="ensemble")
    if ens.get("seeds") and ens.get("zs"):
        raise ConfigError("give either seeds or zs, not both", field="ensemble")
    cfg.validate()
    key_name, keys = ("seed", ens["seeds"]) if ens.get("seeds") else ("z", ens["zs"])
    keep = cfg.output["per_run"]
    started = _now()
    base = cfg.to_dict()
    members = run_ensemble(_sweep_member, [(base, key_name, k, keep) for k in keys],
                           workers=ens.get("workers", 1))
    out = output_dir(cfg)
    prefix = cfg.output["prefix"]
    outputs = []
    labels = members[0][1][1]
    rows = [(args[2], terminal) for args, (terminal, _, _) in members]
    name = f"{prefix}_summary.csv"
    _atomic_write(os.path.join(out, name), summary_csv(rows, labels))
    outputs.append(name)
    if keep:
        for args, (_, _, result) in members:
            tag = f"{key_name}{args[2]}"
            outputs.extend(_write_result(cfg, result, out, f"{prefix}_{tag}"))
    return _manifest(cfg, out, prefix, started, outputs)
