"""Command-line front end: solve / identify / profile / realdata.

Configuration is flat key=value text; every key can be overridden by a
flag, and RATIOPT_SEED overrides a config-file seed (flag > env > file).
Every output file embeds a RunManifest whose hash covers the command, the
resolved configuration, the seed, and the toolkit version (timestamps are
excluded), so identical manifests mean identical single-threaded results.

Exit codes: 0 success, 1 usage/config/data error, 2 iteration-cap exit.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .admm import run_admm, run_admm_l1_baseline
from .exceptions import RatioptError
from .expkit.generate import SynthSpec
from .expkit.metrics import rerr, tmse
from .expkit.profiles import performance_profile
from .expkit.realdata import (DEFAULT_GAMMA_GRID, build_dataset,
                              cross_validate_gamma, load_csv)
from .expkit.rng import make_rng, standard_normal
from .expkit.studies import finite_identification_study, profile_times
from .hafam import AbsoluteTau, FractionOfL1, run_hafam
from .model import Cone, Fidelity, Problem, SolverConfig, kkt_residual


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

_KEY_TYPES = {
    "preset": str, "solver": str, "init": str, "family": str,
    "data": str, "target": str,
    "m": int, "n": int, "s": int, "T": int, "imax": int, "seeds": int,
    "seed": int, "folds": int, "repetitions": int,
    "coherence": float, "dynamic_D": float, "noise_sigma": float,
    "gamma": float, "beta": float, "tau": float, "tau_frac": float,
    "rel_tol": float, "split_ratio": float,
    "m_list": "int_list", "s_list": "int_list", "T_list": "int_list",
    "tau_list": "float_list",
}


def _coerce(key: str, raw: str):
    kind = _KEY_TYPES[key]
    try:
        if kind == "int_list":
            return [int(v) for v in raw.split(",") if v.strip()]
        if kind == "float_list":
            return [float(v) for v in raw.split(",") if v.strip()]
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for key '{key}': {raw!r}") from exc


def parse_config_file(path: str) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _KEY_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            cfg[key] = _coerce(key, raw.strip())
    return cfg


PRESETS = {
    "table1-gaussian": dict(family="gaussian", m=256, n=2048, s=12,
                            coherence=0.8, dynamic_D=1.0, noise_sigma=0.0,
                            gamma=1e-4, beta=0.015, T=5, tau=0.0),
    "table1-odct": dict(family="odct", m=256, n=2048, s=12, coherence=10.0,
                        dynamic_D=1.0, noise_sigma=0.0, gamma=1e-4,
                        beta=0.015, T=5, tau=0.0),
    "fig3-noisy": dict(family="odct", m=64, n=1024, s=6, coherence=10.0,
                       dynamic_D=1.0, noise_sigma=0.05, gamma=1e-3,
                       beta=0.015, T=5, tau=0.1),
    "sec5b-identify": dict(n=256, m_list=[32, 64], s_list=[2, 4, 8],
                           T_list=[5, 30], seeds=10, gamma=3e-3, beta=0.015),
    "fig2-profiles": dict(m=64, n=512, s_list=[4, 8], seeds=3, dynamic_D=2.0,
                          gamma=1e-4, beta=0.015, T=5),
}


def resolve_config(args, defaults: dict) -> dict:
    """Merge defaults < preset < config file < flags; seed: flag > env > file."""
    cfg = dict(defaults)
    file_cfg = parse_config_file(args.config) if args.config else {}
    preset_name = getattr(args, "preset", None) or file_cfg.get("preset")
    if preset_name:
        if preset_name not in PRESETS:
            raise ConfigError(f"unknown preset '{preset_name}'")
        cfg.update(PRESETS[preset_name])
        cfg["preset"] = preset_name
    cfg.update(file_cfg)
    for key in _KEY_TYPES:
        flag = getattr(args, key, None)
        if flag is not None and key != "preset":
            cfg[key] = flag
    env_seed = os.environ.get("RATIOPT_SEED")
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    elif env_seed is not None:
        cfg["seed"] = _coerce("seed", env_seed)
    cfg.setdefault("seed", 0)
    return cfg


# ---------------------------------------------------------------------------
# manifests and output plumbing

@dataclasses.dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str
    started: str
    finished: str = ""
    outputs: tuple = ()

    @property
    def hash(self) -> str:
        payload = json.dumps(
            {"command": self.command, "config": self.config,
             "seed": self.seed, "version": self.version},
            sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["outputs"] = list(self.outputs)
        d["hash"] = self.hash
        return d


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path: str, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def _write_csv(path: str, header, rows, manifest: RunManifest):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# manifest_hash={manifest.hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _outdir(args, command: str) -> str:
    out = args.out or f"ratiopt-{command}-out"
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# solve

def _build_synthetic(cfg: dict):
    spec = SynthSpec(family=cfg["family"], m=cfg["m"], n=cfg["n"], s=cfg["s"],
                     coherence=cfg["coherence"],
                     dynamic_D=cfg.get("dynamic_D", 1.0),
                     noise_sigma=cfg.get("noise_sigma", 0.0),
                     seed=cfg["seed"])
    A, b, xstar = spec.build()
    return Problem(A=A, b=b, gamma=cfg["gamma"], cone=Cone.FREE,
                   fidelity=Fidelity.LEAST_SQUARES), xstar


def _initial_point(cfg: dict, n: int) -> np.ndarray:
    init = cfg.get("init", "zero")
    if init == "zero":
        return np.zeros(n)
    if init == "randn":
        return standard_normal(make_rng(cfg["seed"] + 7_000_003), n)
    raise ConfigError(f"unknown init '{init}' (expected zero or randn)")


def _solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(beta=cfg["beta"], T=cfg.get("T", 5),
                        tau=cfg.get("tau", 0.0), imax=cfg.get("imax", 2000),
                        rel_tol=cfg.get("rel_tol", 1e-8), seed=cfg["seed"])


def _run_solver(p: Problem, cfg: dict):
    """Returns (x, iterations, trace, converged)."""
    scfg = _solver_config(cfg)
    x0 = _initial_point(cfg, p.n)
    solver = cfg.get("solver", "hafam")
    if solver == "admm":
        st, tr = run_admm(p, scfg, x0)
        return st.x, st.k, tr, tr.stop_reason != "imax"
    if solver == "admm-l1":
        st, tr = run_admm_l1_baseline(p, scfg, x0)
        return st.x, st.k, tr, tr.stop_reason != "imax"
    if solver == "hafam":
        # an explicit positive tau beats the mass-fraction rule
        if cfg.get("tau", 0.0) <= 0.0 and "tau_frac" in cfg:
            tau_rule = FractionOfL1(cfg["tau_frac"])
        else:
            tau_rule = AbsoluteTau(cfg.get("tau", 0.0))
        rep = run_hafam(p, scfg, x0, tau_rule=tau_rule)
        return rep.x_final, rep.total_it, rep, not rep.phase2_skipped
    raise ConfigError(f"unknown solver '{solver}'")


def cmd_solve(args) -> int:
    cfg = resolve_config(args, dict(solver="hafam", init="zero"))
    for key in ("family", "gamma", "beta"):
        if key not in cfg:
            raise ConfigError(f"missing required key '{key}'")
    manifest = RunManifest(command="solve", config=cfg, seed=cfg["seed"],
                           version=__version__, started=_now())
    out = _outdir(args, "solve")
    p, xstar = _build_synthetic(cfg)
    x, iters, result, converged = _run_solver(p, cfg)
    nnz = int(np.count_nonzero(x))
    kktr = kkt_residual(p, x) if nnz else float("nan")
    rec = rerr(x, xstar)
    report_path = os.path.join(out, "report.json")
    series_path = os.path.join(out, "series.csv")
    manifest.outputs = (report_path, series_path)
    trace = result.phase1_trace if hasattr(result, "phase1_trace") else result
    rows = [
        (k + 1, trace.relerr[k], trace.y_residual[k], trace.objective[k],
         trace.kkt_upper_bound[k], trace.grad_gap[k],
         trace.subgrad_distance[k], len(trace.support[k]))
        for k in range(len(trace.relerr))
    ]
    _write_csv(series_path,
               ("iteration", "relerr", "y_residual", "objective",
                "kkt_upper_bound", "grad_gap", "subgrad_distance", "nnz"),
               rows, manifest)
    manifest.finished = _now()
    _write_json(report_path, {
        "manifest": manifest.to_dict(),
        "rerr": rec, "kkt_residual": kktr, "nnz": nnz,
        "iterations": iters, "converged": converged,
        "tran_it": getattr(result, "tran_it", None),
    })
    print(f"RErr={rec:.3e} KKT_R={kktr:.3e} nnz={nnz} iters={iters}")
    return 0 if converged else 2


# ---------------------------------------------------------------------------
# identify

def cmd_identify(args) -> int:
    cfg = resolve_config(args, dict(n=256, m_list=[32, 64], s_list=[2, 4, 8],
                                    T_list=[5, 30], seeds=10, gamma=3e-3,
                                    beta=0.015))
    if not (cfg["m_list"] and cfg["s_list"] and cfg["T_list"]):
        raise ConfigError("identification grid must be nonempty")
    manifest = RunManifest(command="identify", config=cfg, seed=cfg["seed"],
                           version=__version__, started=_now())
    out = _outdir(args, "identify")
    seeds = [cfg["seed"] + i for i in range(cfg["seeds"])]
    result = finite_identification_study(
        cfg["m_list"], cfg["s_list"], cfg["T_list"], n=cfg["n"], seeds=seeds,
        gamma=cfg["gamma"], beta=cfg["beta"], imax=cfg.get("imax", 2000))
    csv_path = os.path.join(out, "identify_heatmap.csv")
    manifest.outputs = (csv_path,)
    rows = [(c.m, c.s, c.T, f"{c.sparsity_level:.6f}",
             f"{c.sample_level:.6f}", f"{c.mean_iacc:.6f}", c.n_ok,
             c.n_failed) for c in result.cells]
    _write_csv(csv_path,
               ("m", "s", "T", "s_over_m", "m_over_mmax", "mean_iacc",
                "runs_ok", "runs_failed"), rows, manifest)
    manifest.finished = _now()
    _write_json(os.path.join(out, "identify_report.json"), {
        "manifest": manifest.to_dict(),
        "failures": result.failures,
        "min_mean_iacc": min(c.mean_iacc for c in result.cells),
    })
    for c in result.cells:
        print(f"m={c.m} s={c.s} T={c.T} IAcc={c.mean_iacc:.4f}")
    return 0 if not result.failures else 1


# ---------------------------------------------------------------------------
# profile

def _profile_solvers(cfg: dict):
    scfg = _solver_config(cfg)

    def admm_fn(p, x0):
        st, tr = run_admm(p, scfg, x0, record=False)
        if tr.stop_reason == "imax":
            raise RatioptError("iteration cap")
        return st.x

    def hafam_fn(p, x0):
        rep = run_hafam(p, scfg, x0)
        if rep.phase2_skipped:
            raise RatioptError("phase one never stabilized")
        return rep.x_final

    available = {"admm": admm_fn, "hafam": hafam_fn}
    names = cfg.get("solver", "admm,hafam").split(",")
    try:
        return [(name, available[name]) for name in names]
    except KeyError as exc:
        raise ConfigError(f"unknown profile solver {exc}") from exc


def cmd_profile(args) -> int:
    cfg = resolve_config(args, dict(m=64, n=512, s_list=[4, 8], seeds=3,
                                    dynamic_D=2.0, gamma=1e-4, beta=0.015,
                                    T=5))
    manifest = RunManifest(command="profile", config=cfg, seed=cfg["seed"],
                           version=__version__, started=_now())
    out = _outdir(args, "profile")
    problems = []
    for family, coh in (("gaussian", 0.8), ("odct", 10.0)):
        for s in cfg["s_list"]:
            for i in range(cfg["seeds"]):
                spec = SynthSpec(family=family, m=cfg["m"], n=cfg["n"], s=s,
                                 coherence=coh, dynamic_D=cfg["dynamic_D"],
                                 seed=cfg["seed"] + i)
                A, b, _ = spec.build()
                p = Problem(A=A, b=b, gamma=cfg["gamma"])
                problems.append((p, np.zeros(p.n)))
    solvers = _profile_solvers(cfg)
    if args.jobs > 1:
        chunks = np.array_split(np.arange(len(problems)), args.jobs)
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(
                lambda idx: profile_times([problems[i] for i in idx], solvers),
                [c for c in chunks if c.size]))
        t = np.vstack(parts)
    else:
        t = profile_times(problems, solvers)
    taus, pi = performance_profile(t)
    csv_path = os.path.join(out, "profile_curves.csv")
    manifest.outputs = (csv_path,)
    rows = [(f"{taus[i]:.8f}", solvers[j][0], f"{pi[i, j]:.6f}")
            for j in range(len(solvers)) for i in range(len(taus))]
    _write_csv(csv_path, ("tau", "solver", "pi"), rows, manifest)
    manifest.finished = _now()
    _write_json(os.path.join(out, "profile_report.json"), {
        "manifest": manifest.to_dict(),
        "n_problems": len(problems),
        "solvers": [name for name, _ in solvers],
        "solved_fraction": {name: float(np.isfinite(t[:, j]).mean())
                            for j, (name, _) in enumerate(solvers)},
    })
    print(f"profiled {len(problems)} problems x {len(solvers)} solvers")
    return 0


# ---------------------------------------------------------------------------
# realdata

def cmd_realdata(args) -> int:
    cfg = resolve_config(args, dict(target="target", split_ratio=0.8,
                                    folds=10, repetitions=1, beta=0.05,
                                    T=5, tau=0.0, tau_frac=0.01))
    if "data" not in cfg:
        raise ConfigError("missing required key 'data' (CSV path)")
    if not 0.0 < cfg["split_ratio"] < 1.0:
        raise ConfigError("split_ratio must lie in (0, 1)")
    manifest = RunManifest(command="realdata", config=cfg, seed=cfg["seed"],
                           version=__version__, started=_now())
    out = _outdir(args, "realdata")
    M, y, _ = load_csv(cfg["data"], cfg["target"])
    scfg_proto = dict(cfg)

    def cv_solver(A, b, gamma):
        p = Problem(A=A, b=b, gamma=gamma)
        run_cfg = dict(scfg_proto, gamma=gamma, solver="hafam", init="randn")
        x, _, _, _ = _run_solver(p, run_cfg)
        return x

    rows = []
    for rep_i in range(cfg["repetitions"]):
        seed = cfg["seed"] + rep_i
        ds = build_dataset(M, y, cfg["split_ratio"], cfg["folds"], seed)
        gamma = cfg.get("gamma")
        if gamma is None:
            gamma = cross_validate_gamma(ds, DEFAULT_GAMMA_GRID,
                                         cfg["folds"], cv_solver)
        p = Problem(A=ds.A_train, b=ds.b_train, gamma=gamma)
        for solver in ("admm", "admm-l1", "hafam"):
            run_cfg = dict(scfg_proto, gamma=gamma, solver=solver,
                           init="randn", seed=seed)
            tic = time.perf_counter()
            x, iters, _, converged = _run_solver(p, run_cfg)
            cpu = time.perf_counter() - tic
            rows.append((rep_i, solver, f"{gamma:.3e}",
                         f"{tmse(ds.A_test, ds.b_test, x):.6e}",
                         int(np.count_nonzero(x)), iters, int(converged),
                         f"{cpu:.3f}"))
    csv_path = os.path.join(out, "realdata_table.csv")
    manifest.outputs = (csv_path,)
    _write_csv(csv_path,
               ("repetition", "solver", "gamma", "tmse", "nnz", "iterations",
                "converged", "cpu_seconds"), rows, manifest)
    manifest.finished = _now()
    _write_json(os.path.join(out, "realdata_report.json"),
                {"manifest": manifest.to_dict(), "rows": rows})
    for row in rows:
        print(" ".join(str(v) for v in row))
    return 0


# ---------------------------------------------------------------------------
# entry point

def _add_common(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--preset", choices=sorted(PRESETS))
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--jobs", type=int, default=1)
    sub.add_argument("--seed", type=int)
    for key, kind in _KEY_TYPES.items():
        if key in ("preset", "seed"):
            continue
        flag = f"--{key.replace('_', '-')}"
        if kind in ("int_list", "float_list"):
            elem = int if kind == "int_list" else float
            sub.add_argument(flag, dest=key,
                             type=lambda raw, e=elem:
                             [e(v) for v in raw.split(",") if v.strip()])
        else:
            sub.add_argument(flag, dest=key, type=kind)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratiopt",
        description="L1-over-L2 ratio sparse recovery toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    handlers = {"solve": cmd_solve, "identify": cmd_identify,
                "profile": cmd_profile, "realdata": cmd_realdata}
    for name in handlers:
        sub = subs.add_parser(name)
        _add_common(sub)
        sub.set_defaults(handler=handlers[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, OSError, ValueError, RatioptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
