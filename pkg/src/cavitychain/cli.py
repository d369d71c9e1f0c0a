"""Config-driven scenario runner.

    cavitychain <subcommand> [--config FILE] [--format csv|json] [--<key> VALUE ...]

Subcommands: blocks, steady, relax, covariance, pair, window,
oracle-check, identities.  The config file (YAML or JSON) has the blocks
``params``, ``states``, ``run`` and ``output``; any leaf can be overridden
with ``--block.key value`` or, when the leaf name is unique, ``--key value``.
The environment variable ``CAVITYCHAIN_OUTPUT_DIR`` overrides the output
directory.

Exit codes: 0 ok, 1 a check failed, 2 bad config, 3 inadmissible
parameters, 4 truncation budget exceeded, 5 other package error.
"""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import BudgetExceeded, CavityChainError, ConditionViolation, ConfigError
from .model import ModelParams, propagator_blocks, thermo_summary
from .states import (ModeState, cavity_char_fn, cavity_occupation, covariance, pair_covariance,
                     steady_state_char_fn)
from .tables import ResultTable, emit
from . import fock, sampling, window

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CONDITION, EXIT_BUDGET, EXIT_OTHER = range(6)
OUTPUT_ENV = "CAVITYCHAIN_OUTPUT_DIR"

DEFAULT_CONFIG = {
    "params": {"E": 1.0, "epsilon": 1.0, "eta": 0.5, "tau": 1.0, "sigma_minus": 0.2, "sigma_plus": 0.05},
    "states": {
        "rho0": {"kind": "gibbs", "beta": 2.0},
        "rho1": {"kind": "gibbs", "beta": 1.6},
    },
    "run": {
        "N": 10,
        "n": 2,
        "m": None,
        "t_grid": [0.0, 10.0, 41],
        "theta": [0.8, 0.0],
        "theta_radii": [0.0, 2.0, 9],
        "theta_angles": 4,
        "kind": "cavity-chain",
        "indices": [1],
        "N_sweep": [1, 20, 20],
        "k_grid": [1, 30, 30],
        "oracle_N": [1],
        "d": 12,
        "dt": None,
        "n_instances": 50,
        "tol": 1e-12,
        "moment_tol": 1e-4,
        "char_tol": 5e-4,
        "seed": 0,
    },
    "output": {"directory": "cavitychain_out", "format": "csv"},
}

SUBCOMMANDS = ("blocks", "steady", "relax", "covariance", "pair", "window", "oracle-check", "identities")


# ---------------------------------------------------------------------------
# configuration

def _merge(base: dict, new: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in new.items():
        where = f"{path}{k}"
        if k not in out:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(out[k], dict) and path != "states.":
            if not isinstance(v, dict):
                raise ConfigError(f"{where!r} must be a mapping")
            out[k] = _merge(out[k], v, where + ".")
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    return _merge(DEFAULT_CONFIG, raw)


def _leaf_paths(cfg: dict, prefix=()):
    for k, v in cfg.items():
        if isinstance(v, dict) and prefix != ("states",):
            yield from _leaf_paths(v, prefix + (k,))
        else:
            yield prefix + (k,)


def apply_overrides(cfg: dict, tokens: list[str]) -> dict:
    """Apply ``--key value`` pairs; values are parsed as YAML scalars or lists."""
    cfg = copy.deepcopy(cfg)
    if len(tokens) % 2:
        raise ConfigError(f"override without value: {tokens[-1]}")
    leaves = list(_leaf_paths(cfg))
    for flag, raw in zip(tokens[::2], tokens[1::2]):
        if not flag.startswith("--"):
            raise ConfigError(f"expected --key, got {flag!r}")
        key = flag[2:].replace("-", "_") if "." not in flag else flag[2:]
        parts = tuple(key.split("."))
        matches = [l for l in leaves if l[-len(parts):] == parts]
        # allow one level below a state spec, e.g. --states.rho1.beta
        if not matches and len(parts) >= 2:
            head = [l for l in leaves if l[-(len(parts) - 1):] == parts[:-1]]
            matches = [h + (parts[-1],) for h in head]
        if len(matches) != 1:
            raise ConfigError(f"override {flag!r} matches {len(matches)} keys")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad value for {flag}: {raw!r}") from exc
        node = cfg
        for p in matches[0][:-1]:
            node = node[p]
        node[matches[0][-1]] = value
    return cfg


def params_from(cfg: dict) -> ModelParams:
    blk = cfg["params"]
    try:
        p = ModelParams(*(float(blk[k]) for k in ("E", "epsilon", "eta", "tau", "sigma_minus", "sigma_plus")))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad params block: {exc}") from exc
    return p.validate()


def state_from(spec) -> ModeState:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"state spec needs a kind: {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "gibbs":
            return ModeState.gibbs(float(spec["beta"]))
        if kind == "vacuum":
            return ModeState.vacuum()
        if kind in ("displaced", "displaced_gibbs"):
            mean = spec.get("mean", [0.0, 0.0])
            return ModeState.displaced_gibbs(float(spec["beta"]), complex(float(mean[0]), float(mean[1])))
        if kind == "fock1":
            return sampling.fock_one_state()
        if kind == "squeezed":
            return sampling.squeezed_vacuum(float(spec["s"]), float(spec.get("phi", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad state spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown state kind {kind!r}")


def _grid(triple, integer=False):
    try:
        a, b, n = triple
        n = int(n)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid must be (start, stop, count), got {triple!r}") from exc
    if n < 1:
        raise ConfigError("grid count must be positive")
    g = np.linspace(float(a), float(b), n)
    if integer:
        return sorted(set(int(round(x)) for x in g))
    return g


def _theta_grid(run) -> np.ndarray:
    radii = _grid(run["theta_radii"])
    angles = int(run["theta_angles"])
    pts = [r * np.exp(2j * np.pi * j / angles) for r in radii for j in range(angles)]
    return np.array(pts, dtype=complex)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return complex(v)


# ---------------------------------------------------------------------------
# subcommands; each returns (tables, ok)

def run_blocks(cfg, p):
    t = ResultTable("blocks", ["t", "e_sigma", "g", "w", "z_plus", "z_minus", "symplectic_defect"])
    for x in _grid(cfg["run"]["t_grid"]):
        b = propagator_blocks(p, float(x))
        t.add(float(x), b.e_sigma, b.g, b.w, b.z_plus, b.z_minus, abs(b.symplectic_defect()))
    return [t], True


def run_steady(cfg, p):
    rho1 = state_from(cfg["states"]["rho1"])
    summ = ResultTable("steady_summary", ["lambda", "beta_star_0", "beta_star", "beta", "coth_star",
                                          "zero_temperature_reservoir"])
    if rho1.is_gaussian and rho1.gauge_invariant:
        th = thermo_summary(p, rho1.beta)
        summ.add(th.lam, th.beta_star_0, th.beta_star, th.beta, th.coth_star, th.zero_temperature_reservoir)
    samples = ResultTable("steady", ["theta", "char_fn"])
    thetas = _theta_grid(cfg["run"])
    if rho1.gauge_invariant:
        vals = steady_state_char_fn(rho1, p, thetas)
    else:
        vals = window.fixed_point(rho1, p, thetas)
    for th_, v in zip(thetas, vals):
        samples.add(complex(th_), complex(v))
    return [summ, samples], True


def run_relax(cfg, p):
    rho0 = state_from(cfg["states"]["rho0"])
    rho1 = state_from(cfg["states"]["rho1"])
    theta = _complex(cfg["run"]["theta"])
    gauss = rho0.is_gaussian and rho1.is_gaussian
    cols = ["t", "char_fn"] + (["occupation"] if gauss else [])
    t = ResultTable("relax", cols)
    for x in _grid(cfg["run"]["t_grid"]):
        row = [float(x), complex(cavity_char_fn(float(x), rho0, rho1, p, theta))]
        if gauss:
            row.append(cavity_occupation(float(x), rho0, rho1, p))
        t.add(*row)
    return [t], True


def _gibbs_betas(cfg):
    r0, r1 = state_from(cfg["states"]["rho0"]), state_from(cfg["states"]["rho1"])
    if not all(s.kind in ("gibbs", "vacuum") for s in (r0, r1)):
        raise ConfigError("this subcommand needs Gibbs or vacuum states")
    return r0.beta, r1.beta


def run_covariance(cfg, p):
    b0, b = _gibbs_betas(cfg)
    N = int(cfg["run"]["N"])
    X = covariance(N, b0, b, p).X
    t = ResultTable("covariance", ["i", "j", "X"])
    for i in range(N + 1):
        for j in range(N + 1):
            t.add(i, j, complex(X[i, j]))
    return [t], True


def run_pair(cfg, p):
    b0, b = _gibbs_betas(cfg)
    run = cfg["run"]
    kind = run["kind"]
    idx = tuple(int(i) for i in run["indices"])
    t = ResultTable("pair", ["N", "B00", "B01", "B10", "B11"])
    for N in _grid(run["N_sweep"], integer=True):
        if N < max(idx):
            continue
        B = pair_covariance(kind, idx, N, b0, b, p)
        t.add(N, complex(B[0, 0]), complex(B[0, 1]), complex(B[1, 0]), complex(B[1, 1]))
    return [t], True


def run_window(cfg, p):
    run = cfg["run"]
    rho0 = state_from(cfg["states"]["rho0"])
    rho1 = state_from(cfg["states"]["rho1"])
    n = int(run["n"])
    m = n if run["m"] is None else int(run["m"])
    thetas = _theta_grid(run)
    fp = ResultTable("window_fixed_point", ["theta", "char_fn"])
    for th_, v in zip(thetas, window.fixed_point(rho1, p, thetas)):
        fp.add(complex(th_), complex(v))
    tables = [fp]
    if rho1.is_gaussian:
        X = window.window_state(n, p, rho1, m=m, output="covariance").X
        cov = ResultTable("window_covariance", ["i", "j", "X"])
        for i in range(m + 1):
            for j in range(m + 1):
                cov.add(i, j, complex(X[i, j]))
        tables.append(cov)
    limit = window.window_state(n, p, rho1, m=m)
    rng = np.random.default_rng(int(run["seed"]))
    Z = np.stack([sampling.random_label(rng, m + 1) for _ in range(24)], axis=1)
    ref = limit(Z)
    inv = ResultTable("window_invariance", ["n", "m", "max_deviation"])
    inv.add(n, m, float(np.max(np.abs(window.advance_rotate_drop(limit, rho1, p, n=n)(Z) - ref))))
    tables.append(inv)
    conv = ResultTable("window_convergence", ["k", "max_error"])
    for k in _grid(run["k_grid"], integer=True):
        fin = window.window_state_finite(n, k, p, rho0, rho1, m=m)
        conv.add(k, float(np.max(np.abs(fin(Z) - ref))))
    tables.append(conv)
    return tables, True


def run_oracle(cfg, p):
    run = cfg["run"]
    b0, b = _gibbs_betas(cfg)
    d = int(run["d"])
    dt = None if run["dt"] is None else float(run["dt"])
    Ns = run["oracle_N"]
    Ns = [int(Ns)] if not isinstance(Ns, (list, tuple)) else [int(x) for x in Ns]
    t = ResultTable("oracle_check", ["N", "d", "moment_error", "char_fn_error", "trace_drift",
                                     "hermiticity_defect", "min_eigenvalue", "ok"])
    ok = True
    for N in Ns:
        try:
            rep = fock.oracle_check(p, N, d, b0, b, dt=dt)
        except ValueError as exc:
            if isinstance(exc, CavityChainError):
                raise
            raise ConfigError(str(exc)) from exc
        good = rep.ok(float(run["moment_tol"]), float(run["char_tol"]))
        ok &= good
        t.add(N, d, rep.moment_error, rep.char_fn_error, float(rep.trace_drift),
              rep.hermiticity_defect, rep.min_eigenvalue, good)
    return [t], ok


def run_identities(cfg, p):
    run = cfg["run"]
    tol = float(run["tol"])
    res = window.identity_battery(int(run["n_instances"]), int(run["seed"]))
    t = ResultTable("identities", ["identity", "max_deviation", "ok"])
    ok = True
    for name, dev in res.items():
        limit = max(tol, 1e-10) if name == "fixed-point-residual" else tol
        good = dev <= limit
        ok &= good
        t.add(name, dev, good)
    return [t], ok


RUNNERS = {
    "blocks": run_blocks,
    "steady": run_steady,
    "relax": run_relax,
    "covariance": run_covariance,
    "pair": run_pair,
    "window": run_window,
    "oracle-check": run_oracle,
    "identities": run_identities,
}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavitychain", description="Repeated-interaction cavity scenarios.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="YAML or JSON scenario file (defaults built in)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format (overrides output.format)")
    ap.add_argument("--outdir", help="output directory (overrides output.directory)")
    ap.add_argument("-q", "--quiet", action="store_true")
    return ap


def run(subcommand: str, cfg: dict) -> tuple[list, bool]:
    p = params_from(cfg)
    return RUNNERS[subcommand](cfg, p)


def main(argv=None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), extra)
        if args.format:
            cfg["output"]["format"] = args.format
        if args.outdir:
            cfg["output"]["directory"] = args.outdir
        if os.environ.get(OUTPUT_ENV):
            cfg["output"]["directory"] = os.environ[OUTPUT_ENV]
        fmt = cfg["output"]["format"]
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {fmt!r}")
        np.random.seed(int(cfg["run"]["seed"]))
        tables, ok = run(args.subcommand, cfg)
        meta = {"config": cfg, "subcommand": args.subcommand, "version": __version__,
                "seed": cfg["run"]["seed"]}
        for t in tables:
            t.meta = dict(meta)
            path = emit(t, cfg["output"]["directory"], fmt)
            if not args.quiet:
                print(f"wrote {path} ({len(t.rows)} rows)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConditionViolation as exc:
        print(f"inadmissible parameters: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CavityChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    if not ok:
        if not args.quiet:
            print("check failed", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
