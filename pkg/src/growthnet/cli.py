"""Command-line interface: JSON config in, deterministic CSVs out.

Subcommands: validate | solve | simulate | sweep | two-node | oracle.
Numbers are serialized with 12 significant digits ('.' decimal separator,
no locale), infinities as "inf"/"-inf", undefined entries as "nan", booleans
as "true"/"false" — identical configs produce byte-identical files. Every
failure prints one line "error: <reason>" on stderr and exits with 1 for
structural/validation problems, 2 for model-assumption failures, and 3 for
numeric failures.

Config schema (JSON)::

    {
      "network": {
        "nodes": 3,
        "weights": [0.04, 0.03, 0.05],        # upper triangle, row-major i<j
        "technology": [0.10, 0.12, 0.08],
        "rho": 0.03,
        "gamma": 3.0,
        "pref_weights": [0.333, 0.333, 0.333],     # optional, default 1/n
        "initial_capital": [1.0, 1.0, 1.0],        # optional, default ones
        "consumption_operator": [[...], ...]       # optional, default identity
      },
      "run": {                                     # all optional
        "horizon": 120.0, "dt": 0.01,
        "band_fraction": 0.01, "t_max": 1000.0,
        "sweep": {"pair": [1, 3],                  # 1-indexed weight pair, i<j
                   "values": [...]                 # or "min"/"max"/"count"
                  },
        "grid": {"lower": [0,0], "upper": [2,2], "points": [256,256],
                  "h": 0.02, "control_points": 48, "rho": 0.15,
                  "region": [[0.5,1.5],[0.5,1.5]]}
      },
      "output_dir": "./out"
    }

Command-line flags --dt/--horizon/--band/--tmax override the run block;
--out overrides output_dir; --seed is accepted for reproducibility of
randomized tooling built on top of the CLI (the commands themselves are
deterministic and ignore it).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import hjb, planner, simulation, two_node
from .errors import AssumptionError, GrowthnetError, NumericError, ValidationError
from .network import EconomyNetwork, system_matrix, validate
from .spectral import eig_symmetric

_EXIT_CODE = {ValidationError: 1, AssumptionError: 2, NumericError: 3}


# ---------------------------------------------------------------------------
# serialization helpers

def fmt(x) -> str:
    """Bit-stable cell formatting: 12 significant digits, inf/nan/boolean
    sentinels round-trippable."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _write_csv(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "\n".join(",".join(fmt(c) if not isinstance(c, str) else c
                              for c in row) for row in rows)
    path.write_text(text + "\n")


# ---------------------------------------------------------------------------
# config plumbing

def load_config(path) -> dict:
    try:
        with open(path, "r") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict) or "network" not in cfg:
        raise ValidationError("config must be an object with a 'network' block")
    cfg.setdefault("run", {})
    return cfg


def build_network(cfg: dict, check: bool = True) -> EconomyNetwork:
    blk = cfg["network"]
    try:
        n = int(blk["nodes"])
        weights = [float(w) for w in blk["weights"]]
        technology = [float(a) for a in blk["technology"]]
        rho = float(blk["rho"])
        gamma = float(blk["gamma"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"network block malformed: {exc}")
    pref = blk.get("pref_weights")
    if pref is None:
        pref = [1.0 / n] * n
    k0 = blk.get("initial_capital", [1.0] * n)
    cons = blk.get("consumption_operator")
    net = EconomyNetwork.from_upper_triangle(
        n=n, upper_weights=weights, technology=technology, rho=rho, gamma=gamma,
        pref_weights=pref, initial_capital=k0,
        consumption_operator=None if cons is None else np.asarray(cons, dtype=float))
    if check:
        violations = validate(net)
        if violations:
            raise ValidationError("invalid network: " + "; ".join(violations))
    return net


def _run_params(cfg: dict, args) -> dict:
    run = dict(cfg.get("run", {}))
    if args.dt is not None:
        run["dt"] = args.dt
    if args.horizon is not None:
        run["horizon"] = args.horizon
    if args.band is not None:
        run["band_fraction"] = args.band
    if args.tmax is not None:
        run["t_max"] = args.tmax
    run.setdefault("horizon", 120.0)
    run.setdefault("dt", simulation.DEFAULT_DT)
    run.setdefault("band_fraction", 0.01)
    run.setdefault("t_max", simulation.DEFAULT_HORIZON)
    return run


def _sweep_grid(run: dict, n: int):
    blk = run.get("sweep")
    if not blk:
        raise ValidationError("run.sweep block is required for this command")
    try:
        i, j = (int(v) for v in blk["pair"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"sweep block malformed: {exc}")
    if not (1 <= i < j <= n):
        raise ValidationError(f"sweep pair ({i},{j}) is not a weight pair with i<j")
    if "values" in blk:
        values = np.asarray([float(v) for v in blk["values"]], dtype=float)
    else:
        try:
            values = np.linspace(float(blk["min"]), float(blk["max"]),
                                 int(blk["count"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"sweep block malformed: {exc}")
    if values.size == 0:
        raise ValidationError("sweep grid is empty")
    return i - 1, j - 1, values


def _solve_instance(net: EconomyNetwork):
    dec = eig_symmetric(system_matrix(net))
    return dec, planner.build_plan(net, dec)


# ---------------------------------------------------------------------------
# commands

def cmd_validate(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg, check=False)
    violations = validate(net)
    if violations:
        for v in violations:
            print(v)
        raise ValidationError(f"invalid network: {len(violations)} violation(s)")
    dec = eig_symmetric(system_matrix(net))
    lam0 = float(dec.eigenvalues[0])
    if not net.rho - lam0 * (1.0 - net.gamma) > 0:
        raise AssumptionError(
            f"rho = {fmt(net.rho)} must exceed lambda0*(1-gamma) = "
            f"{fmt(lam0 * (1.0 - net.gamma))}")
    print(f"ok: n={net.n} lambda0={fmt(lam0)} "
          f"rho-lambda0*(1-gamma)={fmt(net.rho - lam0 * (1.0 - net.gamma))}")
    return 0


def cmd_solve(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg)
    rows = []
    if not (net.weights != 0).any():
        # fully disconnected economy: per-node closed forms
        g_bar = (net.technology - net.rho) / net.gamma
        for i, gi in enumerate(g_bar, start=1):
            rows.append((f"g_{i}", gi))
        rows.append(("value", planner.value_uncoupled(net, net.initial_capital)))
    else:
        dec, plan = _solve_instance(net)
        rows.append(("lambda0", plan.lambda0))
        rows.append(("lambda1", float(dec.eigenvalues[1])))
        for i, b in enumerate(plan.b0, start=1):
            rows.append((f"b0_{i}", float(b)))
        rows.append(("g", plan.growth_rate))
        rows.append(("alpha", plan.alpha))
        rows.append(("condition_holds", plan.condition_holds))
        rows.append(("min_condition_margin", plan.min_condition_margin()))
        rows.append(("value", planner.value_auxiliary(plan, net.initial_capital)))
        if plan.g_dominant:
            for i, kb in enumerate(planner.steady_state(plan, net.initial_capital),
                                   start=1):
                rows.append((f"K_bar_{i}", float(kb)))
    _write_csv(out / "solve.csv", rows)
    for key, val in rows:
        print(f"{key} = {fmt(val)}")
    return 0


def cmd_simulate(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg)
    run = _run_params(cfg, args)
    dt, horizon = float(run["dt"]), float(run["horizon"])
    if not horizon > 0 or not dt > 0 or horizon < dt:
        raise ValidationError("need horizon >= dt > 0")
    times = np.arange(int(math.floor(horizon / dt + 1e-9)) + 1) * dt
    k = net.initial_capital

    if not (net.weights != 0).any():
        K, C = planner.uncoupled_paths(net, k, times)
        t_minus = math.inf
        g_target = float((net.technology.mean() - net.rho) / net.gamma)
    else:
        dec, plan = _solve_instance(net)
        K = planner.closed_loop_trajectory(plan, dec, k, times)
        C = planner.optimal_control_path(plan, k, times)
        t_minus = simulation.breakdown_time(plan, dec, k, float(run["t_max"]))
        g_target = plan.growth_rate
    traj = simulation.make_trajectory(net, times, K, C)
    t_conv = simulation.convergence_time(traj, g_target, float(run["band_fraction"]))

    header = (["t"] + [f"K_{i}" for i in range(1, net.n + 1)]
              + [f"C_{i}" for i in range(1, net.n + 1)]
              + [f"g_{i}" for i in range(1, net.n + 1)])
    rows = [header]
    for j in range(times.size):
        rows.append([times[j], *traj.states[j], *traj.controls[j],
                     *traj.growth_rates[j]])
    rows.append(["T_minus", t_minus])
    rows.append(["convergence_time", t_conv])
    _write_csv(out / "trajectory.csv", rows)
    print(f"T_minus = {fmt(t_minus)}")
    print(f"convergence_time = {fmt(t_conv)}")
    return 0


def cmd_sweep(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg)
    run = _run_params(cfg, args)
    i, j, values = _sweep_grid(run, net.n)
    t_max = float(run["t_max"])
    k = net.initial_capital

    def one(w: float):
        weights = net.weights.copy()
        weights[i, j] = weights[j, i] = w
        varied = EconomyNetwork(
            weights=weights, technology=net.technology, rho=net.rho,
            gamma=net.gamma, pref_weights=net.pref_weights,
            initial_capital=net.initial_capital,
            consumption_operator=net.consumption_operator)
        dec, plan = _solve_instance(varied)
        t_minus = simulation.breakdown_time(plan, dec, k, t_max)
        return (w, plan.lambda0, plan.growth_rate, plan.condition_holds, t_minus)

    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(one, [float(w) for w in values]))
    results.sort(key=lambda row: row[0])
    rows = [["w_value", "lambda0", "g", "condition_holds", "T_minus"]]
    rows.extend(results)
    _write_csv(out / "sweep.csv", rows)
    print(f"sweep: {len(results)} rows -> {out / 'sweep.csv'}")
    return 0


def cmd_two_node(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg)
    if net.n != 2:
        raise ValidationError("two-node command requires a 2-node network")
    if not np.allclose(net.pref_weights, 1.0):
        raise ValidationError("two-node analysis assumes pref_weights = (1, 1)")
    if not net.technology[0] <= net.technology[1]:
        raise ValidationError("two-node analysis expects A1 <= A2")
    run = _run_params(cfg, args)
    blk = run.get("sweep", {})
    if "values" in blk:
        w_grid = [float(v) for v in blk["values"]]
    elif {"min", "max", "count"} <= set(blk):
        w_grid = np.geomspace(float(blk["min"]), float(blk["max"]),
                              int(blk["count"]))
    else:
        raise ValidationError("run.sweep values are required for two-node")

    inst = two_node.TwoNodeInstance(
        A1=float(net.technology[0]), A2=float(net.technology[1]),
        rho=net.rho, gamma=net.gamma,
        k=(float(net.initial_capital[0]), float(net.initial_capital[1])))
    prof = two_node.value_profile(inst, w_grid)
    rows = [["w_bar", prof["w_bar"], "w_under", prof["w_under"],
             "classification", prof["classification"]],
            ["w", "lambda0", "g", "value", "condition_holds"]]
    for m in range(prof["w"].size):
        rows.append([prof["w"][m], prof["lambda0"][m], prof["g"][m],
                     prof["value"][m], bool(prof["condition_holds"][m])])
    _write_csv(out / "twonode.csv", rows)
    print(f"w_bar = {fmt(prof['w_bar'])}, w_under = {fmt(prof['w_under'])}, "
          f"classification = {prof['classification']}")
    return 0


def cmd_oracle(cfg: dict, args, out: Path) -> int:
    net = build_network(cfg)
    if net.n > 2:
        raise ValidationError("oracle command requires n <= 2")
    blk = cfg.get("run", {}).get("grid")
    if not blk:
        raise ValidationError("run.grid block is required for the oracle command")
    points = tuple(int(v) for v in np.atleast_1d(blk["points"]))
    lower = tuple(float(v) for v in np.atleast_1d(blk["lower"]))
    upper = tuple(float(v) for v in np.atleast_1d(blk["upper"]))
    rho = float(blk.get("rho", net.rho))
    h = blk.get("h")
    cp = int(blk.get("control_points", 48))
    region = blk.get("region")
    if region is None:
        region = [(lo + 0.25 * (up - lo), lo + 0.75 * (up - lo))
                  for lo, up in zip(lower, upper)]

    dec, plan = _solve_instance(net)
    coarse_spec = hjb.GridSpec(lower=lower, upper=upper,
                               points=tuple(max(16, p // 2) for p in points),
                               rho=rho, h=None if h is None else 2.0 * float(h),
                               control_points=cp)
    fine_spec = hjb.GridSpec(lower=lower, upper=upper, points=points, rho=rho,
                             h=None if h is None else float(h),
                             control_points=cp)
    coarse = hjb.solve_hjb_grid(net, coarse_spec)
    fine = hjb.solve_hjb_grid(net, fine_spec, warm_start=coarse)
    c_max, c_mean = hjb.compare_to_explicit(coarse, plan, region)
    f_max, f_mean = hjb.compare_to_explicit(fine, plan, region)

    rows = [["points", "max_rel_err", "mean_rel_err", "iterations", "residual"],
            [coarse_spec.points[0], c_max, c_mean, coarse.iterations,
             coarse.residual],
            [fine_spec.points[0], f_max, f_mean, fine.iterations, fine.residual],
            ["refinement_ratio", c_max / f_max if f_max > 0 else math.inf]]
    _write_csv(out / "oracle.csv", rows)
    print(f"max_rel_err = {fmt(f_max)} (coarse {fmt(c_max)}, "
          f"ratio {fmt(c_max / f_max if f_max > 0 else math.inf)})")
    return 0


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {"validate": cmd_validate, "solve": cmd_solve,
             "simulate": cmd_simulate, "sweep": cmd_sweep,
             "two-node": cmd_two_node, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="growthnet",
        description="Optimal growth on weighted graphs: closed-form solver, "
                    "simulator, and grid-based cross-validator.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to JSON config")
    parser.add_argument("--out", default="./out", help="output directory")
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--horizon", type=float, default=None)
    parser.add_argument("--band", type=float, default=None)
    parser.add_argument("--tmax", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved for randomized tooling; commands are deterministic")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out = Path(args.out if args.out != "./out" else cfg.get("output_dir", "./out"))
        return _COMMANDS[args.command](cfg, args, out)
    except GrowthnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CODE.get(type(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
