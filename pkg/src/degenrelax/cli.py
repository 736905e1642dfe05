"""Command-line front end: analyze, hat, plot, pair, poincare, relax, counterexample, a1, run."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .degeneracy import DEFAULT_MAX_INTERVALS, DEFAULT_RESOLUTION, detect_intervals
from .errors import DegenRelaxError, EmptyDecomposition, SpecParseError
from .functions import QuadratureConfig, function_from_spec, load_spec_file, weight_from_spec
from .hat import build_hat, check_hat_properties
from .svg import emit_plot

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_num(x) for x in v.tolist()]
    return v


def write_json(path: Path, obj) -> str:
    text = json.dumps(_num(obj), indent=2) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return text


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])


def _load_weight(path):
    if path is None:
        raise InputError("--weight is required")
    try:
        return weight_from_spec(load_spec_file(path))
    except FileNotFoundError as exc:
        raise InputError(f"weight spec not found: {path}") from exc


def _load_function(path, flag="--function"):
    if path is None:
        raise InputError(f"{flag} is required")
    try:
        return function_from_spec(load_spec_file(path))
    except FileNotFoundError as exc:
        raise InputError(f"function spec not found: {path}") from exc


def _quad(args) -> QuadratureConfig:
    panels = args.panels if args.panels is not None else 64
    try:
        return QuadratureConfig(rule=args.rule, panels=panels)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _setup(args):
    w = _load_weight(args.weight)
    dec = detect_intervals(w, resolution=args.resolution, max_intervals=args.max_intervals)
    return w, dec


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    w = _load_weight(args.weight)
    out = Path(args.out)
    try:
        dec = detect_intervals(w, resolution=args.resolution, max_intervals=args.max_intervals)
    except EmptyDecomposition:
        write_csv(out / "intervals.csv", ["index", "a_i", "b_i"], [])
        print(write_json(out / "summary.json", {"n_w": 0, "truncated": False, "intervals": []}), end="")
        return EXIT_OK
    rows = [(i, I.lo, I.hi) for i, I in enumerate(dec.intervals)]
    write_csv(out / "intervals.csv", ["index", "a_i", "b_i"], rows)
    summary = {"n_w": dec.n_w if dec.n_w is not None else "truncated", "truncated": dec.truncated,
               "intervals": [[I.lo, I.hi] for I in dec.intervals],
               "zero_set_points": list(dec.zero_set_points)}
    print(write_json(out / "summary.json", summary), end="")
    return EXIT_OK


def _hat_samples(w, hw, n):
    xs = np.linspace(w.domain.lo, w.domain.hi, n)
    with np.errstate(all="ignore"):
        return xs, w.f(xs), hw(xs)


def cmd_hat(args) -> int:
    w, dec = _setup(args)
    hw = build_hat(w, dec, density=args.density)
    xs, wv, hv = _hat_samples(w, hw, args.points)
    out = Path(args.out)
    write_csv(out / "hat.csv", ["x", "w", "w_hat"], zip(xs, wv, hv))
    emit_plot([("w", xs, wv), ("w_hat", xs, hv)], out / "hat.svg", title="w and w_hat")
    rep = check_hat_properties(hw, w)
    summary = {"verdict": rep.passed, "clauses": rep.clauses,
               "intervals": [{"a": h.a, "b": h.b, "middle_value": h.middle_value,
                              "value_a": h.value_a, "value_b": h.value_b} for h in hw.parts]}
    print(write_json(out / "hat.json", summary), end="")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_plot(args) -> int:
    w, dec = _setup(args)
    hw = build_hat(w, dec, density=args.density)
    xs, wv, hv = _hat_samples(w, hw, args.points)
    path = emit_plot([("w", xs, wv), ("w_hat", xs, hv)], Path(args.out) / "figure.svg",
                     title="weight and auxiliary weight")
    print(path)
    return EXIT_OK


def cmd_pair(args) -> int:
    from .pairing import pairing_report

    w = _load_weight(args.weight)
    u = _load_function(args.function)
    phi = _load_function(args.test_function, "--test-function")
    rep = pairing_report(w, u, phi, _quad(args))
    obj = {"test_value": rep.test_value, "tv": rep.tv, "quadrature_error": rep.quadrature_error,
           "jump_in_support": rep.jump_in_support}
    print(write_json(Path(args.out) / "pairing.json", obj), end="")
    return EXIT_OK


def cmd_poincare(args) -> int:
    from .poincare import poincare_gap, random_piecewise_cubics

    w, dec = _setup(args)
    hw = build_hat(w, dec, density=args.density)
    q = _quad(args)
    corpus = [_load_function(p) for p in args.function]
    corpus += random_piecewise_cubics(dec, args.count, seed=args.seed)
    rows, failures = [], []
    for k, u in enumerate(corpus):
        r = poincare_gap(w, hw, dec, u, q)
        rows.append((k, r.lhs, r.rhs, r.margin))
        if not r.passed:
            failures.append(k)
    out = Path(args.out)
    write_csv(out / "poincare.csv", ["id", "lhs", "rhs", "margin"], rows)
    verdict = not failures
    print(write_json(out / "summary.json", {"verdict": verdict, "count": len(rows), "failures": failures,
                                            "seed": args.seed}), end="")
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_relax(args) -> int:
    from .relaxation import lsc_probe, recovery_schedule, relaxed_functional

    w, dec = _setup(args)
    hw = build_hat(w, dec, density=args.density)
    u = _load_function(args.function)
    q = _quad(args)
    rel = relaxed_functional(w, u, dec, hw, q)
    out = Path(args.out)
    obj = {"finite": rel.finite, "relaxed_value": rel.value if rel.finite else "inf"}
    if not rel.finite:
        write_csv(out / "relax.csv", ["h", "l1_hat_error", "energy", "energy_gap"], [])
        obj["verdict"] = True
        print(write_json(out / "verdict.json", obj), end="")
        return EXIT_OK
    schedule = [int(s) for s in args.schedule.split(",")]
    steps = recovery_schedule(w, hw, dec, u, schedule, q)
    write_csv(out / "relax.csv", ["h", "l1_hat_error", "energy", "energy_gap"],
              [(s.h, s.l1_hat_error, s.energy, s.energy_gap) for s in steps])
    slack = 1.05
    mono = all(b.l1_hat_error <= slack * a.l1_hat_error and b.energy_gap <= slack * a.energy_gap
               for a, b in zip(steps, steps[1:]))
    final_ok = steps[-1].energy_gap <= 1e-2 * (1 + rel.value)
    lsc = lsc_probe(w, hw, dec, [s.u_h for s in steps], u, q)
    obj.update({"nonincreasing": mono, "final_gap_ok": final_ok, "lsc_pass": lsc.passed,
                "verdict": mono and final_ok and lsc.passed})
    print(write_json(out / "verdict.json", obj), end="")
    return EXIT_OK if obj["verdict"] else EXIT_FAIL


def cmd_counterexample(args) -> int:
    from .relaxation import counterexample_diagnostics

    sched = [H for H in (10, 20, 50, 100, 200) if H < args.blocks] + [args.blocks]
    d = counterexample_diagnostics(args.beta, args.gamma, sched, q=_quad(args), u_power=args.u_power)
    out = Path(args.out)
    write_csv(out / "counterexample.csv", ["H", "S_uw", "S_uhat", "tv_K"],
              zip(d.H, d.S_uw, d.S_uhat, d.tv_K))
    diffs = [abs(b - a) for a, b in zip(d.S_uhat, d.S_uhat[1:])]
    obj = {"beta": args.beta, "gamma": args.gamma, "blocks": args.blocks, "u_power": d.u_power,
           "fitted_growth_exponent": d.fitted_growth_exponent, "expected_exponent": 1 - args.gamma,
           "block_term_slope": d.block_term_slope,
           "S_uhat_last_difference": diffs[-1] if diffs else 0.0,
           "tv_K_spread": max(d.tv_K) - min(d.tv_K)}
    print(write_json(out / "counterexample.json", obj), end="")
    return EXIT_OK


def cmd_a1(args) -> int:
    from .muckenhoupt import a1_constant, local_growth_check

    w = _load_weight(args.weight)
    rep = a1_constant(w, centers=args.centers)
    growth = local_growth_check(w, args.q_exponent)
    out = Path(args.out)
    write_csv(out / "a1.csv", ["x", "r", "ratio"], rep.table)
    obj = {"best_c": rep.best_c, "violating_ball": list(rep.violating_ball) if rep.violating_ball else None,
           "resolution": rep.resolution, "q_exponent": args.q_exponent,
           "growth_constant": growth.best_c, "growth_refinements": list(growth.refinements)}
    print(write_json(out / "a1.json", obj), end="")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "hat": cmd_hat, "plot": cmd_plot, "pair": cmd_pair,
            "poincare": cmd_poincare, "relax": cmd_relax, "counterexample": cmd_counterexample,
            "a1": cmd_a1}


def _add_common(p, many_functions=False):
    p.add_argument("--weight", help="weight spec (JSON)")
    if many_functions:
        p.add_argument("--function", nargs="*", default=[], help="extra function specs (JSON)")
    else:
        p.add_argument("--function", help="function spec (JSON)")
    p.add_argument("--test-function", dest="test_function", help="test function spec (JSON)")
    p.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    p.add_argument("--max-intervals", dest="max_intervals", type=int, default=DEFAULT_MAX_INTERVALS)
    p.add_argument("--panels", type=int, default=None)
    p.add_argument("--rule", choices=("simpson", "trapezoid"), default="simpson")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=int, default=2048)
    p.add_argument("--points", type=int, default=801)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degenrelax", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("analyze", "hat", "plot", "pair", "relax", "a1"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "relax":
            p.add_argument("--schedule", default="8,16,32,64")
        if name == "a1":
            p.add_argument("--centers", type=int, default=201)
            p.add_argument("--q-exponent", dest="q_exponent", type=float, default=2.0)
    p = sub.add_parser("poincare")
    _add_common(p, many_functions=True)
    p.add_argument("--count", type=int, default=100)
    p = sub.add_parser("counterexample")
    _add_common(p)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--blocks", type=int, default=200)
    p.add_argument("--u-power", dest="u_power", type=float, default=3.0)
    p = sub.add_parser("run")
    p.add_argument("--config", required=True)
    return ap


def _config_argv(path) -> list[str]:
    """Turn a RunConfig JSON document into an argument vector; relative paths resolve beside it."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise InputError(f"config not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(cfg, dict) or cfg.get("command") not in COMMANDS:
        raise InputError(f"config needs a 'command' in {sorted(COMMANDS)}")
    base = path.parent
    argv = [cfg["command"]]
    for key, val in cfg.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if key in ("weight", "function", "test_function", "out"):
            vals = val if isinstance(val, list) else [val]
            resolved = [str(base / v) for v in vals]
            argv += [flag, *resolved]
        elif isinstance(val, bool):
            if val:
                argv.append(flag)
        else:
            argv += [flag, str(val)]
    return argv


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "run":
            return main(_config_argv(args.config))
        return COMMANDS[args.command](args)
    except (InputError, SpecParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenRelaxError as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
