"""Command-line front end: run, sweep, and check.

``run`` executes one solve and writes a trajectory CSV plus a summary JSON;
``sweep`` repeats a solve over a list of iteration counts and reports how
fast the a-priori additive gap shrinks; ``check`` replays the bundled
invariant suites and exits nonzero if any of them fails.

Exit codes: 0 success, 1 input or configuration error, 2 invariant or
acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import desk, feasible, objective, oracle, schedule, solver
from .errors import DrsubError, InputError, InvariantError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2

_POTENTIAL_TOL = 1e-9
_GRONWALL_TOL = 1e-9
_SWEEP_SLOPE_BAND = (-1.15, -0.85)


def _strict_json_loads(text: str):
    def _reject(token):
        raise InputError(f"non-finite number {token!r} is not accepted")
    try:
        return json.loads(text, parse_constant=_reject)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON: {e}") from e


def _load_json_arg(value: str, what: str):
    """Accept either inline JSON or a path to a JSON file."""
    text = value.strip()
    if text.startswith("{") or text.startswith("["):
        return _strict_json_loads(text)
    path = Path(value)
    if not path.exists():
        raise InputError(f"{what} file not found: {value}")
    return _strict_json_loads(path.read_text())


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _parse_iters(value: str) -> list[int]:
    try:
        return [int(part) for part in str(value).split(",") if part != ""]
    except ValueError as e:
        raise InputError(f"--iters must be an integer or comma list, got {value!r}") from e


class _Experiment:
    """Resolved configuration for one run or sweep."""

    def __init__(self, args):
        cfg = {}
        if args.config:
            cfg = _load_json_arg(args.config, "config")
            if not isinstance(cfg, dict):
                raise InputError("config JSON must be an object")

        def pick(key, flag_value):
            return cfg[key] if key in cfg else flag_value

        instance = pick("instance", args.instance)
        constraint = pick("constraint", args.constraint)
        if instance is None or constraint is None:
            raise InputError("an instance and a constraint are required")
        if isinstance(instance, str):
            instance = _load_json_arg(instance, "instance")
        if isinstance(constraint, str):
            constraint = _load_json_arg(constraint, "constraint")

        self.family = pick("family", args.family)
        if self.family is None:
            raise InputError("a solver family is required")
        iters = pick("iters", args.iters)
        if iters is None:
            raise InputError("--iters is required")
        self.iters = _parse_iters(iters) if isinstance(iters, str) else (
            [int(iters)] if isinstance(iters, (int, float)) else [int(v) for v in iters])
        self.opt_mode = pick("opt", args.opt)
        self.out_dir = Path(pick("out", args.out))
        self.seed = int(pick("seed", args.seed))
        self.tol = float(pick("tol", args.tol))
        if self.tol < 0:
            raise InputError("--tol must be nonnegative")

        self.objective, self.set_function = objective.instance_from_json(instance)
        self.body = feasible.body_from_json(constraint)
        if "schedule" in cfg:
            self.schedule = schedule.schedule_from_json(cfg["schedule"], self.family)
            self.is_preset = False
        else:
            self.schedule = schedule.preset(self.family)
            self.is_preset = True
        self.spec = solver.family_spec(self.family)
        if self.objective.n != self.body.n:
            raise InputError(
                f"instance dimension {self.objective.n} != constraint dimension {self.body.n}")
        if self.spec.masked and not self.body.down_closed:
            raise InputError("the measured family requires a down-closed constraint body")
        if self.family == "monotone" and not self.objective.monotone:
            print("warning: monotone family on a non-monotone instance; "
                  "its guarantee does not apply", file=sys.stderr)

    def certificate(self) -> oracle.OptCertificate | None:
        if self.opt_mode in (None, "none"):
            return None
        if self.opt_mode == "sets":
            if self.set_function is None:
                raise InputError("--opt sets needs a coverage or table instance")
            return oracle.set_bruteforce(self.set_function, self.body)
        if self.opt_mode == "grid":
            return oracle.grid_search(self.objective, self.body)
        raise InputError(f"unknown opt mode {self.opt_mode!r}")


def _solve_once(exp: _Experiment, N: int, cert: oracle.OptCertificate | None):
    traj = solver.run(exp.objective, exp.body, exp.schedule, exp.spec, N, tol=exp.tol)
    potential = None
    if cert is not None and cert.value > 0:
        potential = solver.potential_series(traj, exp.schedule, cert.value)
    bound = solver.guarantee(exp.schedule, exp.spec, N, exp.objective.L,
                             exp.body.diameter())
    return traj, potential, bound


def _summary(exp: _Experiment, N: int, traj, potential, bound, cert) -> dict:
    opt = None if cert is None else cert.value
    return {
        "family": exp.family,
        "N": N,
        "final_value": traj.final_value,
        "opt": opt,
        "ratio_achieved": None if not opt else traj.final_value / opt,
        "ratio_guaranteed": bound.coefficient,
        "additive_gap": bound.additive,
        "min_potential_increment_margin": None if potential is None else potential.min_margin,
        "min_gronwall_margin": traj.min_gronwall_margin,
        "feasible": True,
        "opt_certificate": None if cert is None else cert.to_json(),
    }


def _check_run_invariants(traj, potential) -> list[str]:
    problems = []
    if potential is not None and potential.min_margin < -_POTENTIAL_TOL:
        problems.append(f"potential increment margin {potential.min_margin:.3e} < -1e-9")
    margin = traj.min_gronwall_margin
    if margin is not None and margin < -_GRONWALL_TOL:
        problems.append(f"headroom margin {margin:.3e} < -1e-9")
    return problems


def cmd_run(args) -> int:
    exp = _Experiment(args)
    if len(exp.iters) != 1:
        raise InputError("run takes a single --iters value; use sweep for lists")
    N = exp.iters[0]
    if N < 1:
        raise InputError("N must be >= 1")
    cert = exp.certificate()
    traj, potential, bound = _solve_once(exp, N, cert)

    exp.out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(exp.out_dir / "trajectory.csv", solver.trajectory_csv(traj, potential))
    summary = _summary(exp, N, traj, potential, bound, cert)
    problems = _check_run_invariants(traj, potential)
    _atomic_write(exp.out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    if problems:
        for p in problems:
            print(f"invariant violation: {p}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_sweep(args) -> int:
    exp = _Experiment(args)
    if len(exp.iters) < 3:
        raise InputError("sweep needs an ascending --iters list with at least 3 entries")
    if any(b <= a for a, b in zip(exp.iters, exp.iters[1:])):
        raise InputError("--iters list must be strictly ascending")
    if exp.iters[0] < 1:
        raise InputError("N must be >= 1")
    cert = exp.certificate()
    opt = None if cert is None else cert.value

    exp.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    problems = []
    for N in exp.iters:
        traj, potential, bound = _solve_once(exp, N, cert)
        _atomic_write(exp.out_dir / f"trajectory_N{N}.csv",
                      solver.trajectory_csv(traj, potential))
        achieved = traj.final_value / opt if opt else traj.final_value
        rows.append((N, achieved, bound.coefficient, bound.additive))
        problems.extend(f"N={N}: {p}" for p in _check_run_invariants(traj, potential))

    lines = ["N,achieved,guaranteed,additive"]
    for N, achieved, guaranteed, additive in rows:
        lines.append(f"{N},{achieved:.17g},{guaranteed:.17g},{additive:.17g}")
    _atomic_write(exp.out_dir / "sweep.csv", "\n".join(lines) + "\n")

    log_n = np.log([r[0] for r in rows])
    log_add = np.log([r[3] for r in rows])
    slope = float(np.polyfit(log_n, log_add, 1)[0])
    print("\n".join(lines))
    print(f"additive log-log slope: {slope:.6f}")
    if exp.is_preset and not _SWEEP_SLOPE_BAND[0] <= slope <= _SWEEP_SLOPE_BAND[1]:
        problems.append(f"additive slope {slope:.4f} outside {_SWEEP_SLOPE_BAND}")
    if problems:
        for p in problems:
            print(f"invariant violation: {p}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# --- self-check suites -------------------------------------------------------------


def _suite_schedules(corrupt: bool) -> tuple[bool, str]:
    expected = {
        "monotone": 1.0 - math.exp(-1.0),
        "measured": math.exp(-1.0),
        "general": 0.25,
        "general-exp": 0.25,
        "general-linear": 0.25,
    }
    ratios = []
    for family, want in expected.items():
        s = schedule.preset(family)
        if corrupt and family == "monotone":
            s = schedule.Schedule(s.family, s.T,
                                  lambda t: 2.0 * np.exp(t), s.b,
                                  lambda t: 2.0 * np.exp(t), s.b_dot)
        report = schedule.validate(s)
        if not report.ok:
            names = ", ".join(c.name for c in report.failures())
            return False, f"{family}: boundary/monotonicity violation ({names})"
        r = schedule.ratio(s)
        ratios.append(r)
        if abs(r - want) > 1e-12:
            return False, f"{family}: ratio {r} != {want}"
        grid = schedule.Grid(100, s.T)
        if schedule.coupling_residual(s, grid) > 1e-10:
            return False, f"{family}: coupling residual too large"
    for variant, t_star in (("general", 1.0), ("general-exp", 2.0 * math.log(2.0)),
                            ("general-linear", 3.0)):
        s = schedule.preset(variant)
        tt = np.linspace(0.0, s.T, 10001)
        curve = schedule.ratio_curve(variant, tt)
        if np.max(curve) > 0.25 + 1e-12:
            return False, f"{variant}: ratio curve exceeds 1/4"
        if abs(tt[int(np.argmax(curve))] - t_star) > s.T / 10000 + 1e-12:
            return False, f"{variant}: ratio curve peaks away from t={t_star}"
    table = ", ".join(f"{r:.6f}" for r in ratios[:3])
    return True, f"preset ratios {table}"


def _suite_objective_dr(rng) -> tuple[bool, str]:
    worst = np.inf
    for inst in desk.bundled_instances():
        f = inst.objective
        for _ in range(200):
            res = objective.check_dr_inequality(f, rng.uniform(size=f.n), rng.uniform(size=f.n))
            worst = min(worst, res)
    return worst >= -1e-9, f"min DR residual {worst:.3e}"


def _suite_objective_grad(rng) -> tuple[bool, str]:
    worst = 0.0
    for inst in desk.bundled_instances():
        f = inst.objective
        for _ in range(50):
            x = rng.uniform(size=f.n)
            g = f.grad(x)
            fd = objective.finite_diff_grad(f, x, 1e-4)
            worst = max(worst, float(np.max(np.abs(g - fd)) / (1.0 + np.max(np.abs(g)))))
    return worst <= 1e-5, f"max gradient mismatch {worst:.3e}"


def _suite_multilinear() -> tuple[bool, str]:
    worst = 0.0
    for sf in (desk.coverage_two_sets(), desk.coverage_three_sets()):
        F = objective.multilinear_extension(sf)
        for mask in range(1 << sf.m):
            x = np.array([(mask >> i) & 1 for i in range(sf.m)], dtype=float)
            worst = max(worst, abs(F.value(x) - sf.value(mask)))
    return worst <= 1e-12, f"max lattice mismatch {worst:.3e}"


def _suite_lmo(rng) -> tuple[bool, str]:
    bodies = [inst.body for inst in desk.bundled_instances()]
    bodies.append(feasible.PackingBody(np.array([[1.0, 1.0], [2.0, 1.0]]),
                                       np.array([1.0, 2.0])))
    worst = 0.0
    for C in bodies:
        for _ in range(100):
            g = rng.normal(size=C.n)
            ref, _ = feasible.lmo_bruteforce(C, g)
            worst = max(worst, abs(float(g @ C.lmo(g)) - ref))
            cap = rng.uniform(size=C.n)
            ref_m, _ = feasible.lmo_bruteforce(C, g, cap)
            worst = max(worst, abs(float(g @ C.masked_lmo(g, cap)) - ref_m))
    return worst <= 1e-9, f"max oracle gap vs enumeration {worst:.3e}"


def _suite_simplex(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        A = rng.uniform(0.0, 1.0, size=(m, n))
        b = rng.uniform(0.5, 2.0, size=m)
        u = rng.uniform(0.2, 1.0, size=n)
        c = rng.normal(size=n)
        x, val = feasible.simplex_solve(feasible.LpProblem(c, A, b, u))
        rows = np.vstack([A, np.eye(n), -np.eye(n)])
        rhs = np.concatenate([b, u, np.zeros(n)])
        ref = max(float(c @ v) for v in feasible.basic_solutions(rows, rhs))
        worst = max(worst, abs(val - ref))
    return worst <= 1e-9, f"max simplex gap vs basic solutions {worst:.3e}"


def _suite_g_terms() -> tuple[bool, str]:
    worst = 0.0
    for family in ("monotone", "measured", "general"):
        s = schedule.preset(family)
        spec = solver.family_spec(family)
        for N in (1, 7, 50, 500):
            G = solver.g_series(s, spec, N)
            if family == "monotone":
                worst = max(worst, float(np.max(np.abs(G))))
            else:
                worst = max(worst, float(np.max(G)))
    return worst <= 1e-12, f"max coupling-term excess {worst:.3e}"


def _desk_opt(inst: desk.DeskInstance) -> float:
    if inst.set_function is not None:
        return oracle.set_bruteforce(inst.set_function, inst.body).value
    return oracle.grid_search(inst.objective, inst.body).value


def _suite_potential() -> tuple[bool, str]:
    worst = np.inf
    for inst in desk.bundled_instances():
        opt = _desk_opt(inst)
        if opt <= 0:
            continue
        for family in ("monotone", "measured", "general"):
            if family == "monotone" and not inst.objective.monotone:
                continue
            s = schedule.preset(family)
            spec = solver.family_spec(family)
            for N in (10, 100):
                traj = solver.run(inst.objective, inst.body, s, spec, N)
                series = solver.potential_series(traj, s, opt)
                worst = min(worst, series.min_margin)
    return worst >= -1e-9, f"min potential increment margin {worst:.3e}"


def _suite_gronwall() -> tuple[bool, str]:
    worst = np.inf
    for inst in desk.bundled_instances():
        for family in ("measured", "general"):
            s = schedule.preset(family)
            spec = solver.family_spec(family)
            for N in (1, 50, 500):
                traj = solver.run(inst.objective, inst.body, s, spec, N)
                worst = min(worst, solver.gronwall_check(traj))
    return worst >= -1e-9, f"min headroom margin {worst:.3e}"


def _suite_guarantee() -> tuple[bool, str]:
    worst = np.inf
    for inst in desk.bundled_instances():
        opt = _desk_opt(inst)
        if opt <= 0:
            continue
        for family in ("monotone", "measured", "general"):
            if family == "monotone" and not inst.objective.monotone:
                continue
            s = schedule.preset(family)
            spec = solver.family_spec(family)
            traj = solver.run(inst.objective, inst.body, s, spec, 200)
            bound = solver.guarantee(s, spec, 200, inst.objective.L, inst.body.diameter())
            worst = min(worst, traj.final_value - (bound.coefficient * opt - bound.additive))
        for N in (16, 32, 64, 128):
            for family in ("monotone", "measured", "general"):
                spec = solver.family_spec(family)
                s = schedule.preset(family)
                a1 = solver.guarantee(s, spec, N, 1.0, 1.0).additive
                a2 = solver.guarantee(s, spec, 2 * N, 1.0, 1.0).additive
                if a2 > 0.6 * a1:
                    return False, f"{family}: additive({2*N}) > 0.6 additive({N})"
    return worst >= -1e-9, f"min guarantee slack {worst:.3e}"


def _suite_determinism() -> tuple[bool, str]:
    inst = desk.bundled_instances()[0]
    s = schedule.preset("monotone")
    spec = solver.family_spec("monotone")
    t1 = solver.run(inst.objective, inst.body, s, spec, 50)
    t2 = solver.run(inst.objective, inst.body, s, spec, 50)
    same = solver.trajectory_csv(t1) == solver.trajectory_csv(t2)
    return same, "two runs render identical CSV" if same else "CSV mismatch between runs"


def cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    suites = [
        ("schedule-presets", lambda: _suite_schedules(args.corrupt_preset)),
        ("objective-dr", lambda: _suite_objective_dr(rng)),
        ("objective-gradient", lambda: _suite_objective_grad(rng)),
        ("objective-multilinear", _suite_multilinear),
        ("feasible-lmo", lambda: _suite_lmo(rng)),
        ("feasible-simplex", lambda: _suite_simplex(rng)),
        ("solver-coupling", _suite_g_terms),
        ("solver-potential", _suite_potential),
        ("solver-headroom", _suite_gronwall),
        ("solver-guarantee", _suite_guarantee),
        ("solver-determinism", _suite_determinism),
    ]
    failures = 0
    for name, fn in suites:
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drsub",
        description="Frank-Wolfe solvers for DR-submodular maximization, "
                    "with runtime verification of their guarantees.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--instance", help="instance JSON (inline or path)")
        p.add_argument("--constraint", help="constraint JSON (inline or path)")
        p.add_argument("--family", choices=schedule.PRESET_FAMILIES,
                       help="solver family / schedule preset")
        p.add_argument("--iters", help="iteration count (run) or comma list (sweep)")
        p.add_argument("--opt", choices=("none", "sets", "grid"), default="none",
                       help="ground-truth oracle for ratio and potential telemetry")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized checks (solves are deterministic)")
        p.add_argument("--tol", type=float, default=feasible.FEASIBILITY_TOL,
                       help="feasibility tolerance")
        p.add_argument("--config", help="config JSON overriding the flags above")

    p_run = sub.add_parser("run", help="solve once; write trajectory.csv and summary.json")
    add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="solve over an N list; write sweep.csv")
    add_common(p_sweep)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_check = sub.add_parser("check", help="run the bundled invariant suites")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--corrupt-preset", action="store_true",
                         help="testing hook: corrupt the monotone preset to a_T = 2e")
    p_check.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvariantError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except DrsubError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
