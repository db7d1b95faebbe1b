"""Seeded Monte-Carlo sweeps, CSV persistence, summary statistics, and the
``swipt`` command-line entry point.

Row schema (fixed column order):
    sweep_kind, sweep_value, trial, scheme, objective_watts, iterations,
    converged, rank_SE, feasible, runtime_ms, seed
Booleans are written as ``true``/``false``; floats use ``repr`` so parsing
recovers them bit-exactly. Apart from the wall-clock ``runtime_ms`` column,
output bytes are a pure function of (spec, seed) for a fixed floating-point
environment. A sweep also writes ``<out>.summary.csv`` with per-(value,
scheme) means and standard errors over feasible trials.

Convergence traces use the two-column schema ``iteration,objective_watts``
(an infeasible scenario yields the single row ``error,infeasible``).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import generate, make_rng
from .metrics import ActiveSolution, PhaseSolution
from .optimizer import RunRecord, Scheme, compare_schemes, optimize
from .scenario import (
    SystemConfig,
    db_to_linear,
    default_config,
    load_config,
    watts_to_dbm,
)

CSV_COLUMNS = (
    "sweep_kind", "sweep_value", "trial", "scheme", "objective_watts",
    "iterations", "converged", "rank_SE", "feasible", "runtime_ms", "seed",
)

SUMMARY_COLUMNS = (
    "sweep_kind", "sweep_value", "scheme", "n_trials", "n_feasible",
    "mean_objective_watts", "stderr_objective_watts", "mean_objective_dbm",
)


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: sweep kind, grid (gamma in dB, power in watts),
    Monte-Carlo size, schemes to run, base config, master seed."""

    kind: str                      # 'convergence' | 'gamma' | 'power'
    grid: tuple[float, ...]
    n_trials: int
    schemes: tuple[Scheme, ...]
    base: SystemConfig
    seed: int

    def __post_init__(self):
        if self.kind not in ("convergence", "gamma", "power"):
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        if self.kind != "convergence":
            if not self.grid:
                raise ValueError("grid must be non-empty")
            if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
                raise ValueError("grid must be strictly increasing")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


def config_at(base: SystemConfig, kind: str, value: float) -> SystemConfig:
    if kind == "gamma":
        return replace(base, Gamma=tuple(db_to_linear(value) for _ in range(base.K_I)))
    if kind == "power":
        return replace(base, P=value)
    return base


@dataclass
class CsvRow:
    sweep_kind: str
    sweep_value: float
    trial: int
    scheme: str
    objective_watts: float
    iterations: int
    converged: bool
    rank_SE: int
    feasible: bool
    runtime_ms: float
    seed: int

    def as_strings(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out


def _rank_se_of(rec: RunRecord) -> int:
    if rec.rank_trace and rec.rank_trace[-1].get("S_E") is not None:
        return int(rec.rank_trace[-1]["S_E"])
    return 0


def _row_from_record(spec: SweepSpec, value: float, trial: int, rec: RunRecord) -> CsvRow:
    return CsvRow(
        sweep_kind=spec.kind,
        sweep_value=value,
        trial=trial,
        scheme=rec.scheme.value,
        objective_watts=rec.objective,
        iterations=rec.iterations,
        converged=rec.converged,
        rank_SE=_rank_se_of(rec),
        feasible=not rec.infeasible,
        runtime_ms=rec.wall_seconds * 1000.0,
        seed=spec.seed,
    )


def _run_trial(args: tuple[SweepSpec, int]) -> list[CsvRow]:
    """All grid points for one trial on matched channels. Grid points are
    chained (descending gamma, ascending power) so each run warm-starts from a
    solution that stays feasible, making per-trial curves exactly monotone."""
    spec, trial = args
    ch = generate(spec.base, make_rng(spec.seed, 0, trial))
    order = sorted(range(len(spec.grid)),
                   key=lambda k: -spec.grid[k] if spec.kind == "gamma" else spec.grid[k])
    chain: dict[Scheme, tuple[ActiveSolution, PhaseSolution]] = {}
    by_value: dict[int, dict[Scheme, RunRecord]] = {}
    for pos in order:
        cfg_v = config_at(spec.base, spec.kind, spec.grid[pos])
        recs = compare_schemes(
            ch, cfg_v, make_rng(spec.seed, 1, trial, pos),
            init_map=chain, schemes=spec.schemes, seed=spec.seed,
        )
        by_value[pos] = recs
        for scheme, rec in recs.items():
            if not rec.infeasible and rec.final_active is not None:
                chain[scheme] = (rec.final_active, rec.final_phases)
    rows = []
    for pos in range(len(spec.grid)):
        for scheme in spec.schemes:
            rows.append(_row_from_record(spec, spec.grid[pos], trial, by_value[pos][scheme]))
    return rows


def run_sweep(spec: SweepSpec, workers: int | None = None) -> tuple[list[CsvRow], list[dict]]:
    """Execute the sweep (trials in parallel over a bounded worker pool) and
    return rows in deterministic (value, trial, scheme) order plus summary."""
    if spec.kind == "convergence":
        raise ValueError("use convergence_trace for kind='convergence'")
    tasks = [(spec, t) for t in range(spec.n_trials)]
    if workers is None:
        workers = min(spec.n_trials, os.cpu_count() or 1)
    if workers > 1 and spec.n_trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_run_trial, tasks))
    else:
        per_trial = [_run_trial(t) for t in tasks]

    rows: list[CsvRow] = []
    for pos in range(len(spec.grid)):
        for trial in range(spec.n_trials):
            base_idx = pos * len(spec.schemes)
            rows.extend(per_trial[trial][base_idx:base_idx + len(spec.schemes)])
    return rows, summarize(rows)


def summarize(rows: list[CsvRow]) -> list[dict]:
    """Per-(value, scheme) mean and standard error of the objective over
    feasible trials; infeasible trials are excluded and counted."""
    keys = []
    groups: dict[tuple[float, str], list[CsvRow]] = {}
    for r in rows:
        key = (r.sweep_value, r.scheme)
        if key not in groups:
            groups[key] = []
            keys.append(key)
        groups[key].append(r)
    out = []
    for value, scheme in keys:
        grp = groups[(value, scheme)]
        vals = np.array([r.objective_watts for r in grp if r.feasible], float)
        n_feas = int(vals.size)
        mean = float(vals.mean()) if n_feas else float("nan")
        stderr = float(vals.std(ddof=1) / np.sqrt(n_feas)) if n_feas > 1 else 0.0
        out.append({
            "sweep_kind": grp[0].sweep_kind,
            "sweep_value": value,
            "scheme": scheme,
            "n_trials": len(grp),
            "n_feasible": n_feas,
            "mean_objective_watts": mean,
            "stderr_objective_watts": stderr,
            "mean_objective_dbm": watts_to_dbm(mean) if n_feas and mean > 0 else float("nan"),
        })
    return out


def convergence_trace(cfg: SystemConfig, seed: int) -> list[tuple[int, float]]:
    """Single run of the alternating scheme; returns (iteration, objective)
    pairs, empty if the scenario is infeasible."""
    ch = generate(cfg, make_rng(seed, 0, 0))
    rec = optimize(ch, cfg, Scheme.Proposed, make_rng(seed, 1, 0, 0), seed=seed)
    return [(k, v) for k, v in enumerate(rec.trace)]


def write_rows_csv(rows: list[CsvRow], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_strings())


def write_summary_csv(summary: list[dict], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summary:
        w.writerow([repr(s[c]) if isinstance(s[c], float) else str(s[c]) for c in SUMMARY_COLUMNS])


def write_trace_csv(trace: list[tuple[int, float]], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("iteration", "objective_watts"))
    if not trace:
        w.writerow(("error", "infeasible"))
        return
    for it, obj in trace:
        w.writerow((it, repr(obj)))


# --- self-check battery ------------------------------------------------------

def _check_battery() -> int:
    """Quick invariant checks on small instances; returns the failure count."""
    import numpy.linalg as la

    from . import active_opt, conic, passive_opt
    from .metrics import min_received_power

    failures = 0

    def report(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
        failures += 0 if ok else 1

    rng = np.random.default_rng(7)
    # conic eigenvalue oracle
    ok = True
    for _ in range(5):
        n = 4
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = (A + A.conj().T) / 2
        prob = conic.ConicProblem(
            psd_dims=(n,), scalar_nonneg=(),
            objective=conic.Functional(blocks={0: A}),
            constraints=[conic.Constraint(
                conic.Functional(blocks={0: np.eye(n, dtype=complex)}), "==", 1.0)],
        )
        sol = conic.solve(prob, 1e-8)
        lam_max = la.eigvalsh(A)[-1]
        ok &= sol.status == "optimal" and abs(sol.objective - lam_max) < 1e-6 * (1 + abs(lam_max))
    report("conic eigenvalue oracle", ok)

    # lifted equality on random tuples
    from .metrics import received_power

    cfg = default_config(M=3, N=5, K_I=1, K_E=1)
    ch = generate(cfg, make_rng(3, 0, 0))
    w = (rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))) / 10
    V = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    act = ActiveSolution(w=w, S_E=(V @ V.conj().T) / 50, t=0.0)
    ld = passive_opt.build_lifted(ch, act, cfg)
    worst = 0.0
    for _ in range(50):
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.N + 1))
        theta = np.mod(-np.angle(phi[:-1] * np.conj(phi[-1])), 2 * np.pi)
        Phi = np.outer(phi, phi.conj())
        lifted = float(np.real(np.trace((ld.eh_info_blocks[0].sum(0) + ld.eh_energy_blocks[0].sum(0)) @ Phi)))
        lifted += float(np.sum(np.abs(ld.eh_info_direct) ** 2) + np.sum(np.abs(ld.eh_energy_direct) ** 2))
        direct = received_power(ch, theta, act, 0)
        worst = max(worst, abs(lifted - direct) / max(direct, 1e-30))
    report("lifted vs direct received power", worst < 1e-9, f"max rel err {worst:.2e}")

    # channel calibration
    from .channel import draw_rayleigh
    z = draw_rayleigh(make_rng(0, 9), 100, 100, 2.0)
    m2 = float(np.mean(np.abs(z) ** 2))
    report("rayleigh second moment", abs(m2 - 2.0) < 0.1, f"mean |x|^2 = {m2:.3f}")

    # tiny end-to-end run: monotone trace + relaxation bound
    cfg2 = default_config(M=2, N=4, K_I=1, K_E=1)
    ch2 = generate(cfg2, make_rng(1, 0, 0))
    rec = optimize(ch2, cfg2, Scheme.Proposed, make_rng(1, 1))
    mono = all(b >= a - 1e-15 for a, b in zip(rec.trace, rec.trace[1:]))
    report("alternating trace monotone", (not rec.infeasible) and mono,
           f"iters={rec.iterations}")
    if not rec.infeasible:
        sdr_prob = active_opt.build_active_sdr(ch2, rec.final_phases.theta, cfg2)
        bound = conic.solve(sdr_prob, 1e-8).objective
        obj = min_received_power(ch2, rec.final_phases.theta, rec.final_active)
        report("relaxation dominates recovered objective",
               obj <= bound * (1 + 1e-6), f"obj={obj:.3e} bound={bound:.3e}")
    return failures


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swipt", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep or convergence trace")
    run.add_argument("--config", help="JSON config file (default: reference scenario)")
    run.add_argument("--sweep", required=True, choices=["convergence", "gamma", "power"])
    run.add_argument("--grid", default="",
                     help="comma-separated grid (gamma in dB / power in watts)")
    run.add_argument("--trials", type=int, default=50)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--schemes", default="all",
                     help="comma-separated scheme names or 'all'")

    sub.add_parser("check", help="run the invariant self-checks on small instances")

    args = parser.parse_args(argv)
    if args.command == "check":
        return 1 if _check_battery() else 0

    cfg = load_config(args.config) if args.config else default_config()
    if args.sweep == "convergence":
        trace = convergence_trace(cfg, args.seed)
        with open(args.out, "w", newline="") as f:
            write_trace_csv(trace, f)
        if not trace:
            print("infeasible scenario: wrote error row", file=sys.stderr)
            return 2
        print(f"wrote {len(trace)} trace rows to {args.out}")
        return 0

    if args.schemes == "all":
        schemes = tuple(Scheme)
    else:
        schemes = tuple(Scheme(s) for s in args.schemes.split(","))
    grid = tuple(float(x) for x in args.grid.split(",") if x)
    spec = SweepSpec(kind=args.sweep, grid=grid, n_trials=args.trials,
                     schemes=schemes, base=cfg, seed=args.seed)
    rows, summary = run_sweep(spec, workers=args.workers)
    with open(args.out, "w", newline="") as f:
        write_rows_csv(rows, f)
    with open(_summary_path(args.out), "w", newline="") as f:
        write_summary_csv(summary, f)
    n_infeasible = sum(1 for r in rows if not r.feasible)
    print(f"wrote {len(rows)} rows to {args.out} "
          f"({n_infeasible} infeasible trials excluded from means)")
    return 0


def _summary_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}.summary{ext or '.csv'}"


if __name__ == "__main__":
    sys.exit(main())
