"""Render figures from swipt sweep CSVs.

Input contracts (the experiment harness's documented formats):

* sweep rows, header exactly
  ``sweep_kind,sweep_value,trial,scheme,objective_watts,iterations,converged,
  rank_SE,feasible,runtime_ms,seed`` -- one row per (value, trial, scheme),
  booleans ``true``/``false``, floats parseable by ``float``;
* convergence traces, header ``iteration,objective_watts`` with an optional
  single ``error,infeasible`` row for unsatisfiable scenarios.

The renderer performs no numeric work beyond the documented per-(value,
scheme) mean / standard error over feasible rows (bit-identical to the
harness's own summary) and the requested axis scaling.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "swipt-plots"   # deterministic SVG ids
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

ROW_COLUMNS = (
    "sweep_kind", "sweep_value", "trial", "scheme", "objective_watts",
    "iterations", "converged", "rank_SE", "feasible", "runtime_ms", "seed",
)

SCHEME_LABELS = {
    "Proposed": "Joint design with IRS (proposed)",
    "InfoOnlyWithIrs": "Information beamforming only with IRS",
    "NoIrsWithEnergy": "Conventional design without IRS",
    "InfoOnlyNoIrs": "Information beamforming only without IRS",
}

X_LABELS = {
    "gamma": "SINR threshold at ID receivers (dB)",
    "power": "Transmit power at the AP (W)",
}


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str                 # 'convergence' | 'gamma' | 'power'
    out_path: str
    scale: str = "linear"     # 'linear' (watts) | 'dbm'

    def __post_init__(self):
        if self.kind not in ("convergence", "gamma", "power"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.scale not in ("linear", "dbm"):
            raise ValueError(f"unknown scale {self.scale!r}")


def _to_dbm(w: float) -> float:
    return 10.0 * math.log10(w * 1000.0) if w > 0 else float("nan")


def _read_sweep_rows(path: str):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != ROW_COLUMNS:
            missing = set(ROW_COLUMNS) - set(header or ())
            raise ValueError(
                f"sweep CSV header mismatch in {path}: expected {','.join(ROW_COLUMNS)}"
                + (f" (missing {sorted(missing)})" if missing else ""))
        rows = []
        for rec in reader:
            row = dict(zip(ROW_COLUMNS, rec))
            row["sweep_value"] = float(row["sweep_value"])
            row["objective_watts"] = float(row["objective_watts"])
            row["feasible"] = row["feasible"] == "true"
            rows.append(row)
    return rows


def _summaries(rows):
    """Per-(value, scheme) mean and standard error over feasible rows, in
    file order -- the same arithmetic the harness uses for its summary CSV."""
    keys, groups = [], {}
    for r in rows:
        key = (r["sweep_value"], r["scheme"])
        if key not in groups:
            groups[key] = []
            keys.append(key)
        if r["feasible"]:
            groups[key].append(r["objective_watts"])
    out = {}
    for key in keys:
        vals = np.array(groups[key], float)
        if vals.size == 0:
            out[key] = (float("nan"), 0.0, 0)
        else:
            mean = float(vals.mean())
            se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
            out[key] = (mean, se, int(vals.size))
    return out


def _scheme_order(rows):
    seen = []
    for r in rows:
        if r["scheme"] not in seen:
            seen.append(r["scheme"])
    known = [s for s in SCHEME_LABELS if s in seen]
    return known + [s for s in seen if s not in SCHEME_LABELS]


def _save(fig, out_path: str):
    """Write the requested file plus a sibling in the other family (vector +
    raster); strip volatile metadata so identical input gives identical bytes."""
    meta = {"Date": None} if out_path.endswith(".svg") else {}
    fig.savefig(out_path, metadata=meta)
    root, dot, ext = out_path.rpartition(".")
    sibling = (root or out_path) + (".png" if ext in ("svg", "pdf") else ".svg")
    fig.savefig(sibling, metadata={"Date": None} if sibling.endswith(".svg") else {})
    plt.close(fig)


def render(spec: FigureSpec) -> dict:
    """Render the figure and return the plotted values:
    ``{"x": [...], "series": {scheme: {"y": [...], "stderr": [...]}}}`` for
    sweeps, ``{"x": iterations, "trace": [...]}`` for convergence."""
    if spec.kind == "convergence":
        return _render_convergence(spec)
    rows = _read_sweep_rows(spec.csv_path)
    rows = [r for r in rows if r["sweep_kind"] == spec.kind]
    summaries = _summaries(rows)
    values = sorted({v for v, _ in summaries})
    schemes = _scheme_order(rows)

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    data = {"x": list(values), "series": {}}
    plotted_any = False
    for scheme in schemes:
        pts = [(v,) + summaries[(v, scheme)] for v in values if (v, scheme) in summaries]
        xs = [p[0] for p in pts if p[3] > 0]
        ys = [p[1] for p in pts if p[3] > 0]
        ses = [p[2] for p in pts if p[3] > 0]
        data["series"][scheme] = {"y": ys, "stderr": ses, "x": xs}
        if not xs:
            continue
        plotted_any = True
        if spec.scale == "dbm":
            plot_y = [_to_dbm(y) for y in ys]
            plot_err = [abs(_to_dbm(y + s) - _to_dbm(y)) if y > 0 else 0.0
                        for y, s in zip(ys, ses)]
        else:
            plot_y, plot_err = ys, ses
        ax.errorbar(xs, plot_y, yerr=plot_err, marker="o", capsize=3,
                    label=SCHEME_LABELS.get(scheme, scheme))
    ax.set_xlabel(X_LABELS[spec.kind])
    ax.set_ylabel("Minimum received power at EH receivers "
                  + ("(dBm)" if spec.scale == "dbm" else "(W)"))
    if plotted_any:
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.4)
    else:
        ax.text(0.5, 0.5, "no feasible trials", ha="center", va="center",
                transform=ax.transAxes)
    _save(fig, spec.out_path)
    return data


def _render_convergence(spec: FigureSpec) -> dict:
    with open(spec.csv_path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != ("iteration", "objective_watts"):
            raise ValueError(
                f"convergence CSV header mismatch in {spec.csv_path}: "
                "expected iteration,objective_watts")
        body = list(reader)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    if any(rec and rec[0] == "error" for rec in body):
        ax.text(0.5, 0.5, "infeasible scenario (error row in trace)",
                ha="center", va="center", transform=ax.transAxes)
        _save(fig, spec.out_path)
        return {"x": [], "trace": [], "error": True}
    its = [int(rec[0]) for rec in body]
    objs = [float(rec[1]) for rec in body]
    ys = [_to_dbm(v) for v in objs] if spec.scale == "dbm" else objs
    ax.plot(its, ys, marker="o")
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Min received power " + ("(dBm)" if spec.scale == "dbm" else "(W)"))
    ax.grid(True, alpha=0.4)
    _save(fig, spec.out_path)
    return {"x": its, "trace": objs, "error": False}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render a figure from a sweep or trace CSV")
    r.add_argument("--csv", required=True)
    r.add_argument("--kind", required=True, choices=["convergence", "gamma", "power"])
    r.add_argument("--out", required=True)
    r.add_argument("--scale", default="linear", choices=["linear", "dbm"])
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(csv_path=args.csv, kind=args.kind,
                          out_path=args.out, scale=args.scale))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
