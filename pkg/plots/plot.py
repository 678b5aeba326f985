#!/usr/bin/env python3
"""Render publication-style figures from ergoscope CSV outputs.

    plot.py --kind fig1     --in fig1_gibbs.csv fig1_lambda.csv --out fig1.png
    plot.py --kind eth_scan --in eth_scan_L8.csv [more...]      --out scan.png
    plot.py --kind sie_panel --in sie_panel.csv                 --out sie.png

Reads only the documented CSV schemas (comment-prefixed metadata line, fixed
headers); validates them before any drawing and never writes on bad input.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("fig1", "eth_scan", "sie_panel")

REQUIRED_COLUMNS = {
    "fig1_gibbs": ["beta", "S_density", "E_density"],
    "fig1_lambda": ["lambda", "S_density", "E_density"],
    "eth_scan": ["index", "energy", "energy_density", "max_trace_distance",
                 "athermality_cap", "best_work"],
    "sie_panel": ["l", "max_rate"],
}

DOMINANCE_TOL = 1e-6


class SchemaError(ValueError):
    pass


@dataclass
class FigureJob:
    kind: str
    inputs: list
    output: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


def load_table(path: Path, schema: str) -> pd.DataFrame:
    if not path.exists():
        raise SchemaError(f"{path}: input CSV not found")
    frame = pd.read_csv(path, comment="#")
    missing = [c for c in REQUIRED_COLUMNS[schema] if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} for {schema}")
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    return frame


def check_fig1_dominance(gibbs: pd.DataFrame, lam: pd.DataFrame) -> None:
    """The dash-dotted family must never dip below the Gibbs curve at equal
    entropy; interpolate the Gibbs curve in entropy and compare on the data."""
    order = np.argsort(gibbs["S_density"].to_numpy())
    s_g = gibbs["S_density"].to_numpy()[order]
    e_g = gibbs["E_density"].to_numpy()[order]
    s_l = lam["S_density"].to_numpy()
    e_l = lam["E_density"].to_numpy()
    inside = (s_l >= s_g[0]) & (s_l <= s_g[-1])
    interp = np.interp(s_l[inside], s_g, e_g)
    gap = e_l[inside] - interp
    if np.any(gap < -DOMINANCE_TOL):
        worst = float(gap.min())
        raise SchemaError(
            f"dominance violated: lambda curve dips {worst:.3e} below the "
            f"Gibbs curve at shared entropy")


def _render_fig1(job: FigureJob, ax) -> None:
    if len(job.inputs) != 2:
        raise SchemaError("fig1 needs exactly two inputs: gibbs CSV, lambda CSV")
    gibbs = load_table(job.inputs[0], "fig1_gibbs")
    lam = load_table(job.inputs[1], "fig1_lambda")
    check_fig1_dominance(gibbs, lam)
    order = np.argsort(gibbs["S_density"].to_numpy())
    ax.plot(gibbs["S_density"].to_numpy()[order],
            gibbs["E_density"].to_numpy()[order],
            "-", color="tab:blue", label="subsystem Gibbs states")
    lorder = np.argsort(lam["S_density"].to_numpy())
    ax.plot(lam["S_density"].to_numpy()[lorder],
            lam["E_density"].to_numpy()[lorder],
            "-.", color="tab:red", label="long-range entangled family")
    ax.set_xlabel("entropy density S/l (nats)")
    ax.set_ylabel("energy density E/l")
    ax.legend(frameon=False)


def _render_eth_scan(job: FigureJob, ax) -> None:
    if not job.inputs:
        raise SchemaError("eth_scan needs at least one input CSV")
    for path in job.inputs:
        frame = load_table(path, "eth_scan")
        eps = frame["energy_density"].to_numpy()
        label = path.stem
        ax.scatter(eps, frame["max_trace_distance"].to_numpy(), s=9,
                   label=f"{label}: max trace distance")
        ax.scatter(eps, frame["athermality_cap"].to_numpy(), s=9, marker="x",
                   label=f"{label}: athermality cap")
    ax.set_xlabel("energy density")
    ax.set_ylabel("distance / cap")
    ax.legend(frameon=False, fontsize=7)


def _render_sie_panel(job: FigureJob, ax) -> None:
    if len(job.inputs) != 1:
        raise SchemaError("sie_panel needs exactly one input CSV")
    frame = load_table(job.inputs[0], "sie_panel")
    l_vals = frame["l"].to_numpy(dtype=float)
    rates = frame["max_rate"].to_numpy(dtype=float)
    ax.plot(l_vals, rates, "o", color="tab:green", label="max |dS_A/dt|")
    if len(l_vals) >= 2:
        slope, intercept = np.polyfit(np.log(l_vals),
                                      np.log(np.maximum(rates, 1e-300)), 1)
        grid = np.linspace(l_vals.min(), l_vals.max(), 50)
        ax.plot(grid, np.exp(intercept) * grid**slope, "--", color="gray",
                label=f"fit slope {slope:.2f}")
    ax.set_xlabel("block size l")
    ax.set_ylabel("max entropy rate")
    ax.legend(frameon=False)


def render(job: FigureJob) -> Path:
    """Validate inputs, draw, and write the image; no file on failure."""
    fig, ax = plt.subplots(figsize=job.style.get("figsize", (5.2, 3.6)),
                           dpi=job.style.get("dpi", 160))
    try:
        {"fig1": _render_fig1,
         "eth_scan": _render_eth_scan,
         "sie_panel": _render_sie_panel}[job.kind](job, ax)
        if job.style.get("title"):
            ax.set_title(job.style["title"])
        fig.tight_layout()
        job.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(job.output)
    finally:
        plt.close(fig)
    return job.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output PNG/SVG path")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    style = {"title": args.title} if args.title else {}
    try:
        path = render(FigureJob(kind=args.kind, inputs=args.inputs,
                                output=args.out, style=style))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
