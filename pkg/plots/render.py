#!/usr/bin/env python3
"""Render figure analogues from the CLI's CSV outputs.

    plots/render.py --kind fig1|fig2|fig3|fig4|fig5 --in DIR --out FILE.(png|svg)

Each kind reads fixed-schema CSVs from the input directory and writes one
image. Rendering is a pure function of the CSV content: fixed figure size,
fixed dpi, data-driven ranges.
"""

from __future__ import annotations

import argparse
import math
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

LN2 = math.log(2.0)
LN3 = math.log(3.0)
PARTIAL_PLATEAU = LN3 / 3.0 + 2.0 * math.log(1.5) / 3.0

SCHEMAS = {
    "mi_curves.csv": ["t", "n", "I_nats"],
    "rate_functions.csv": ["branch", "epsilon", "f"],
    "bound.csv": ["n", "I_nats", "lower_env", "upper_env"],
    "collapse.csv": ["lambda", "n", "x_scaled", "I_nats"],
    "pointer_hist.csv": ["prep", "N", "bin_left", "bin_right", "mass"],
}

KINDS = ("fig1", "fig2", "fig3", "fig4", "fig5")


class SchemaError(ValueError):
    """CSV header does not match the documented schema."""


def load_csv(indir: str, name: str) -> pd.DataFrame:
    df = pd.read_csv(f"{indir}/{name}")
    want = SCHEMAS[name]
    got = list(df.columns)
    if got != want:
        missing = [c for c in want if c not in got]
        if missing:
            raise SchemaError(f"{name}: missing column(s) {missing}; header is {got}")
        raise SchemaError(f"{name}: header {got} does not match schema {want}")
    if df.empty:
        raise SchemaError(f"{name}: no data rows")
    return df


def _time_colors(times):
    # light to dark with increasing time
    cmap = plt.get_cmap("Blues")
    lo, hi = 0.35, 0.95
    if len(times) == 1:
        return {times[0]: cmap(hi)}
    return {
        t: cmap(lo + (hi - lo) * i / (len(times) - 1)) for i, t in enumerate(times)
    }


def _hline(ax, y, label):
    ax.axhline(y, color="0.4", lw=0.8, ls="--")
    ax.annotate(
        label, (0.99, y), xycoords=("axes fraction", "data"),
        ha="right", va="bottom", fontsize=7, color="0.3",
    )


def render_fig1(indir: str, ax):
    df = load_csv(indir, "mi_curves.csv")
    times = sorted(df["t"].unique())
    colors = _time_colors(times)
    for t in times:
        sub = df[df["t"] == t].sort_values("n")
        ax.plot(sub["n"], sub["I_nats"], "o-", ms=3, color=colors[t], label=f"t={t:g}")
    _hline(ax, LN2, "ln 2")
    _hline(ax, 2 * LN2, "2 ln 2")
    ax.set_xlabel("fraction size n")
    ax.set_ylabel("I(F,S) [nats]")
    ax.legend(fontsize=7, ncol=2)


def render_fig2(indir: str, fig):
    rates = load_csv(indir, "rate_functions.csv")
    bound = load_csv(indir, "bound.csv")
    ax_a, ax_b = fig.subplots(1, 2)

    pivot = {}
    for branch in sorted(rates["branch"].unique()):
        sub = rates[rates["branch"] == branch].sort_values("epsilon")
        ax_a.plot(sub["epsilon"], sub["f"], lw=1.2, label=f"branch {branch}")
        pivot[branch] = sub
    # mark the lowest pairwise crossing of the rate functions
    branches = sorted(pivot)
    if len(branches) >= 2:
        a, b = pivot[branches[0]], pivot[branches[1]]
        eps = np.union1d(a["epsilon"].to_numpy(), b["epsilon"].to_numpy())
        fa = np.interp(eps, a["epsilon"], a["f"])
        fb = np.interp(eps, b["epsilon"], b["f"])
        upper = np.maximum(fa, fb)
        i = int(np.argmin(upper))
        ax_a.plot([eps[i]], [upper[i]], "k*", ms=9, label="crossing")
    ax_a.set_xlabel("energy per site")
    ax_a.set_ylabel("rate function f")
    ax_a.legend(fontsize=7)

    bound = bound.sort_values("n")
    # plateau estimate: the envelopes pinch onto H_S at the chain ends
    h_S = float(
        0.5 * (bound["lower_env"].to_numpy()[-1] + bound["upper_env"].to_numpy()[0])
    )
    gap = h_S - bound["I_nats"]
    env = h_S - bound["lower_env"]
    pos = gap > 0
    ax_b.semilogy(bound["n"][pos], gap[pos], "o", ms=4, label="plateau gap")
    ax_b.semilogy(bound["n"], env, "-", lw=1.0, label="envelope")
    ax_b.set_xlabel("fraction size n")
    ax_b.set_ylabel("ln 2 - I [nats]")
    ax_b.legend(fontsize=7)


def render_fig3(indir: str, ax):
    df = load_csv(indir, "collapse.csv")
    lams = sorted(df["lambda"].unique())
    colors = _time_colors(lams)
    for lam in lams:
        sub = df[df["lambda"] == lam].sort_values("x_scaled")
        ax.plot(
            sub["x_scaled"], sub["I_nats"], "o-", ms=3, color=colors[lam],
            label=f"lambda={lam:g}",
        )
    _hline(ax, LN2, "ln 2")
    ax.set_xlabel("lambda^2 n")
    ax.set_ylabel("I(F,S) [nats]")
    ax.legend(fontsize=7)


def render_fig4(indir: str, fig):
    df = load_csv(indir, "pointer_hist.csv")
    preps = sorted(df["prep"].unique())
    axes = fig.subplots(1, max(2, len(preps)))
    for ax, prep in zip(np.atleast_1d(axes), preps):
        sub = df[df["prep"] == prep].sort_values("bin_left")
        width = sub["bin_right"] - sub["bin_left"]
        ax.bar(sub["bin_left"], sub["mass"], width=width, align="edge", color="C0")
        ax.set_title(prep, fontsize=9)
        ax.set_xlabel("pointer expectation z")
        ax.set_ylabel("probability mass")
        ax.set_xlim(-1, 1)


def render_fig5(indir: str, ax):
    df = load_csv(indir, "mi_curves.csv")
    times = sorted(df["t"].unique())
    colors = _time_colors(times)
    for t in times:
        sub = df[df["t"] == t].sort_values("n")
        ax.plot(sub["n"], sub["I_nats"], "o-", ms=3, color=colors[t], label=f"t={t:g}")
    _hline(ax, PARTIAL_PLATEAU, "0.6365")
    _hline(ax, LN3, "ln 3")
    ax.set_xlabel("fraction size n")
    ax.set_ylabel("I(F,S) [nats]")
    ax.legend(fontsize=7, ncol=2)


def render(kind: str, indir: str, outpath: str):
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}")
    if not (outpath.endswith(".png") or outpath.endswith(".svg")):
        raise ValueError("output path must end in .png or .svg")
    if kind == "fig2":
        fig = plt.figure(figsize=(7.0, 3.0), dpi=150)
        render_fig2(indir, fig)
    elif kind == "fig4":
        fig = plt.figure(figsize=(7.0, 3.0), dpi=150)
        render_fig4(indir, fig)
    else:
        fig = plt.figure(figsize=(4.2, 3.2), dpi=150)
        ax = fig.subplots()
        {"fig1": render_fig1, "fig3": render_fig3, "fig5": render_fig5}[kind](indir, ax)
    fig.tight_layout()
    fig.savefig(outpath)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="indir", required=True, metavar="DIR")
    parser.add_argument("--out", dest="outpath", required=True, metavar="FILE")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.indir, args.outpath)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
