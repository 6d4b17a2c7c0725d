"""Figure-ready plots from experiment CSVs (static vector output)."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaMismatch(Exception):
    pass


_EXPECTED = {
    "identity-fraction": ["L", "p_e", "wilson_lo", "wilson_hi", "hits"],
    "tth-scaling": ["n", "L", "seed", "t_th", "censored"],
    "jamming": ["L", "seed", "t_th", "censored"],
}


def _read(csv_path, kind):
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [r for r in reader if r]
    if header != _EXPECTED[kind]:
        raise SchemaMismatch(f"expected columns {_EXPECTED[kind]}, found {header}")
    if not rows:
        raise SchemaMismatch("no data rows")
    return rows


def emit(kind, csv_path, out_file):
    rows = _read(csv_path, kind)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    if kind == "identity-fraction":
        L = np.array([float(r[0]) for r in rows])
        p = np.array([float(r[1]) for r in rows])
        x = L ** (1 / 3)
        y = -np.log(p)
        slope, intercept = np.polyfit(x, y, 1)
        ax.plot(x, y, "o")
        xs = np.linspace(x.min(), x.max(), 50)
        ax.plot(xs, slope * xs + intercept, "--", label=f"slope = {slope:.2f}")
        ax.set_xlabel(r"$L^{1/3}$")
        ax.set_ylabel(r"$-\ln p_e$")
        ax.legend()
    elif kind == "tth-scaling":
        by_n = {}
        for r in rows:
            if r[3]:
                by_n.setdefault(int(r[0]), []).append(float(r[3]))
        ns = sorted(by_n)
        med = [np.median(by_n[n]) for n in ns]
        slope, intercept = np.polyfit(ns, np.log2(med), 1)
        ax.semilogy(ns, med, "o", base=2)
        xs = np.linspace(min(ns), max(ns), 50)
        ax.semilogy(xs, 2.0 ** (slope * xs + intercept), "--", base=2,
                    label=f"slope = {slope:.2f}")
        ax.set_xlabel("wave depth n")
        ax.set_ylabel(r"median $t_{\rm th}$ (layers)")
        ax.legend()
    elif kind == "jamming":
        by_L = {}
        for r in rows:
            by_L.setdefault(int(r[0]), []).append(float(r[2]) if r[2] else math.inf)
        Ls = sorted(by_L)
        med = [np.median(by_L[L]) for L in Ls]
        finite = [(L, m) for L, m in zip(Ls, med) if math.isfinite(m)]
        ax.semilogy(*zip(*[(L, m) for L, m in zip(Ls, med) if math.isfinite(m)]), "o-")
        for L, m in zip(Ls, med):
            if not math.isfinite(m):
                ax.axvline(L, color="0.8", linestyle=":")
        if len(finite) >= 2:
            xs = np.array([f[0] for f in finite])
            ys = 1.0 / np.array([f[1] for f in finite])
            a, b = np.polyfit(xs, ys, 1)
            if a > 0:
                ax.axvline(-b / a, color="r", linestyle="--", label=f"$L^*$ = {-b / a:.1f}")
                ax.legend()
        ax.set_xlabel("chain length L")
        ax.set_ylabel(r"median $t_{\rm th}$ (layers)")
    else:
        raise SchemaMismatch(f"unknown plot kind {kind!r}")
    fig.tight_layout()
    out = Path(out_file)
    fig.savefig(out)
    plt.close(fig)
    return out
