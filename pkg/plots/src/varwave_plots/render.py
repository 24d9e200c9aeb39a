"""Figure rendering from run-directory artifacts.

Each kind reads specific CSV/JSON files and writes one or more PNGs into
<run-dir>/figures.  Missing inputs produce a skip notice, not an error;
malformed CSVs raise PlotError with the file and line number.
"""

from __future__ import annotations

import glob
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("snapshot", "chars", "energy", "q", "converge")


class PlotError(RuntimeError):
    """An artifact exists but cannot be parsed."""


def _read_csv(path, n_cols=None):
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        width = n_cols or len(header)
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != width:
                raise PlotError(
                    f"{path}:{ln}: expected {width} columns, "
                    f"got {len(parts)}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise PlotError(f"{path}:{ln}: {exc}") from exc
    return header, np.array(rows).reshape(-1, width)


def _tau_of(path):
    tag = os.path.basename(path).split("tau", 1)[1].rsplit(".", 1)[0]
    return float(tag.replace("p", ".").replace("m", "-"))


def _render_snapshot(run_dir, fig_dir, notices):
    paths = sorted(glob.glob(os.path.join(run_dir, "snapshot_tau*.csv")))
    if not paths:
        notices.append("snapshot: no snapshot_tau*.csv found, skipped")
        return []
    out = []
    for path in paths:
        _, arr = _read_csv(path, 7)
        tau = _tau_of(path)
        x, u, u_t, u_x = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 8))
        for ax, f, name in zip(axes, (u, u_t, u_x),
                               ("u", "u_t", "u_x")):
            ax.plot(x, f, lw=1.0)
            ax.set_ylabel(name)
            ax.grid(alpha=0.3)
        atoms_path = path.replace("snapshot_", "atoms_")
        if os.path.exists(atoms_path):
            _, atoms = _read_csv(atoms_path, 3)
            for xa in atoms[:, 0] if atoms.size else []:
                for ax in axes:
                    ax.axvline(xa, color="crimson", ls="--", lw=0.8)
        axes[0].set_title(f"fields at t = {tau:g}")
        axes[-1].set_xlabel("x")
        dest = os.path.join(fig_dir, os.path.basename(path)
                            .replace(".csv", ".png"))
        fig.savefig(dest, dpi=130)
        plt.close(fig)
        out.append(dest)
    return out


def _render_chars(run_dir, fig_dir, notices):
    paths = sorted(glob.glob(os.path.join(run_dir, "char_*.csv")))
    if not paths:
        notices.append("chars: no char_*.csv found, skipped")
        return []
    fig, ax = plt.subplots(figsize=(8, 6))
    for path in paths:
        _, arr = _read_csv(path, 2)
        label = os.path.basename(path)[5:-4]
        style = "-" if label.startswith("bwd") else "--"
        ax.plot(arr[:, 1], arr[:, 0], style, lw=1.0, label=label)
    for atoms_path in sorted(glob.glob(
            os.path.join(run_dir, "atoms_tau*.csv"))):
        _, atoms = _read_csv(atoms_path, 3)
        tau = _tau_of(atoms_path)
        if atoms.size:
            ax.plot(atoms[:, 0], np.full(atoms.shape[0], tau), "r*",
                    ms=10)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("characteristic curves (stars: singular atoms)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    dest = os.path.join(fig_dir, "characteristics.png")
    fig.savefig(dest, dpi=130)
    plt.close(fig)
    return [dest]


def _render_energy(run_dir, fig_dir, notices):
    path = os.path.join(run_dir, "energy.json")
    if not os.path.exists(path):
        notices.append("energy: no energy.json found, skipped")
        return []
    with open(path, encoding="utf-8") as fh:
        rep = json.load(fh)
    series = rep["series"]
    taus = [s["tau"] for s in series]
    fig, ax = plt.subplots(figsize=(8, 5))
    for key in ("e_minus", "e_plus", "e_total"):
        ax.plot(taus, [s[key] for s in series], "o-", label=key)
    ax.axhline(rep["E0"], color="k", ls=":", label="E0")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("energy split and conservation")
    ax.legend()
    ax.grid(alpha=0.3)
    dest = os.path.join(fig_dir, "energy.png")
    fig.savefig(dest, dpi=130)
    plt.close(fig)
    return [dest]


def _render_q(run_dir, fig_dir, notices):
    path = os.path.join(run_dir, "qseries.csv")
    if not os.path.exists(path):
        notices.append("q: no qseries.csv found, skipped")
        return []
    _, arr = _read_csv(path, 2)
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(arr[:, 0], arr[:, 1], "o-")
    ax.set_xlabel("t")
    ax.set_ylabel("Q(t)")
    ax.set_title("wave interaction potential")
    ax.grid(alpha=0.3)
    dest = os.path.join(fig_dir, "qseries.png")
    fig.savefig(dest, dpi=130)
    plt.close(fig)
    return [dest]


def _render_converge(run_dir, fig_dir, notices):
    path = os.path.join(run_dir, "convergence.json")
    if not os.path.exists(path):
        notices.append("converge: no convergence.json found, skipped")
        return []
    with open(path, encoding="utf-8") as fh:
        rep = json.load(fh)
    hs = np.asarray(rep["h"], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 5))
    errs = np.asarray(rep["u_errors"], dtype=float)
    if errs.size:
        ax.loglog(hs[:-1], errs, "o-", label="|u_h - u_{h/2}|_max")
    drifts = np.asarray(rep["energy_drifts"], dtype=float)
    ax.loglog(hs, np.maximum(drifts, 1e-300), "s-",
              label="energy drift")
    ref = errs[0] if errs.size else 1.0
    ax.loglog(hs, ref * (hs / hs[0]) ** 2, "k:", label="O(h^2)")
    ax.set_xlabel("h")
    ax.set_title(f"self-convergence (order_u = {rep['order_u']})")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    dest = os.path.join(fig_dir, "convergence.png")
    fig.savefig(dest, dpi=130)
    plt.close(fig)
    return [dest]


_RENDERERS = {
    "snapshot": _render_snapshot,
    "chars": _render_chars,
    "energy": _render_energy,
    "q": _render_q,
    "converge": _render_converge,
}


def render(run_dir: str, kinds=KINDS) -> tuple[list[str], list[str]]:
    """Render the requested figure kinds; returns (files, skip notices)."""
    for k in kinds:
        if k not in _RENDERERS:
            raise PlotError(f"unknown plot kind {k!r}; "
                            f"choose from {', '.join(KINDS)}")
    if not os.path.isdir(run_dir):
        raise PlotError(f"run directory not found: {run_dir}")
    if not os.path.exists(os.path.join(run_dir, "manifest.json")):
        raise PlotError(f"{run_dir} has no manifest.json; not a run "
                        "directory")
    fig_dir = os.path.join(run_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    files, notices = [], []
    for k in kinds:
        files += _RENDERERS[k](run_dir, fig_dir, notices)
    return files, notices
