"""Run orchestration: data -> lattice solve -> reconstruction -> artifacts.

A run directory contains:

    manifest.json        config echo, versions, artifact list, status
    grid.npz             packed lattice (reloadable by the CLI subcommands)
    grid.csv             one row per node (optional, output.grid_csv)
    grid_header.json     lattice origin, spacing, model, counts
    residuals.json       lattice consistency residual norms
    snapshot_tau*.csv    x, u, u_t, u_x, R, S, defined
    atoms_tau*.csv       x_location, energy, c_prime_at_atom
    energy.json          E0 and per-tau energy split
    qseries.csv          t, Q
    qbound.json          interaction bound report
    char_*.csv           t, x, label per traced characteristic

All floats are serialized with 17 significant digits; identical configs
produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .config import RunConfig
from .errors import NumericalError, ValidationError
from .wavespeed import make_model, WaveSpeedModel
from .initial_data import (CauchyData, BoundaryCurve, build_boundary_curve,
                           profile_support, riemann_invariants,
                           sample_profile)
from .goursat import CharGrid, consistency_residuals, integrate
from .reconstruct import level_set, snapshot
from .characteristics import (check_interaction_bound, interaction_potential,
                              rs_product_integral, trace_from_grid)
from . import __version__

FMT = "%.17g"
MAX_DATA_SAMPLES = 4_000_000


def _fval(v) -> str:
    return FMT % float(v)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _write_csv(path, header: str, columns):
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, arr, fmt=FMT, delimiter=",", header=header, comments="")


def _tau_tag(tau: float) -> str:
    return ("%g" % tau).replace("-", "m").replace(".", "p")


def build_model(cfg: RunConfig) -> WaveSpeedModel:
    return make_model(cfg.model_name, cfg.model_params,
                      interval=cfg.model_interval)


def _load_two_column_csv(path):
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if arr.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns (x, value)")
    return arr[:, 0], arr[:, 1]


def build_data(cfg: RunConfig, model: WaveSpeedModel) -> CauchyData:
    """Sample the initial fields on a grid tied to the lattice spacing.

    The sample spacing resolves both the lattice (h/8) and the invariant
    magnitude ((h/2)/(1 + max(R0^2, S0^2))), found with a coarse first
    pass, so that the boundary-curve quadrature error stays O(h^2).
    """
    if cfg.data_csv:
        xr, u0r = _load_two_column_csv(cfg.data_csv)
        if cfg.u1_csv:
            x1, u1r = _load_two_column_csv(cfg.u1_csv)
            u1r = np.interp(xr, x1, u1r, left=0.0, right=0.0)
        else:
            u1r = np.zeros_like(u0r)
        lo, hi = float(xr[0]), float(xr[-1])

        def eval_u0(x):
            return np.interp(x, xr, u0r, left=0.0, right=0.0)

        def eval_u1(x):
            return np.interp(x, xr, u1r, left=0.0, right=0.0)
    else:
        s0 = profile_support(cfg.profile, cfg.profile_params)
        s1 = (profile_support(cfg.u1_profile, cfg.u1_params)
              if cfg.u1_profile != "zero" else s0)
        lo, hi = min(s0[0], s1[0]), max(s0[1], s1[1])

        def eval_u0(x):
            return sample_profile(cfg.profile, cfg.profile_params, x)

        def eval_u1(x):
            return sample_profile(cfg.u1_profile, cfg.u1_params, x)

    lo -= cfg.data_pad
    hi += cfg.data_pad
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5

    def make(n):
        x = np.linspace(lo, hi, n)
        data = CauchyData(x=x, u0=eval_u0(x), u1=eval_u1(x),
                          support=(lo + 1e-12 * (hi - lo),
                                   hi - 1e-12 * (hi - lo)))
        riemann_invariants(data, model)
        return data

    coarse = make(4001)
    fac = 1.0 + max(np.max(coarse.R0 ** 2), np.max(coarse.S0 ** 2))
    dx = min(cfg.h / 8.0, (cfg.h / 2.0) / fac)
    n = int(np.ceil((hi - lo) / dx)) + 1
    if n > MAX_DATA_SAMPLES:
        n = MAX_DATA_SAMPLES
    return make(max(n, 4001))


def build_gamma(data: CauchyData, model: WaveSpeedModel,
                cfg: RunConfig) -> BoundaryCurve:
    """Boundary curve at lattice resolution, padded with exact vacuum.

    The pad is 2*M*t_max + 1: level curves end on characteristics moving
    inward from the pad edges at speed up to M, while radiated energy
    moves outward from the data support at up to M, so capturing the
    complete level set (and hence conserving e_total) up to t_max needs
    twice the travel distance plus slack.
    """
    span = (data.x[-1] - data.x[0]) + float(
        np.trapezoid(data.R0 ** 2, x=data.x))
    n_nodes = int(np.ceil(span / (cfg.h / 2.0))) + 2
    pad = 2.0 * model.M * cfg.t_max + 1.0
    return build_boundary_curve(data, model, n_nodes, pad=pad)


def initial_energy(data: CauchyData) -> float:
    return float(np.trapezoid(data.R0 ** 2 + data.S0 ** 2, x=data.x))


def save_grid(path, grid: CharGrid, cfg: RunConfig):
    g = grid.gamma
    np.savez(
        path, states=grid.states, jlo=grid.jlo, jhi=grid.jhi,
        sigma=grid.sigma, tau=grid.tau, col_anchor=grid.col_anchor,
        row_anchor=grid.row_anchor,
        scalars=np.array([grid.X0, grid.Y0, grid.h, grid.nx, grid.ny,
                          grid.t_max]),
        gamma_x=g.x, gamma_X=g.X, gamma_Y=g.Y, gamma_states=g.states,
        model_name=np.array(cfg.model_name),
        model_params=np.array(cfg.model_params, dtype=float),
        model_interval=np.array(cfg.model_interval, dtype=float))


def load_grid(path) -> CharGrid:
    with np.load(path, allow_pickle=False) as z:
        X0, Y0, h, nx, ny, t_max = z["scalars"]
        gamma = BoundaryCurve(x=z["gamma_x"], X=z["gamma_X"],
                              Y=z["gamma_Y"], states=z["gamma_states"])
        grid = CharGrid(X0=float(X0), Y0=float(Y0), h=float(h),
                        nx=int(nx), ny=int(ny), jlo=z["jlo"], jhi=z["jhi"],
                        states=z["states"], sigma=z["sigma"], tau=z["tau"],
                        col_anchor=z["col_anchor"],
                        row_anchor=z["row_anchor"], gamma=gamma)
        grid.t_max = float(t_max)
        grid.model = make_model(str(z["model_name"]),
                                z["model_params"].tolist(),
                                interval=tuple(z["model_interval"]))
    return grid


def _dump_grid_csv(path, header_path, grid: CharGrid, cfg: RunConfig):
    from .state import IU, IX, IT, IP, IQ, INU, IETA, IXI, IZETA

    _write_json(header_path, {
        "h": grid.h, "X0": grid.X0, "Y0": grid.Y0,
        "nx": grid.nx, "ny": grid.ny, "t_max": grid.t_max,
        "model": {"name": cfg.model_name, "params": cfg.model_params,
                  "interval": list(cfg.model_interval)},
        "columns": ["i", "j", "X", "Y", "t", "x", "u", "p", "q",
                    "nu", "eta", "xi", "zeta"],
    })
    order = (IT, IX, IU, IP, IQ, INU, IETA, IXI, IZETA)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,j,X,Y,t,x,u,p,q,nu,eta,xi,zeta\n")
        for i in range(grid.nx):
            nr = grid.jhi[i] - grid.jlo[i] + 1
            if nr <= 0:
                continue
            js = grid.jlo[i] + np.arange(nr)
            X = grid.X0 + grid.h * i
            Ys = grid.Y0 + grid.h * js
            st = grid.states[:, i, :nr]
            for k, j in enumerate(js):
                vals = [FMT % X, FMT % Ys[k]]
                vals += [FMT % st[f, k] for f in order]
                fh.write(f"{i},{j}," + ",".join(vals) + "\n")


def _snapshot_artifacts(out, grid, taus, nu_floor, E0):
    paths, series = [], []
    for tau in taus:
        snap = snapshot(grid, tau, nu_floor=nu_floor)
        tag = _tau_tag(tau)
        p1 = os.path.join(out, f"snapshot_tau{tag}.csv")
        _write_csv(p1, "x,u,u_t,u_x,R,S,defined",
                   [snap.x, snap.u,
                    np.where(snap.defined, snap.u_t, np.nan),
                    np.where(snap.defined, snap.u_x, np.nan),
                    np.where(snap.defined, snap.R, np.nan),
                    np.where(snap.defined, snap.S, np.nan),
                    snap.defined.astype(float)])
        p2 = os.path.join(out, f"atoms_tau{tag}.csv")
        with open(p2, "w", encoding="utf-8") as fh:
            fh.write("x_location,energy,c_prime_at_atom\n")
            for a in snap.atoms:
                fh.write(",".join(_fval(v) for v in
                                  (a.x_location, a.energy, a.c_prime)) + "\n")
        paths += [p1, p2]
        series.append({"tau": tau, "e_minus": snap.e_minus,
                       "e_plus": snap.e_plus, "e_total": snap.e_total,
                       "n_atoms": len(snap.atoms)})
    epath = os.path.join(out, "energy.json")
    _write_json(epath, {"E0": E0, "series": series})
    paths.append(epath)
    return paths, series


def _q_artifacts(out, grid, model, cfg, E0):
    ts = np.linspace(0.0, cfg.t_max, cfg.qseries_samples)
    qs, rs = [], []
    for t in ts:
        snap = snapshot(grid, float(t), nu_floor=cfg.nu_floor)
        qs.append(interaction_potential(snap))
        rs.append(rs_product_integral(snap.level, floor=cfg.nu_floor))
    qpath = os.path.join(out, "qseries.csv")
    _write_csv(qpath, "t,Q", [ts, qs])
    rsq = float(np.trapezoid(rs, x=ts))
    report = check_interaction_bound(list(zip(ts, qs)), rsq, model,
                                     E0, cfg.t_max)
    bpath = os.path.join(out, "qbound.json")
    _write_json(bpath, report.as_dict() | {"rsq_integral": rsq})
    return [qpath, bpath]


def _char_artifacts(out, grid, cfg):
    paths = []
    for sgn, x0 in cfg.char_starts:
        sign = "forward" if sgn > 0 else "backward"
        curve = trace_from_grid(grid, x0, sign=sign)
        label = f"{'fwd' if sgn > 0 else 'bwd'}_x{_tau_tag(x0)}"
        p = os.path.join(out, f"char_{label}.csv")
        _write_csv(p, f"t,x,label={label}", [curve.t, curve.x])
        paths.append(p)
    return paths


def _oracle_report(grid, data, model, cfg):
    from .oracles import dalembert, fd_solve

    taus = list(cfg.snapshot_times) or [cfg.t_max]
    diffs = {}
    if cfg.oracle == "dalembert":
        if cfg.model_name != "constant":
            raise ValidationError(
                "the d'Alembert oracle needs a constant model")
        c0 = model.c0

        def u0f(x):
            return np.interp(x, data.x, data.u0, left=0.0, right=0.0)

        def u1f(x):
            return np.interp(x, data.x, data.u1, left=0.0, right=0.0)

        for tau in taus:
            snap = snapshot(grid, tau, nu_floor=cfg.nu_floor)
            ref = dalembert(u0f, u1f, c0, tau, snap.x)
            diffs[_tau_tag(tau)] = float(np.max(np.abs(snap.u - ref)))
    else:
        fd = fd_solve(data, model, cfg.t_max, cfg.h / 8.0,
                      snapshot_times=taus)
        for tau in taus:
            snap = snapshot(grid, tau, nu_floor=cfg.nu_floor)
            uref, _, _ = fd.snapshots[tau]
            xs = fd.x
            ug = np.interp(xs, snap.x, snap.u, left=0.0, right=0.0)
            num = np.sqrt(np.trapezoid((ug - uref) ** 2, x=xs))
            den = max(np.sqrt(np.trapezoid(uref ** 2, x=xs)), 1e-300)
            diffs[_tau_tag(tau)] = float(num / den)
    return {"name": cfg.oracle, "max_abs_u_diff": diffs}


def run(cfg: RunConfig, out_dir: str | None = None) -> dict:
    """Execute a full run; returns the manifest dict (also written)."""
    out = out_dir or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    manifest = {
        "config": dict(sorted(cfg.raw.items())),
        "versions": {"package": __version__, "numpy": np.__version__},
        "artifacts": [], "warnings": [], "status": "partial",
    }
    try:
        import scipy
        manifest["versions"]["scipy"] = scipy.__version__
    except ImportError:
        pass
    mpath = os.path.join(out, "manifest.json")
    try:
        model = build_model(cfg)
        data = build_data(cfg, model)
        E0 = initial_energy(data)
        gamma = build_gamma(data, model, cfg)
        grid = integrate(gamma, model, cfg.h, cfg.t_max)

        res = consistency_residuals(grid)
        rpath = os.path.join(out, "residuals.json")
        _write_json(rpath, res.as_dict())
        manifest["artifacts"].append(rpath)

        taus = list(cfg.snapshot_times) or [cfg.t_max]
        paths, series = _snapshot_artifacts(out, grid, taus,
                                            cfg.nu_floor, E0)
        manifest["artifacts"] += paths
        manifest["energy"] = {"E0": E0, "series": series}

        manifest["artifacts"] += _q_artifacts(out, grid, model, cfg, E0)
        manifest["artifacts"] += _char_artifacts(out, grid, cfg)

        gpath = os.path.join(out, "grid.npz")
        save_grid(gpath, grid, cfg)
        manifest["artifacts"].append(gpath)
        if cfg.grid_csv:
            cpath = os.path.join(out, "grid.csv")
            hpath = os.path.join(out, "grid_header.json")
            _dump_grid_csv(cpath, hpath, grid, cfg)
            manifest["artifacts"] += [cpath, hpath]

        if cfg.oracle != "none":
            manifest["oracle"] = _oracle_report(grid, data, model, cfg)

        from .state import IU
        I, K = grid.defined_mask()
        uvals = grid.states[IU, I, K]
        urange = (float(np.min(uvals)), float(np.max(uvals)))
        manifest["u_range"] = list(urange)
        lo, hi = cfg.model_interval
        if urange[0] < lo or urange[1] > hi:
            manifest["warnings"].append(
                f"observed u range {urange} exceeds the certification "
                f"interval [{lo}, {hi}]")
        manifest["residuals"] = res.as_dict()
        manifest["status"] = "complete"
    except (ValidationError, NumericalError) as exc:
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        _write_json(mpath, manifest)
        raise
    _write_json(mpath, manifest)
    return manifest


def convergence_study(cfg: RunConfig, levels: int,
                      out_dir: str | None = None) -> dict:
    """Self-convergence at h, h/2, ..., h/2^(levels-1).

    Compares u at the latest snapshot time on common x-samples between
    consecutive levels, plus the total-energy drift per level; reports
    the observed order for each.
    """
    if levels < 3:
        raise ValidationError("convergence study needs at least 3 levels")
    out = out_dir or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    tau = max(cfg.snapshot_times) if cfg.snapshot_times else cfg.t_max
    hs, snaps, drifts = [], [], []
    for k in range(levels):
        lcfg = RunConfig(**{**cfg.__dict__,
                            "h": cfg.h / 2 ** k, "raw": dict(cfg.raw)})
        model = build_model(lcfg)
        data = build_data(lcfg, model)
        gamma = build_gamma(data, model, lcfg)
        grid = integrate(gamma, model, lcfg.h, lcfg.t_max)
        snap = snapshot(grid, tau, nu_floor=lcfg.nu_floor)
        E0 = initial_energy(data)
        hs.append(lcfg.h)
        snaps.append(snap)
        drifts.append(abs(snap.e_total - E0) / max(E0, 1e-300))
    errs = []
    for a, b in zip(snaps[:-1], snaps[1:]):
        lo = max(a.x.min(), b.x.min())
        hi = min(a.x.max(), b.x.max())
        xs = np.linspace(lo, hi, 4001)
        ua = np.interp(xs, a.x, a.u)
        ub = np.interp(xs, b.x, b.u)
        errs.append(float(np.max(np.abs(ua - ub))))

    def order_of(vals):
        vals = [v for v in vals]
        if max(vals) < 1e-14:
            return "exact"
        rates = [np.log2(vals[k] / vals[k + 1])
                 for k in range(len(vals) - 1)
                 if vals[k + 1] > 1e-300]
        return float(np.mean(rates)) if rates else "exact"

    report = {
        "tau": tau, "h": hs, "u_errors": errs,
        "energy_drifts": drifts,
        "order_u": order_of(errs),
        "order_energy": order_of(drifts) if max(drifts) >= 1e-14 else "exact",
    }
    _write_json(os.path.join(out, "convergence.json"), report)
    _write_csv(os.path.join(out, "convergence.csv"),
               "h,energy_drift", [hs, drifts])
    return report
