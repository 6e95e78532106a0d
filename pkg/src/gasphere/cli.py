"""Command-line interface.

Subcommands:

  lane-emden   classic polytrope profile -> profile.csv, summary.json
  family       exact collapse/expansion family -> trajectory.csv, report.json
  evolve       finite-volume run -> snapshots/, diagnostics.csv, verdict.json
  classify     hypothesis matching from scalar inputs -> verdict.json
  sweep        classify a grid of cells -> sweep.csv
  verify       run the built-in acceptance checks and print one line each

Every run writes into its own directory under --out (default runs/) with a
manifest recording the effective configuration and a file inventory.  Exit
codes: 0 success, 1 invalid input or configuration, 2 numerical failure,
3 support reached the outer grid boundary.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__, diagnostics, polytrope, report, similarity
from .config import (ClassifyConfig, SweepConfig, build_classify_config,
                     build_diagnostics_settings, build_evolve_config,
                     build_family_config, build_initial_state,
                     build_lane_emden_config, build_run_settings,
                     build_sweep_config, merge_overrides, read_config_file)
from .errors import ConfigError, NumericalError
from .geometry import dimension_constants
from .hydro import TERM_SUPPORT_BOUNDARY, evolve, write_snapshot_csv
from .manifest import (allocate_run_dir, dump_json, finalize_manifest,
                       start_manifest)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_BOUNDARY = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise instead of exiting with 2."""

    def error(self, message):
        raise ConfigError(message)


def _add_common(sp) -> None:
    sp.add_argument("--config", metavar="FILE", help="INI config file")
    sp.add_argument("--out", metavar="DIR", help="base output directory (default runs)")
    sp.add_argument("--name", metavar="NAME", help="run directory name (default: command)")
    sp.add_argument("--seed", type=int, metavar="INT",
                    help="recorded in the manifest; reserved for stochastic extensions")
    sp.add_argument("--no-plot", action="store_true", default=None,
                    help="skip PNG rendering")
    sp.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                    help="override any config value, e.g. --set evolve.ic_sigma=1.5")


def build_parser() -> _Parser:
    p = _Parser(prog="gasphere",
                description="Spherically symmetric self-gravitating gas laboratory.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    sp = sub.add_parser("lane-emden", help="integrate a classic polytrope profile")
    _add_common(sp)
    sp.add_argument("--n", type=float, help="polytropic index (>= 0)")
    sp.add_argument("--alpha", type=float, help="center value y(0)")
    sp.add_argument("--zmax", type=float, help="span of the scan")
    sp.add_argument("--h", type=float, help="integration step")
    sp.set_defaults(func=cmd_lane_emden)

    sp = sub.add_parser("family", help="build an exact collapse/expansion family")
    _add_common(sp)
    sp.add_argument("--kind", choices=["power", "isothermal2d"])
    sp.add_argument("--n-dim", type=int, dest="n_dim")
    sp.add_argument("--k", type=float, help="pressure constant K")
    sp.add_argument("--lam", type=float, help="scale coupling lambda")
    sp.add_argument("--a0", type=float)
    sp.add_argument("--a1", type=float)
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--alpha", type=float, help="profile center value")
    sp.set_defaults(func=cmd_family)

    sp = sub.add_parser("evolve", help="run the finite-volume solver")
    _add_common(sp)
    sp.add_argument("--ic", help="initial condition name")
    sp.add_argument("--cells", type=int)
    sp.add_argument("--r-max", type=float, dest="r_max")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--beta", type=float, help="friction coefficient")
    sp.add_argument("--cfl", type=float)
    sp.add_argument("--snapshot-every", type=float, dest="snapshot_every")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("classify", help="match scalar data against the "
                                         "blowup/expansion statements")
    _add_common(sp)
    sp.add_argument("--n-dim", type=int, dest="n_dim")
    sp.add_argument("--gamma", help="adiabatic exponent, or the token 'critical'")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--e0", type=float, help="conserved initial energy")
    sp.add_argument("--m", type=float, help="total mass")
    sp.add_argument("--g", type=float)
    sp.add_argument("--k", type=float)
    sp.add_argument("--domain-measure", type=float, dest="domain_measure")
    sp.add_argument("--eps", type=float, help="2D gap value")
    sp.add_argument("--h0", type=float, help="initial second moment (enables time bounds)")
    sp.add_argument("--hdot0", type=float)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("sweep", help="classify a grid of (N, gamma, e0, beta) cells")
    _add_common(sp)
    sp.add_argument("--cells", help="semicolon-separated cell lines, e.g. "
                                    "'n_dim=3 gamma=1.4 e0=1; n_dim=4 gamma=critical e0=-1'")
    sp.add_argument("--threads", type=int, help="worker threads")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    sp.add_argument("--only", type=int, action="append", metavar="K",
                    help="run only criterion K (repeatable)")
    sp.set_defaults(func=cmd_verify)

    return p


_FLAG_MAP: Dict[str, Dict[str, Tuple[str, str]]] = {
    "lane-emden": {"n": ("lane-emden", "n"), "alpha": ("lane-emden", "alpha"),
                   "zmax": ("lane-emden", "z_max"), "h": ("lane-emden", "h")},
    "family": {"kind": ("family", "kind"), "n_dim": ("family", "n_dim"),
               "k": ("family", "k"), "lam": ("family", "lam"),
               "a0": ("family", "a0"), "a1": ("family", "a1"),
               "t_end": ("family", "t_end"), "dt": ("family", "dt"),
               "alpha": ("family", "alpha")},
    "evolve": {"ic": ("evolve", "ic"), "cells": ("evolve", "cells"),
               "r_max": ("evolve", "r_max"), "t_end": ("evolve", "t_end"),
               "beta": ("evolve", "beta"), "cfl": ("evolve", "cfl"),
               "snapshot_every": ("evolve", "snapshot_every")},
    "classify": {"n_dim": ("classify", "n_dim"), "gamma": ("classify", "gamma"),
                 "beta": ("classify", "beta"), "e0": ("classify", "e0"),
                 "m": ("classify", "m"), "g": ("classify", "g"),
                 "k": ("classify", "k"),
                 "domain_measure": ("classify", "domain_measure"),
                 "eps": ("classify", "eps"), "h0": ("classify", "h0"),
                 "hdot0": ("classify", "hdot0")},
    "sweep": {"threads": ("run", "threads")},
}


def _collect_overrides(args, command: str) -> Dict[Tuple[str, str], str]:
    overrides: Dict[Tuple[str, str], str] = {}
    for attr, target in _FLAG_MAP.get(command, {}).items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[target] = str(value)
    if command == "sweep" and getattr(args, "cells", None) is not None:
        overrides[("sweep", "cells")] = args.cells.replace(";", "\n")
    if args.out is not None:
        overrides[("run", "out")] = args.out
    if args.name is not None:
        overrides[("run", "name")] = args.name
    if args.seed is not None:
        overrides[("run", "seed")] = str(args.seed)
    if args.no_plot:
        overrides[("run", "no_plot")] = "true"
    for item in args.set:
        head, sep, value = item.partition("=")
        if not sep or "." not in head:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        section, _, key = head.partition(".")
        overrides[(section.strip(), key.strip())] = value.strip()
    return overrides


class _Run:
    """Run directory plus manifest lifecycle for one command invocation."""

    def __init__(self, args, command: str):
        sections = read_config_file(args.config)
        self.sections = merge_overrides(sections, _collect_overrides(args, command))
        self.settings = build_run_settings(self.sections)
        self.dir = allocate_run_dir(self.settings.out,
                                    self.settings.name or command)
        self.manifest = start_manifest(self.dir, command, self.sections,
                                       __version__, self.settings.seed)

    def finish(self, exit_code: int, termination: Optional[dict] = None) -> int:
        finalize_manifest(self.dir, self.manifest, exit_code, termination)
        print(self.dir)
        return exit_code


def cmd_lane_emden(args) -> int:
    run = _Run(args, "lane-emden")
    try:
        cfg = build_lane_emden_config(run.sections)
        profile = polytrope.solve_lane_emden(cfg.n, cfg.alpha,
                                             z_max=cfg.z_max, h=cfg.h)
        polytrope.export_profile(profile, run.dir / "profile.csv")
        z0 = profile.first_zero
        ratio = polytrope.density_ratio(profile) if z0 is not None else None
        summary = {
            "n": cfg.n, "alpha": cfg.alpha, "h": cfg.h, "z_max": cfg.z_max,
            "first_zero": z0,
            "density_ratio": ratio,
            "note": ("finite radius" if z0 is not None
                     else "infinite radius (no zero within the scanned span)"),
        }
        dump_json(run.dir / "summary.json", summary)
        if not run.settings.no_plot:
            report.plot_profile(profile, run.dir / "profile.png")
    except (ConfigError, NumericalError):
        run.finish(EXIT_INVALID, None)
        raise
    return run.finish(EXIT_OK)


def cmd_family(args) -> int:
    run = _Run(args, "family")
    try:
        cfg = build_family_config(run.sections)
        kind = polytrope.POWER if cfg.kind == "power" else polytrope.ISOTHERMAL2D
        try:
            fam = similarity.build_family(
                kind, cfg.n_dim, cfg.k, cfg.lam, cfg.a0, cfg.a1, cfg.t_end,
                dt=cfg.dt, alpha=cfg.alpha, profile_z_max=cfg.profile_z_max,
                profile_h=cfg.profile_h, mu=cfg.mu)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        similarity.export_trajectory(fam.scale, run.dir / "trajectory.csv")

        t_blow = similarity.blowup_time(fam.scale)
        t_quad = (similarity.collapse_time_quadrature(cfg.n_dim, cfg.lam,
                                                      cfg.a0, cfg.a1)
                  if cfg.lam > 0.0 else None)
        delta = (abs(t_blow - t_quad)
                 if t_blow is not None and t_quad is not None else None)

        payload = {
            "kind": cfg.kind, "n_dim": cfg.n_dim, "gamma": fam.gamma,
            "k": cfg.k, "lam": cfg.lam,
            "mu": similarity.coupling_mu(kind, cfg.n_dim, cfg.k, cfg.lam),
            "a0": cfg.a0, "a1": cfg.a1,
            "support_zero": fam.support_zero,
            "scale_termination": fam.scale.termination,
            "blowup_time": t_blow,
            "quadrature_time": t_quad,
            "quadrature_delta": delta,
            "first_integral_drift": float(np.max(np.abs(
                fam.scale.first_integral_series() - fam.scale.first_integral0))),
            "residuals": _family_residual_rows(fam, cfg),
        }
        dump_json(run.dir / "report.json", payload)
        if not run.settings.no_plot:
            report.plot_family(fam, run.dir / "family.png")
    except (ConfigError, NumericalError):
        run.finish(EXIT_INVALID, None)
        raise
    term = {"kind": fam.scale.termination, "time": float(fam.scale.t[-1])}
    return run.finish(EXIT_OK, term)


def _family_residual_rows(fam, cfg) -> List[dict]:
    """Residual norms at halved steps for each requested evaluation time."""
    t_span = float(fam.scale.t[-1])
    times = cfg.residual_times or (0.5 * t_span,)
    steps = [cfg.residual_step * 0.5 ** j for j in range(cfg.residual_levels)]
    rows: List[dict] = []
    for t in times:
        if not 0.0 < t < t_span:
            raise ConfigError(f"residual time {t:g} outside the integrated span "
                              f"(0, {t_span:g})")
        a = fam.scale.state_at(t)[0]
        edge = a * (fam.support_zero if fam.support_zero is not None
                    else float(fam.profile.z[-1]))
        radii = np.linspace(cfg.residual_lo * edge, cfg.residual_hi * edge,
                            cfg.residual_points)
        for s in steps:
            if radii[0] - s <= 0.0 or t - s <= 0.0:
                raise ConfigError("residual step too large for the requested "
                                  "time/radius window")
            norms = similarity.family_residual(fam, t, radii, s, s)
            rows.append({"t": t, "dr": norms.dr, "dt": norms.dt,
                         "mass": norms.mass, "momentum": norms.momentum,
                         "points": norms.n_points})
    return rows


def cmd_evolve(args) -> int:
    run = _Run(args, "evolve")
    term_payload = None
    try:
        cfg = build_evolve_config(run.sections)
        diag_cfg = build_diagnostics_settings(run.sections)
        state0 = build_initial_state(cfg)
        result = evolve(state0, cfg.t_end, cfl=cfg.cfl,
                        snapshot_every=cfg.snapshot_every,
                        second_order=cfg.second_order,
                        stop_on_collapse=cfg.stop_on_collapse)

        snap_dir = run.dir / "snapshots"
        snap_dir.mkdir()
        for i, snap in enumerate(result.snapshots):
            write_snapshot_csv(snap.state, snap.gravity, snap_dir / f"{i:04d}.csv")
        rows = diagnostics.run_diagnostics_rows(result)
        diagnostics.write_diagnostics_csv(rows, run.dir / "diagnostics.csv")

        verdict_payload = _evolve_verdict(cfg, diag_cfg, state0, result, rows)
        dump_json(run.dir / "verdict.json", verdict_payload)

        if not run.settings.no_plot:
            report.plot_diagnostics(rows, result, run.dir / "diagnostics.png")
            report.plot_snapshots(result, run.dir / "profiles.png")
        term = result.termination
        term_payload = {"kind": term.kind, "time": term.time, "detail": term.detail}
    except ConfigError:
        run.finish(EXIT_INVALID, None)
        raise
    except NumericalError as exc:
        run.finish(EXIT_NUMERICAL, {"kind": "numerical_failure", "detail": str(exc)})
        raise
    code = EXIT_BOUNDARY if term_payload["kind"] == TERM_SUPPORT_BOUNDARY else EXIT_OK
    return run.finish(code, term_payload)


def _evolve_verdict(cfg, diag_cfg, state0, result, rows) -> dict:
    """Classify the run from its measured initial data and attach bounds."""
    first = rows[0]
    E0, M0, H0, Hdot0 = first["E_tot"], first["M"], first["H"], first["Hdot_f"]
    domain_measure = diag_cfg.domain_measure
    if domain_measure is None:
        dc = dimension_constants(state0.N)
        domain_measure = dc.volume * state0.r_max ** state0.N

    eps_val = None
    sup_functional = None
    if state0.N == 2 and state0.beta == 0.0:
        eps_val = diagnostics.measured_gap(result, diag_cfg.gap_window)
        sup_functional = state0.g * M0 * M0 - eps_val
    verdict = diagnostics.classify_blowup(
        state0.N, state0.gamma, state0.beta, E0, M0, g=state0.g,
        sup_functional=sup_functional, eps_margin=diag_cfg.eps_margin,
        K=state0.K, domain_measure=domain_measure, e_scale=diag_cfg.e_scale)

    time_bound = None
    bound_error = None
    if verdict.outcome == diagnostics.OUTCOME_BLOWUP:
        try:
            time_bound = diagnostics.blowup_time_bound(
                verdict.theorem_tag, H0, Hdot0, eps=eps_val, N=state0.N,
                E0=E0, beta=state0.beta, gamma=state0.gamma, K=state0.K,
                M=M0, domain_measure=domain_measure)
        except ValueError as exc:
            bound_error = str(exc)

    payload = {
        "N": state0.N, "gamma": state0.gamma, "beta": state0.beta,
        "K": state0.K, "g": state0.g,
        "M": M0, "E0": E0, "H0": H0, "Hdot0": Hdot0,
        "domain_measure": domain_measure,
        "theorem_tag": verdict.theorem_tag,
        "outcome": verdict.outcome,
        "bound": verdict.bound,
        "checked": verdict.checked,
        "time_bound": time_bound,
        "bound_error": bound_error,
        "collapse_time": result.collapse_time,
        "tv_flag_time": result.tv_flag_time,
        "termination": {"kind": result.termination.kind,
                        "time": result.termination.time},
    }
    if eps_val is not None:
        payload["gap"] = eps_val
        payload["gap_window"] = diag_cfg.gap_window

    c0 = state0.sound_speed()
    if float(np.max(np.abs(state0.u))) <= 1e-8 * max(float(np.max(c0)), 1e-300):
        ident = diagnostics.stationary_identities(result.snapshots[0].state,
                                                  result.snapshots[0].gravity)
        payload["stationary_identities"] = asdict(ident)
    return payload


def cmd_classify(args) -> int:
    run = _Run(args, "classify")
    try:
        cfg = build_classify_config(run.sections)
        payload = classify_payload(cfg)
        dump_json(run.dir / "verdict.json", payload)
    except (ConfigError, NumericalError):
        run.finish(EXIT_INVALID, None)
        raise
    return run.finish(EXIT_OK)


def classify_payload(cfg: ClassifyConfig) -> dict:
    verdict = diagnostics.classify_blowup(
        cfg.n_dim, cfg.gamma, cfg.beta, cfg.e0, cfg.m, g=cfg.g,
        sup_functional=cfg.sup_functional, eps=cfg.eps,
        eps_margin=cfg.eps_margin, K=cfg.k,
        domain_measure=cfg.domain_measure, e_scale=cfg.e_scale)
    time_bound = None
    bound_error = None
    if cfg.h0 is not None and verdict.outcome == diagnostics.OUTCOME_BLOWUP:
        eps_for_bound = cfg.eps
        if eps_for_bound is None and cfg.n_dim == 2:
            eps_for_bound = verdict.checked.get("gap")
        try:
            time_bound = diagnostics.blowup_time_bound(
                verdict.theorem_tag, cfg.h0, cfg.hdot0, eps=eps_for_bound,
                N=cfg.n_dim, E0=cfg.e0, beta=cfg.beta, gamma=cfg.gamma,
                K=cfg.k, M=cfg.m, domain_measure=cfg.domain_measure)
        except ValueError as exc:
            bound_error = str(exc)
    return {
        "theorem_tag": verdict.theorem_tag,
        "outcome": verdict.outcome,
        "bound": verdict.bound,
        "checked": verdict.checked,
        "time_bound": time_bound,
        "bound_error": bound_error,
    }


def sweep_rows(cfg: SweepConfig, threads: int = 1) -> List[dict]:
    """Classify every sweep cell; pure, so thread order never matters."""

    def one(cell) -> dict:
        verdict = diagnostics.classify_blowup(
            cell.n_dim, cell.gamma, cell.beta, cell.e0, cfg.m, g=cfg.g,
            K=cfg.k, domain_measure=cfg.domain_measure, e_scale=cfg.e_scale)
        return {"n_dim": cell.n_dim, "gamma": cell.gamma, "e0": cell.e0,
                "beta": cell.beta, "theorem_tag": verdict.theorem_tag,
                "outcome": verdict.outcome, "bound": verdict.bound}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, cfg.cells))
    return [one(cell) for cell in cfg.cells]


def write_sweep_csv(rows: List[dict], path) -> None:
    cols = ("n_dim", "gamma", "e0", "beta", "theorem_tag", "outcome", "bound")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                v = row[c]
                if v is None:
                    cells.append("")
                elif isinstance(v, float):
                    cells.append(repr(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def cmd_sweep(args) -> int:
    run = _Run(args, "sweep")
    try:
        cfg = build_sweep_config(run.sections)
        rows = sweep_rows(cfg, threads=max(1, run.settings.threads))
        write_sweep_csv(rows, run.dir / "sweep.csv")
    except (ConfigError, NumericalError):
        run.finish(EXIT_INVALID, None)
        raise
    return run.finish(EXIT_OK)


def cmd_verify(args) -> int:
    from . import acceptance

    results = acceptance.run_criteria(args.only)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{res.index:2d}/11] {status}  {res.name}: {res.detail}")
    failed = sum(not r.passed for r in results)
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return EXIT_INVALID
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
