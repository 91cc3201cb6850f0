"""Command-line driver: ``evograph simulate | theory | special | compare | sweep``.

Configuration comes from an optional JSON file (``--config``; a previous
``manifest.json`` also works, its ``config`` block is used), then the
``EVOGRAPH_SEED`` / ``EVOGRAPH_OUT`` environment variables, then flags.

Exit codes: 0 ok, 2 bad configuration, 3 parameters in the conjectured
region, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io, special
from .analysis import aggregate, check_concentration, compare, detect_regime, fit_tail
from .errors import (
    ConjecturedRegime,
    DegenerateEpsilon,
    EvographError,
    NoConvergence,
    OutOfRange,
    WindowTooSparse,
)
from .params import Regime, derive, validate
from .process import default_snapshot_times, run_trials
from .recurrence import build_sequence, leading_constant, mass_sums, tail_form

log = logging.getLogger("evograph")

EXIT_OK, EXIT_CONFIG, EXIT_CONJECTURED, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "alpha": 1.0,
    "alpha1": None,
    "m": 1,
    "horizon": 10_000,
    "trials": 20,
    "seed": 0,
    "epsilon_fraction": None,
    "cold_start_edges": 1,
    "snapshots": None,
    "kmax": None,
    "k_report": 30,
    "fit_window": None,
    "workers": 1,
    "per_trial_counts": False,
    "alpha1_grid": None,
    "out": "evograph_out",
}


class ConfigError(EvographError, ValueError):
    pass


# -- configuration -----------------------------------------------------------


def _number(text):
    """Parse ``"0.6"``, ``"3/5"`` or ``"2"`` from the command line."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        if "/" in text:
            return text
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]
        unknown = set(doc) - set(DEFAULTS) - {"schema_version"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        doc.pop("schema_version", None)
        cfg.update(doc)
    if os.environ.get("EVOGRAPH_SEED"):
        try:
            cfg["seed"] = int(os.environ["EVOGRAPH_SEED"])
        except ValueError:
            raise ConfigError("EVOGRAPH_SEED must be an integer") from None
    if os.environ.get("EVOGRAPH_OUT"):
        cfg["out"] = os.environ["EVOGRAPH_OUT"]
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return check_config(cfg)


def _positive_int(cfg, key, low):
    v = cfg[key]
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int) or v < low:
        raise ConfigError(f"{key}={cfg[key]!r} violates {key} >= {low} (integer)")
    cfg[key] = v


def check_config(cfg: dict) -> dict:
    """Validate a merged configuration in place and return it."""
    if cfg["alpha1"] is None:
        cfg["alpha1"] = cfg["alpha"]
    params = validate(cfg["alpha"], cfg["alpha1"], cfg["m"])
    cfg["m"] = params.m
    _positive_int(cfg, "horizon", 2)
    _positive_int(cfg, "trials", 1)
    _positive_int(cfg, "seed", 0)
    _positive_int(cfg, "workers", 1)
    _positive_int(cfg, "k_report", 1)
    if cfg["kmax"] is not None:
        _positive_int(cfg, "kmax", params.m + 2)
    cse = cfg["cold_start_edges"]
    if cse == "m":
        cse = params.m
    if cse not in (1, params.m):
        raise ConfigError(f"cold_start_edges={cse!r} must be 1 or m")
    cfg["cold_start_edges"] = int(cse)
    eps = cfg["epsilon_fraction"]
    if eps is not None and (not isinstance(eps, (int, float)) or not 0 < eps < 1):
        raise ConfigError(f"epsilon_fraction={eps!r} violates 0 < epsilon_fraction < 1")
    if cfg["snapshots"] is not None:
        snaps = sorted({int(t) for t in cfg["snapshots"]})
        if not snaps or snaps[0] < 1 or snaps[-1] > cfg["horizon"]:
            raise ConfigError("snapshots must lie in 1 <= t <= horizon")
        cfg["snapshots"] = snaps
    if cfg["fit_window"] is not None:
        lo, hi = (int(x) for x in cfg["fit_window"])
        if not 1 <= lo < hi:
            raise ConfigError("fit_window must satisfy 1 <= lo < hi")
        cfg["fit_window"] = [lo, hi]
    if cfg["alpha1_grid"] is not None:
        for a1 in cfg["alpha1_grid"]:
            validate(cfg["alpha"], a1, cfg["m"])
    return cfg


def _params(cfg):
    p = validate(cfg["alpha"], cfg["alpha1"], cfg["m"])
    return p, derive(p, cfg["epsilon_fraction"])


def _snapshots(cfg):
    if cfg["snapshots"] is not None:
        return sorted(set(cfg["snapshots"]) | {cfg["horizon"]})
    return default_snapshot_times(cfg["horizon"])


def _simulate(params, cfg, first_stream=0, snapshots=None):
    T = cfg["horizon"]
    res = run_trials(
        params,
        T,
        cfg["trials"],
        cfg["seed"],
        workers=cfg["workers"],
        first_stream=first_stream,
        snapshot_times=snapshots if snapshots is not None else _snapshots(cfg),
        cold_start_edges=cfg["cold_start_edges"],
    )
    return res


def _fit_window(cfg, params):
    if cfg["fit_window"] is not None:
        return tuple(cfg["fit_window"])
    return (params.m + 2, 10**9)


def _safe_fit(profile, regime, window, beta, m):
    try:
        return fit_tail(profile, regime, window, beta=beta, m=m)
    except WindowTooSparse as exc:
        log.warning("%s", exc)
        return None


def _safe_detect(profile, window, m):
    try:
        return detect_regime(profile, window, m=m)
    except WindowTooSparse as exc:
        log.warning("%s", exc)
        return None


def _tail(seq, ks):
    """``(C, tail_form(ks))``; both ``None`` when the prefactor does not settle."""
    try:
        C = leading_constant(seq)
    except NoConvergence as exc:
        log.warning("no tail constant: %s", exc)
        return None, [None] * len(ks)
    return C, tail_form(seq, C, ks)


def _finish(out, command, cfg, artifacts, streams, t0):
    io.write_manifest(out, command, cfg, artifacts, streams, time.perf_counter() - t0)
    for p in artifacts:
        print(p)


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(cfg) -> int:
    t0 = time.perf_counter()
    params, constants = _params(cfg)
    out = Path(cfg["out"])
    res = _simulate(params, cfg)
    artifacts = []
    for t in _snapshots(cfg):
        prof = aggregate(r.histograms[t] for r in res)
        header = ["k", "mean", "stderr", "mean_count"]
        cols = [prof.k, prof.mean, prof.stderr, prof.mean_counts]
        if cfg["per_trial_counts"]:
            header += [f"trial_{r.trial_id}" for r in res]
            cols += list(prof.per_trial)
        artifacts.append(io.write_csv(out / f"hist_t{t}.csv", header, zip(*cols)))

    times = [s.t for s in res[0].trajectory]
    rows = []
    for i, t in enumerate(times):
        e = np.array([r.trajectory[i].e for r in res], dtype=float)
        v = np.array([r.trajectory[i].v for r in res], dtype=float)
        dm = np.array([r.trajectory[i].max_degree for r in res], dtype=float)
        rows.append((t, e.mean(), e.min(), e.max(), constants.eta * t, v.mean(), dm.mean(), dm.max()))
    artifacts.append(
        io.write_csv(
            out / "trajectory.csv",
            ["t", "e_mean", "e_min", "e_max", "eta_t", "v_mean", "max_degree_mean", "max_degree_max"],
            rows,
        )
    )
    conc = check_concentration([r.trajectory[-1] for r in res], constants)
    artifacts.append(
        io.write_json(
            out / "concentration.json",
            {**conc.as_dict(), "rho_eps": constants.rho_eps, "eta": constants.eta},
        )
    )
    _finish(out, "simulate", cfg, artifacts, [r.stream.stream_id for r in res], t0)
    return EXIT_OK


def _theory(params, constants, cfg, k_report=0):
    kmax = cfg["kmax"]
    if kmax is not None and kmax < k_report + 2:
        kmax = k_report + 2
    return build_sequence(params, constants, kmax)


def cmd_theory(cfg) -> int:
    t0 = time.perf_counter()
    params, constants = _params(cfg)
    if constants.regime is Regime.CONJECTURED:
        raise ConjecturedRegime("conjectured region (alpha1 >= 2 alpha_c): no theory available")
    out = Path(cfg["out"])
    seq = _theory(params, constants, cfg)
    ks = np.arange(1, seq.kmax + 1)
    C, tail = _tail(seq, ks)
    resid = np.full(seq.kmax + 1, np.nan)
    # row k of the recurrence pins d[k+2]; report its residual at that index
    r = seq.residuals()
    resid[1 : len(r) + 1] = r
    rows = [(0, seq.d[0], None, resid[0])]
    rows += [(int(k), seq.d[k], tail[k - 1], resid[k]) for k in ks]
    artifacts = [io.write_csv(out / "theory.csv", ["k", "d_k", "tail_form", "residual"], rows)]
    s0, s1 = mass_sums(seq)
    summary = {
        "regime": constants.regime.value,
        "alpha_c": constants.alpha_c,
        "gamma": constants.gamma if constants.regime is not Regime.POWER_LAW else None,
        "C": C,
        "D_mix": seq.D_mix,
        "kmax": seq.kmax,
        "mass": s0,
        "first_moment": s1,
        "constants": constants.as_dict(),
        "params": params.as_dict(),
    }
    if constants.regime is Regime.CRITICAL:
        summary["mu"] = constants.mu
    else:
        summary["beta"] = constants.beta
    if constants.regime is Regime.POWER_LAW:
        summary["exponent"] = constants.power_law_exponent
    artifacts.append(io.write_json(out / "constants.json", summary))
    _finish(out, "theory", cfg, artifacts, [], t0)
    return EXIT_OK


def _kernel_from_args(args, cfg):
    if args.kind is None:
        _, constants = _params(cfg)
        if constants.regime is Regime.CONJECTURED:
            raise ConjecturedRegime("conjectured region: no kernel; pass --kind explicitly")
        return special.kernel_for(constants)
    try:
        if args.kind == "U1":
            return special.KernelSpec.u1(args.beta, args.zeta)
        if args.kind == "U2":
            return special.KernelSpec.u2(args.beta, args.gamma)
        return special.KernelSpec.uc(args.mu)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"kernel {args.kind}: {exc}") from None


def cmd_special(cfg, args) -> int:
    t0 = time.perf_counter()
    out = Path(cfg["out"])
    kernel = _kernel_from_args(args, cfg)
    ks = range(1, args.k_max + 1)
    rows = []
    for k in ks:
        u = special.eval_u(kernel, k, args.tol)
        cf = rel = None
        if kernel.kind == "Uc" and k <= special.K_CLOSED_FORM:
            cf = special.uc_closed_form(kernel.mu, k)
            rel = abs(cf - u) / u
        rows.append((k, u, cf, rel))
    artifacts = [io.write_csv(out / "special.csv", ["k", "u", "closed_form", "rel_diff"], rows)]
    summary = {"kernel": {k: v for k, v in vars(kernel).items() if v is not None}}
    if kernel.kind in ("U1", "U2"):
        grid = [64, 128, 256, 512, 1024]
        ac = special.estimate_asymptotic_constant(kernel, grid, args.tol)
        summary["asymptotic_constant"] = ac.constant
        summary["convergence_rate"] = ac.convergence_rate
    else:
        summary["bounded_by_1_over_k"] = all(r[1] <= 1.0 / r[0] for r in rows)
    artifacts.append(io.write_json(out / "special.json", summary))
    _finish(out, "special", cfg, artifacts, [], t0)
    return EXIT_OK


def _curves(profile_mean, stderr, seq, K):
    _, tail = _tail(seq, np.arange(1, K + 1))
    rows = []
    for k in range(K + 1):
        emp = profile_mean[k] if k < len(profile_mean) else 0.0
        se = stderr[k] if stderr is not None and k < len(stderr) else None
        rows.append((k, emp, se, seq.d[k], tail[k - 1] if k else None))
    return rows


def _compare_one(params, constants, cfg, profile, self_test=False):
    """Comparison report dict plus curve rows (``None`` without theory)."""
    K = cfg["k_report"]
    window = _fit_window(cfg, params)
    regime = constants.regime
    if regime is Regime.CONJECTURED:
        detected = _safe_detect(profile, window, params.m)
        fit = None
        if detected is not None:
            fit = _safe_fit(profile, detected, window, -2.0, params.m)
        report = {
            "regime_declared": regime.value,
            "regime_detected": detected.value if detected else None,
            "fit": fit.as_dict() if fit else None,
            "pass": None,
        }
        return report, None
    seq = _theory(params, constants, cfg, K)
    if self_test:
        mean, se = seq.d, np.zeros(seq.kmax + 1)
        rep = compare(mean, seq, K, stderr=se, z_from=params.m)
    else:
        mean, se = profile.mean, profile.stderr
        rep = compare(profile, seq, K, z_from=params.m)
        rep.regime_detected = _safe_detect(profile, window, params.m)
        if regime is not Regime.CRITICAL:
            rep.fit = _safe_fit(profile, regime, window, constants.beta, params.m)
    target = None
    if regime is Regime.POWER_LAW:
        target = -(1.0 + constants.beta)
    elif regime is Regime.EXPONENTIAL:
        target = math.log(constants.gamma)
    rep.extra["fit_target"] = target
    if regime is Regime.CRITICAL and rep.max_z is not None:
        rep.extra["within_3_stderr"] = bool(rep.max_z <= 3.0)
    return rep.as_dict(), _curves(mean, se, seq, K)


def cmd_compare(cfg, self_test=False) -> int:
    t0 = time.perf_counter()
    params, constants = _params(cfg)
    out = Path(cfg["out"])
    streams = []
    profile = None
    if not self_test or constants.regime is Regime.CONJECTURED:
        T = cfg["horizon"]
        res = _simulate(params, cfg, snapshots=[T])
        profile = aggregate(r.histograms[T] for r in res)
        streams = [r.stream.stream_id for r in res]
    report, rows = _compare_one(params, constants, cfg, profile, self_test)
    report["self_test"] = bool(self_test)
    report["params"] = params.as_dict()
    report["horizon"] = None if self_test else cfg["horizon"]
    report["trials"] = None if self_test else cfg["trials"]
    artifacts = [io.write_json(out / "report.json", report)]
    if rows is not None:
        artifacts.append(
            io.write_csv(
                out / "curves.csv",
                ["k", "empirical_mean", "stderr", "theory", "tail_form"],
                rows,
            )
        )
    _finish(out, "compare", cfg, artifacts, streams, t0)
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    t0 = time.perf_counter()
    grid = cfg["alpha1_grid"]
    if not grid:
        raise ConfigError("sweep needs alpha1_grid (e.g. --alpha1-grid 0.3,0.4,0.5)")
    out = Path(cfg["out"])
    T = cfg["horizon"]
    rows, streams = [], []
    for i, a1 in enumerate(grid):
        params = validate(cfg["alpha"], a1, cfg["m"])
        constants = derive(params, cfg["epsilon_fraction"])
        res = _simulate(params, cfg, first_stream=i * cfg["trials"], snapshots=[T])
        streams += [r.stream.stream_id for r in res]
        profile = aggregate(r.histograms[T] for r in res)
        report, _ = _compare_one(params, constants, cfg, profile)
        fit = report.get("fit") or {}
        rows.append(
            (
                a1,
                constants.alpha_c,
                report["regime_declared"],
                report["regime_detected"],
                fit.get("kind"),
                fit.get("estimate"),
                fit.get("stderr"),
                report.get("fit_target"),
                report.get("tv"),
                report.get("pass"),
            )
        )
    header = [
        "alpha1", "alpha_c", "regime_declared", "regime_detected", "fit_kind",
        "fit_estimate", "fit_stderr", "fit_target", "tv", "pass",
    ]
    artifacts = [io.write_csv(out / "regime_map.csv", header, rows)]
    _finish(out, "sweep", cfg, artifacts, streams, t0)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def _grid(text):
    return [_number(x) for x in text.split(",") if x.strip()]


def _window(text):
    lo, hi = text.split(",")
    return [int(lo), int(hi)]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="JSON config file or a previous manifest.json")
    g.add_argument("--alpha", type=_number)
    g.add_argument("--alpha1", type=_number)
    g.add_argument("-m", "--m", type=int)
    g.add_argument("-T", "--horizon", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--epsilon-fraction", dest="epsilon_fraction", type=float)
    g.add_argument("--cold-start-edges", dest="cold_start_edges", type=lambda s: s if s == "m" else int(s))
    g.add_argument("--snapshots", type=lambda s: [int(x) for x in s.split(",")])
    g.add_argument("--kmax", type=int)
    g.add_argument("--k-report", dest="k_report", type=int)
    g.add_argument("--fit-window", dest="fit_window", type=_window, help="lo,hi")
    g.add_argument("--workers", type=int)
    g.add_argument("--per-trial-counts", dest="per_trial_counts", action="store_const", const=True)
    g.add_argument("-o", "--out", help="output directory")
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="evograph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run trials, write histograms")
    sub.add_parser("theory", parents=[common], help="constructed d_k and constants")
    sp = sub.add_parser("special", parents=[common], help="evaluate u1/u2/uc")
    sp.add_argument("--kind", choices=["U1", "U2", "Uc"])
    sp.add_argument("--beta", type=float)
    sp.add_argument("--zeta", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--k-max", dest="k_max", type=int, default=20)
    sp.add_argument("--tol", type=float, default=special.DEFAULT_TOL)
    cp = sub.add_parser("compare", parents=[common], help="simulation vs theory")
    cp.add_argument("--self-test", dest="self_test", action="store_true",
                    help="compare theory with itself (no simulation)")
    sw = sub.add_parser("sweep", parents=[common], help="regime map over alpha1")
    sw.add_argument("--alpha1-grid", dest="alpha1_grid", type=_grid, help="comma list")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "theory":
            return cmd_theory(cfg)
        if args.command == "special":
            return cmd_special(cfg, args)
        if args.command == "compare":
            return cmd_compare(cfg, self_test=args.self_test)
        return cmd_sweep(cfg)
    except (OutOfRange, DegenerateEpsilon, ConfigError) as exc:
        print(f"evograph: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConjecturedRegime as exc:
        print(f"evograph: {exc}", file=sys.stderr)
        return EXIT_CONJECTURED
    except (EvographError, ArithmeticError, ValueError) as exc:
        print(f"evograph: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"evograph: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
