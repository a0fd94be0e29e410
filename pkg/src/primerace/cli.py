"""Command-line entry point: race, zeros, dist, compare, density.

Standard output carries one machine-parseable JSON report per run; progress
goes to standard error. Every output file embeds the resolved configuration
and input digests, and reruns with identical configuration are byte-identical
up to the timestamp field (which is excluded from the digest).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import dist as distmod
from .race import (
    accumulate,
    build_spec,
    export_trajectory,
    import_trajectory,
    log_density_nonneg,
    trajectory_stats,
)
from .zeros import (
    ComponentMeta,
    CriticalLineEvaluator,
    ZeroSet,
    file_digest,
    find_zeros,
    load_zero_file,
    save_zero_file,
    zero_count_main_term,
)

FAMILIES = ("zeta", "dirichlet", "qr", "sum2sq", "gauss", "ec", "ecpair")


_VOLATILE_KEYS = ("timestamp", "digest_sha256", "elapsed_s")


def _strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: _strip_volatile(v) for k, v in obj.items() if k not in _VOLATILE_KEYS}
    if isinstance(obj, list):
        return [_strip_volatile(v) for v in obj]
    return obj


def _canonical_digest(doc: dict) -> str:
    blob = json.dumps(_strip_volatile(doc), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _emit(doc: dict, out_path: Optional[str] = None) -> None:
    doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    doc["digest_sha256"] = _canonical_digest(doc)
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    sys.stdout.write(text)


def _config_of(args: argparse.Namespace) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "config"):
            continue
        cfg[k] = v
    return cfg


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValueError(f"missing required arguments: {', '.join(missing)}")


def _phi(q: int) -> int:
    return sum(1 for x in range(1, q) if math.gcd(x, q) == 1)


def _parse_lfunc(text: str) -> CriticalLineEvaluator:
    if text == "zeta":
        return CriticalLineEvaluator("zeta")
    if text.startswith("dirichlet:"):
        parts = text.split(":")
        q = int(parts[1])
        index = int(parts[2]) if len(parts) > 2 else 0
        if q > 100:
            raise ValueError("dirichlet moduli are supported up to q = 100")
        return CriticalLineEvaluator("dirichlet", q=q, character_index=index)
    raise ValueError(f"unknown lfunc {text!r} (expected zeta or dirichlet:q[:index])")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_race(args: argparse.Namespace) -> int:
    _require(args, "family", "xmax", "out")
    params = {}
    if args.family == "dirichlet":
        if args.q is None or args.a is None or args.b is None:
            raise ValueError("dirichlet race needs --q, --a, --b")
        params = {"q": args.q, "a": args.a, "b": args.b}
    elif args.family == "qr":
        if args.q is None:
            raise ValueError("qr race needs --q")
        params = {"q": args.q}
    elif args.family == "sum2sq":
        if args.D is None:
            raise ValueError("sum2sq race needs --D")
        params = {"D": args.D, "factor2": args.factor2}
    elif args.family == "ec":
        if args.curve is None:
            raise ValueError("ec race needs --curve")
        params = {"curve": args.curve}
    elif args.family == "ecpair":
        if args.curve is None or args.curve2 is None:
            raise ValueError("ecpair race needs --curve and --curve2")
        params = {"curve": args.curve, "curve2": args.curve2}

    spec = build_spec(args.family, beta0=args.beta0, **params)
    t0 = time.perf_counter()
    traj = accumulate(
        spec,
        args.xmax,
        segment_size=args.segment_size,
        workers=args.workers,
        progress=not args.quiet,
    )
    elapsed = time.perf_counter() - t0

    export_trajectory(traj, args.out)
    y0 = math.log(2.0) if args.y0 is None else args.y0
    y1 = math.log(traj.xmax)
    density = log_density_nonneg(traj, y0, y1)
    stats = trajectory_stats(traj, y0, y1)
    doc = {
        "kind": "race_report",
        "family": spec.label,
        "beta0": spec.beta0,
        "li_coefficient": spec.li_coefficient,
        "xmax": traj.xmax,
        "n_breakpoints": int(traj.primes.size),
        "s_final": float(traj.values[-1]),
        "density_nonneg": density,
        "window_y": [y0, y1],
        "sign_changes": stats.sign_changes,
        "running_min": stats.running_min,
        "running_max": stats.running_max,
        "e_running_min": stats.e_running_min,
        "e_running_max": stats.e_running_max,
        "log_mean_E": stats.log_mean,
        # for congruence families the predicted mean is the character-sum-side
        # value; the indicator trajectory differs by the factor phi(q)
        "predicted_mean_rh": spec.predicted_mean_rh(),
        "phi_q": _phi(args.q) if args.family in ("dirichlet", "qr") else None,
        "elapsed_s": round(elapsed, 3),
        "out": args.out,
        "out_sha256": file_digest(args.out),
        "config": _config_of(args),
    }
    _emit(doc)
    return 0


def cmd_zeros(args: argparse.Namespace) -> int:
    _require(args, "lfunc", "tmax", "out")
    if args.tmax <= 0:
        raise ValueError("--tmax must be positive")
    ev = _parse_lfunc(args.lfunc)
    t0 = time.perf_counter()
    gammas = find_zeros(ev, args.tmin, args.tmax, step=args.step)
    elapsed = time.perf_counter() - t0
    label = args.component_label or ev.label()
    meta = {
        label: ComponentMeta(
            weight=args.weight,
            central_order=args.central_order,
            second_moment_pole=args.second_moment_pole,
        )
    }
    zs = ZeroSet.from_entries(args.beta0, [(float(g), label, 1) for g in gammas], meta)
    save_zero_file(zs, args.out)
    doc = {
        "kind": "zeros_report",
        "lfunc": args.lfunc,
        "t_range": [args.tmin, args.tmax],
        "n_zeros": int(gammas.size),
        "count_main_term": zero_count_main_term(ev.q, args.tmax)
        - zero_count_main_term(ev.q, args.tmin),
        "first": float(gammas[0]) if gammas.size else None,
        "component": label,
        "predicted_mean": zs.predicted_mean(),
        "elapsed_s": round(elapsed, 3),
        "out": args.out,
        "out_sha256": file_digest(args.out),
        "config": _config_of(args),
    }
    _emit(doc)
    return 0


def _load_zeroset(args: argparse.Namespace) -> ZeroSet:
    plain = None
    if args.plain_component:
        plain = (
            args.plain_component,
            ComponentMeta(args.weight, args.central_order, args.second_moment_pole),
        )
    zs = load_zero_file(args.zeros, plain_component=plain)
    if args.expect_digest and file_digest(args.zeros) != args.expect_digest:
        raise ValueError(
            f"zero file digest mismatch: {file_digest(args.zeros)} != declared {args.expect_digest}"
        )
    return zs


def cmd_dist(args: argparse.Namespace) -> int:
    _require(args, "zeros", "T")
    zs = _load_zeroset(args)
    mean = zs.predicted_mean() if args.mean is None else args.mean
    t_cap = args.T
    var_an = zs.variance(t_cap)
    doc = {
        "kind": "distribution_summary",
        "zero_file": args.zeros,
        "zero_file_sha256": file_digest(args.zeros),
        "beta0": zs.beta0,
        "T": t_cap,
        "mean": mean,
        "variance_analytic": var_an,
        "method": args.method,
        "chebyshev_bound": None,
        "config": _config_of(args),
    }
    cb = distmod.chebyshev_bound(mean, var_an)
    if cb is not None:
        doc["chebyshev_bound"] = {"value": cb[0], "side": cb[1]}

    n_distinct = zs.distinct(t_cap)[0].size
    run_mc = args.method in ("montecarlo", "both")
    run_fourier = args.method in ("fourier", "fourier_inversion", "both")
    if not (run_mc or run_fourier):
        raise ValueError(f"unknown method {args.method!r}")

    if run_mc:
        t0 = time.perf_counter()
        summary = distmod.sample_li(zs, mean, t_cap, args.n, args.seed)
        doc["montecarlo"] = summary.to_dict()
        doc["montecarlo"]["elapsed_s"] = round(time.perf_counter() - t0, 3)
        doc["delta_estimate"] = summary.delta_estimate
        doc["delta_method"] = "montecarlo"
        doc["delta_stderr"] = summary.delta_stderr

    if run_fourier:
        t0 = time.perf_counter()
        if n_distinct == 0:
            delta_f, err_f = (1.0 if mean >= 0 else 0.0), 0.0
            doc["fourier"] = {"delta": delta_f, "error": err_f, "n_ordinates": 0}
        else:
            try:
                xi = distmod.default_xi_grid(zs, mean, t_cap)
                fp = distmod.fourier_hat(zs, mean, t_cap, xi)
                t_grid = distmod.default_t_grid(mean, var_an)
                phi, mass = distmod.density_by_inversion(fp, t_grid, return_mass=True)
                delta_f = distmod._integral_nonneg(t_grid, phi)
                doc["fourier"] = {
                    "delta": delta_f,
                    "error": abs(mass - 1.0) + 1e-4,
                    "raw_mass": mass,
                    "xi_max": float(xi[-1]),
                    "n_xi": int(xi.size),
                    "n_ordinates": n_distinct,
                    "density": {
                        "t": [float(v) for v in t_grid],
                        "phi": [float(v) for v in phi],
                    },
                }
            except distmod.InsufficientDecayError as exc:
                if not args.allow_fallback:
                    raise
                doc["fourier"] = {"refused": str(exc)}
        doc["fourier"]["elapsed_s"] = round(time.perf_counter() - t0, 3)
        if "delta" in doc["fourier"] and "delta_estimate" not in doc:
            doc["delta_estimate"] = doc["fourier"]["delta"]
            doc["delta_method"] = "fourier_inversion"
            doc["delta_stderr"] = doc["fourier"].get("error", 0.0)

    _emit(doc, args.out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    _require(args, "trajectory", "zeros", "T")
    traj = import_trajectory(args.trajectory)
    zs = _load_zeroset(args)
    mean = zs.predicted_mean() if args.mean is None else args.mean
    y0 = args.ymin if args.ymin is not None else math.log(1e4)
    y1 = args.ymax if args.ymax is not None else math.log(traj.xmax)
    scale = args.phi_q if args.phi_q is not None else 1.0
    res = distmod.compare_empirical(
        traj, zs, mean, args.T, (y0, y1), n=args.n, empirical_scale=scale
    )
    doc = {
        "kind": "comparison_report",
        "trajectory": args.trajectory,
        "trajectory_sha256": file_digest(args.trajectory),
        "zero_file": args.zeros,
        "zero_file_sha256": file_digest(args.zeros),
        "T": args.T,
        "mean": mean,
        "rms_diff": res.rms_diff,
        "correlation": None if math.isnan(res.correlation) else res.correlation,
        "correlation_undefined": res.constant_inputs,
        "n_points": res.n_points,
        "window_y": [y0, y1],
        "empirical_scale": scale,
        "config": _config_of(args),
    }
    _emit(doc, args.out)
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    _require(args, "zeros", "T", "out_profile")
    zs = _load_zeroset(args)
    mean = zs.predicted_mean() if args.mean is None else args.mean
    xi = distmod.default_xi_grid(zs, mean, args.T)
    fp = distmod.fourier_hat(zs, mean, args.T, xi)
    fp.save_csv(args.out_profile)
    written = [args.out_profile]
    doc = {
        "kind": "density_report",
        "zero_file": args.zeros,
        "zero_file_sha256": file_digest(args.zeros),
        "T": args.T,
        "mean": mean,
        "xi_max": float(xi[-1]),
        "n_xi": int(xi.size),
        "out_profile": args.out_profile,
        "config": _config_of(args),
    }
    if args.out_density:
        t_grid = distmod.default_t_grid(mean, zs.variance(args.T))
        phi = distmod.density_by_inversion(fp, t_grid)
        lines = [f"# mean={mean!r}", f"# T={args.T!r}", "t,phi"]
        lines.extend(f"{t:.12g},{p:.12g}" for t, p in zip(t_grid, phi))
        Path(args.out_density).write_text("\n".join(lines) + "\n")
        written.append(args.out_density)
        doc["out_density"] = args.out_density
    doc["written"] = written
    _emit(doc)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_zeroset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zeros", help="zero file path")
    p.add_argument("--T", type=float, help="ordinate truncation")
    p.add_argument("--mean", type=float, default=None, help="mean override (default: from metadata)")
    p.add_argument("--plain-component", default=None, help="component label for bare-ordinate files")
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--central-order", type=int, default=0)
    p.add_argument("--second-moment-pole", type=int, default=-1)
    p.add_argument("--expect-digest", default=None, help="require this sha256 for the zero file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primerace",
        description="Prime number races, their limiting logarithmic distributions, and bias estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("race", help="accumulate a race trajectory and report its bias")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--xmax", type=float)
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--q", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--factor2", action="store_true", help="double the sum2sq coefficients")
    p.add_argument("--curve", help="preset name or a1,a2,a3,a4,a6")
    p.add_argument("--curve2")
    p.add_argument("--beta0", type=float, default=0.5)
    p.add_argument("--y0", type=float, default=None, help="density window start in y = log x")
    p.add_argument("--workers", type=int, default=max(1, os.cpu_count() or 1))
    p.add_argument("--segment-size", type=int, default=1 << 19)
    p.add_argument("--quiet", action="store_true", help="suppress progress on stderr")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_race)

    p = sub.add_parser("zeros", help="locate critical-line zeros and write a zero file")
    p.add_argument("--lfunc", help="zeta or dirichlet:q[:index]")
    p.add_argument("--tmax", type=float)
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--out")
    p.add_argument("--beta0", type=float, default=0.5)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--central-order", type=int, default=0)
    p.add_argument("--second-moment-pole", type=int, default=-1)
    p.add_argument("--component-label", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("dist", help="reconstruct the limiting distribution from a zero file")
    _add_zeroset_flags(p)
    p.add_argument("--method", default="montecarlo", help="montecarlo, fourier, or both")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="summary JSON path")
    p.add_argument(
        "--allow-fallback",
        action="store_true",
        help="report a refused Fourier inversion instead of failing",
    )
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("compare", help="explicit-formula check: E(e^y) against G_T(e^y)")
    p.add_argument("--trajectory")
    _add_zeroset_flags(p)
    p.add_argument("--ymin", type=float, default=None)
    p.add_argument("--ymax", type=float, default=None)
    p.add_argument("--n", type=int, default=2001)
    p.add_argument("--phi-q", type=float, default=None, help="rescale E by this factor (phi(q) for congruence races)")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("density", help="export the Fourier profile and inverted density")
    _add_zeroset_flags(p)
    p.add_argument("--out-profile", help="xi,re,im CSV path")
    p.add_argument("--out-density", default=None, help="t,phi CSV path")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_density)

    return parser


def _splice_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into flag tokens placed before the explicit flags,
    so values given on the command line take precedence."""
    if "--config" not in argv or not argv:
        return argv
    path = argv[argv.index("--config") + 1]
    loaded = json.loads(Path(path).read_text())
    if not isinstance(loaded, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    tokens: list[str] = []
    for k, v in loaded.items():
        flag = "--" + k.replace("_", "-")
        if v is None:
            continue
        if isinstance(v, bool):
            if v:
                tokens.append(flag)
        else:
            tokens.extend([flag, str(v)])
    return [argv[0]] + tokens + argv[1:]


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_splice_config(argv))
        return args.func(args)
    except (ValueError, OSError, distmod.InsufficientDecayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
