"""Race trajectories S(x), normalization E(x), and logarithmic densities.

S is the piecewise-constant summatory function of the weighted coefficients
over primes; E(x) = (log x / x^beta0) (S(x) + li_coefficient * li(x)). The
density of {S >= 0} is computed exactly on the step function, in the y = log x
variable.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .coeffs import (
    CoefficientSource,
    dirichlet_pair_source,
    ec_pair_source,
    ec_source,
    gauss_angle_source,
    parse_curve,
    qr_race_source,
    sum2sq_source,
    zeta_source,
)
from .primes import LiEvaluator, PrimeStream

__all__ = [
    "RaceSpec",
    "RaceTrajectory",
    "accumulate",
    "normalize",
    "log_density_nonneg",
    "trajectory_stats",
    "export_trajectory",
    "import_trajectory",
    "build_spec",
    "make_spec",
]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RaceSpec:
    """A conjugation-stable weighted set of coefficient sources.

    `li_coefficient` is sum of weight * (order at s=1), negative for poles,
    so the pi-vs-Li race carries -1. `beta0` is the assumed supremum of zero
    real parts; it is an input, never inferred.
    """

    terms: tuple[tuple[CoefficientSource, float], ...]
    beta0: float = 0.5
    li_coefficient: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        if self.beta0 < 0.5 or self.beta0 >= 1.0:
            raise ValueError("beta0 must lie in [1/2, 1)")

    def predicted_mean_rh(self) -> Optional[float]:
        total = 0.0
        for src, w in self.terms:
            m = src.predicted_mean_rh()
            if m is None:
                return None
            total += w * m
        return total if self.terms else None


def make_spec(
    terms: list[tuple[CoefficientSource, float]],
    beta0: float = 0.5,
    li_coefficient: Optional[float] = None,
    label: Optional[str] = None,
) -> RaceSpec:
    if li_coefficient is None:
        li_coefficient = float(sum(w * src.pole_order_s1 for src, w in terms))
    if label is None:
        label = "+".join(
            (f"{w:g}*{src.label}" if w != 1 else src.label) for src, w in terms
        ) or "empty"
    return RaceSpec(tuple(terms), beta0, li_coefficient, label)


def build_spec(family: str, beta0: float = 0.5, **params) -> RaceSpec:
    """Construct the standard single-family race specs used by the CLI."""
    if family == "zeta":
        return make_spec([(zeta_source(), 1.0)], beta0)
    if family == "dirichlet":
        return make_spec(
            [(dirichlet_pair_source(params["q"], params["a"], params["b"]), 1.0)], beta0
        )
    if family == "qr":
        return make_spec([(qr_race_source(params["q"]), 1.0)], beta0)
    if family == "sum2sq":
        return make_spec(
            [(sum2sq_source(params["D"], params.get("factor2", False)), 1.0)], beta0
        )
    if family == "gauss":
        return make_spec([(gauss_angle_source(), 1.0)], beta0)
    if family == "ec":
        return make_spec([(ec_source(parse_curve(params["curve"])), 1.0)], beta0)
    if family == "ecpair":
        return make_spec(
            [(ec_pair_source(parse_curve(params["curve"]), parse_curve(params["curve2"])), 1.0)],
            beta0,
        )
    raise ValueError(f"unknown race family {family!r}")


@dataclass
class RaceTrajectory:
    """Breakpoints (p_k, S(p_k)) of the summatory function up to xmax.

    S is right-continuous: the value at x = p includes p. Between breakpoints
    it is constant; before the first one it is 0.
    """

    primes: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64 cumulative sums at the breakpoints
    spec: RaceSpec
    xmax: float
    _li: Optional[np.ndarray] = field(default=None, repr=False)
    li_evaluator: LiEvaluator = field(default_factory=LiEvaluator, repr=False)

    def __post_init__(self) -> None:
        if self.primes.size != self.values.size or self.primes.size == 0:
            raise ValueError("trajectory needs matching, nonempty breakpoint arrays")

    def s_at(self, x: np.ndarray | float) -> np.ndarray | float:
        xs = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self.primes, xs, side="right") - 1
        out = np.where(idx >= 0, self.values[np.maximum(idx, 0)], 0.0)
        return float(out) if np.isscalar(x) else out

    def li_at_breakpoints(self) -> np.ndarray:
        if self._li is None:
            self._li = self.li_evaluator.li_many(self.primes.astype(np.float64))
        return self._li

    def e_at_sorted(self, xs: np.ndarray) -> np.ndarray:
        """E(x) on a sorted array of points in [2, xmax]."""
        xs = np.asarray(xs, dtype=np.float64)
        s = self.s_at(xs)
        total = s
        if self.spec.li_coefficient != 0.0:
            total = s + self.spec.li_coefficient * self.li_evaluator.li_many(xs)
        return np.log(xs) / xs**self.spec.beta0 * total


def _segment_values(spec: RaceSpec, primes: np.ndarray) -> np.ndarray:
    lam = np.zeros(primes.shape)
    for src, w in spec.terms:
        lam += w * src.values(primes)
    return lam


def _segment_task(args: tuple[RaceSpec, np.ndarray]) -> np.ndarray:
    return _segment_values(*args)


def accumulate(
    spec: RaceSpec,
    xmax: float,
    segment_size: int = 1 << 19,
    workers: int = 1,
    progress: bool = False,
) -> RaceTrajectory:
    """Sum the race coefficients over all primes <= xmax.

    Breakpoints are kept only where the combined coefficient is nonzero; an
    all-zero race yields the single sentinel breakpoint (2, 0). Partial sums
    are accumulated in extended precision. With workers > 1 the coefficient
    evaluation is sharded by segment and merged in order, so results do not
    depend on the worker count.
    """
    if xmax < 2:
        raise ValueError("xmax must be >= 2")
    limit = int(math.floor(xmax)) + 1
    stream = PrimeStream(limit, segment_size)
    segs = list(stream.segments())

    if workers > 1 and len(segs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lam_parts = list(pool.map(_segment_task, [(spec, s) for s in segs]))
    else:
        lam_parts = []
        for i, s in enumerate(segs):
            lam_parts.append(_segment_values(spec, s))
            if progress:
                print(f"  segment {i + 1}/{len(segs)} (p < {s[-1]})", file=sys.stderr)

    if segs:
        ps = np.concatenate(segs)
        lam = np.concatenate(lam_parts)
        keep = lam != 0.0
        ps, lam = ps[keep], lam[keep]
    else:
        ps = np.empty(0, dtype=np.int64)
        lam = np.empty(0)
    if ps.size == 0:
        ps = np.array([2], dtype=np.int64)
        cum = np.array([0.0])
    else:
        cum = np.cumsum(lam.astype(np.longdouble)).astype(np.float64)
    return RaceTrajectory(ps, cum, spec, float(xmax))


def normalize(traj: RaceTrajectory, x: float) -> float:
    """E(x) = (log x / x^beta0) (S(x) + li_coefficient * li(x))."""
    if not (2.0 <= x <= traj.xmax):
        raise ValueError(f"x must lie in [2, xmax={traj.xmax}]")
    s = traj.s_at(x)
    c = traj.spec.li_coefficient
    if c != 0.0:
        s = s + c * traj.li_evaluator.li(x)
    return math.log(x) / x**traj.spec.beta0 * s


def _window(traj: RaceTrajectory, y0: Optional[float], y1: Optional[float]) -> tuple[float, float]:
    lo = LOG2 if y0 is None else float(y0)
    hi = math.log(traj.xmax) if y1 is None else float(y1)
    if lo < LOG2 - 1e-12:
        raise ValueError("window must start at x >= 2 (y0 >= log 2)")
    if not lo < hi:
        raise ValueError("empty integration window")
    if hi > math.log(traj.xmax) + 1e-12:
        raise ValueError("window exceeds the trajectory range")
    return lo, hi


def _intervals(traj: RaceTrajectory, lo: float, hi: float):
    """Partition [lo, hi) into pieces where S is constant.

    Returns (ya, yb, value, k) arrays; k = -1 marks the leading zone where
    S = 0 (before the first breakpoint), else the breakpoint index.
    """
    ys = np.log(traj.primes.astype(np.float64))
    inner = ys[(ys > lo) & (ys < hi)]
    bounds = np.concatenate([[lo], inner, [hi]])
    ya, yb = bounds[:-1], bounds[1:]
    idx = np.searchsorted(ys, ya, side="right") - 1
    vals = np.where(idx >= 0, traj.values[np.maximum(idx, 0)], 0.0)
    return ya, yb, vals, idx


def log_density_nonneg(
    traj: RaceTrajectory,
    y0: Optional[float] = None,
    y_end: Optional[float] = None,
    use_normalized: bool = False,
) -> float:
    """Exact measure of {y in window : S(e^y) >= 0} divided by the window length.

    With `use_normalized` the sign of E(e^y) is used instead; the two agree
    unless the spec carries a nonzero li coefficient. At breakpoints the
    right-continuous value decides (S includes p at x = p).
    """
    lo, hi = _window(traj, y0, y_end)
    ya, yb, vals, idx = _intervals(traj, lo, hi)
    c = traj.spec.li_coefficient
    if not use_normalized or c == 0.0:
        measure = float(np.sum((yb - ya)[vals >= 0.0]))
        return measure / (hi - lo)

    li_bp = traj.li_at_breakpoints()
    ev = traj.li_evaluator
    measure = 0.0
    for a, b, v, k in zip(ya, yb, vals, idx):
        xa, xb = max(math.exp(a), 2.0), math.exp(b)
        li_a = ev.li(xa) if k < 0 else li_bp[k]
        # endpoint values of S + c*li; the log-factor is positive
        ga = v + c * li_a
        gb = v + c * (li_a + _li_increment(ev, xa, xb))
        if ga >= 0.0 and gb >= 0.0:
            measure += b - a
        elif ga < 0.0 and gb < 0.0:
            continue
        else:
            # single crossing: S constant and c*li monotone on the piece
            t_lo, t_hi = a, b
            for _ in range(60):
                t_mid = 0.5 * (t_lo + t_hi)
                g_mid = v + c * (li_a + _li_increment(ev, xa, math.exp(t_mid)))
                if (g_mid >= 0.0) == (ga >= 0.0):
                    t_lo = t_mid
                else:
                    t_hi = t_mid
            cross = 0.5 * (t_lo + t_hi)
            measure += (cross - a) if ga >= 0.0 else (b - cross)
    return measure / (hi - lo)


def _li_increment(ev: LiEvaluator, xa: float, xb: float) -> float:
    if xb <= xa:
        return 0.0
    from .primes import _adaptive_simpson_batch

    return float(
        _adaptive_simpson_batch(
            np.array([xa]), np.array([xb]), np.array([ev.quadrature_tolerance])
        )[0]
    )


@dataclass(frozen=True)
class TrajectoryStats:
    sign_changes: int
    running_min: float  # extremes of the raw summatory function S
    running_max: float
    log_mean: float  # time average of E(e^y) over the window
    e_running_min: float  # extremes of E, sampled at the piece endpoints
    e_running_max: float


def _li_table(traj: RaceTrajectory) -> tuple[np.ndarray, np.ndarray]:
    xs = traj.primes.astype(np.float64)
    li = traj.li_at_breakpoints()
    if xs[0] > 2.0:
        xs = np.concatenate([[2.0], xs])
        li = np.concatenate([[0.0], li])
    if traj.xmax > xs[-1]:
        tail = _li_increment(traj.li_evaluator, float(xs[-1]), traj.xmax)
        xs = np.concatenate([xs, [traj.xmax]])
        li = np.concatenate([li, [li[-1] + tail]])
    return xs, li


def trajectory_stats(
    traj: RaceTrajectory, y0: Optional[float] = None, y_end: Optional[float] = None
) -> TrajectoryStats:
    """Sign changes and extremes of S, the extremes of E, and the time
    average of E over the window (the empirical counterpart of the mean)."""
    lo, hi = _window(traj, y0, y_end)
    ya, yb, vals, idx = _intervals(traj, lo, hi)
    signs = np.sign(vals)
    flips = int(np.sum(signs[1:] * signs[:-1] < 0))
    vmin, vmax = float(np.min(vals)), float(np.max(vals))

    beta = traj.spec.beta0
    c = traj.spec.li_coefficient
    if c == 0.0:
        # closed-form integral of y e^(-beta y) on each constant piece
        integral = float(np.sum(vals * (_f_antideriv(yb, beta) - _f_antideriv(ya, beta))))
        li_a = li_b = 0.0
    else:
        xs_tab, li_tab = _li_table(traj)
        nodes, weights = np.polynomial.legendre.leggauss(6)
        ymid = 0.5 * (ya + yb)[:, None] + 0.5 * (yb - ya)[:, None] * nodes[None, :]
        half = 0.5 * (yb - ya)
        li_nodes = np.interp(np.exp(ymid), xs_tab, li_tab)
        integrand = ymid * np.exp(-beta * ymid) * (vals[:, None] + c * li_nodes)
        integral = float(np.sum(half * (integrand @ weights)))
        li_a = np.interp(np.exp(ya), xs_tab, li_tab)
        li_b = np.interp(np.exp(yb), xs_tab, li_tab)
    # E at the piece endpoints (the weight y e^(-beta y) is monotone on
    # y >= 2 > 1/beta, so for c = 0 these are the exact running extremes)
    e_left = ya * np.exp(-beta * ya) * (vals + c * li_a)
    e_right = yb * np.exp(-beta * yb) * (vals + c * li_b)
    e_min = float(min(e_left.min(), e_right.min()))
    e_max = float(max(e_left.max(), e_right.max()))
    return TrajectoryStats(flips, vmin, vmax, integral / (hi - lo), e_min, e_max)


def _f_antideriv(y: np.ndarray, beta: float) -> np.ndarray:
    return -np.exp(-beta * y) * (y / beta + 1.0 / (beta * beta))


def export_trajectory(traj: RaceTrajectory, path: str | Path) -> None:
    """CSV with header comments and rows p,S (12 significant digits)."""
    lines = [
        f"# family={traj.spec.label}",
        f"# beta0={traj.spec.beta0!r}",
        f"# li_coefficient={traj.spec.li_coefficient!r}",
        f"# xmax={traj.xmax!r}",
        "p,S",
    ]
    lines.extend(f"{int(p)},{v:.12g}" for p, v in zip(traj.primes, traj.values))
    Path(path).write_text("\n".join(lines) + "\n")


def import_trajectory(path: str | Path) -> RaceTrajectory:
    """Inverse of export_trajectory; the spec carries metadata but no sources."""
    meta: dict[str, str] = {}
    ps: list[int] = []
    vs: list[float] = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
            continue
        if line == "p,S":
            continue
        try:
            p_str, v_str = line.split(",")
            ps.append(int(p_str))
            vs.append(float(v_str))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: malformed row {line!r}") from exc
    if not ps:
        raise ValueError(f"{path}: no breakpoints")
    spec = RaceSpec(
        terms=(),
        beta0=float(meta.get("beta0", 0.5)),
        li_coefficient=float(meta.get("li_coefficient", 0.0)),
        label=meta.get("family", Path(path).stem),
    )
    return RaceTrajectory(
        np.array(ps, dtype=np.int64), np.array(vs), spec, float(meta.get("xmax", ps[-1]))
    )
