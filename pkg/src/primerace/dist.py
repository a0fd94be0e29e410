"""Reconstruction of the limiting logarithmic distribution from a ZeroSet.

Two samplers (independent uniform phases on the full torus, and direct time
averaging of the truncated trigonometric sum), the Bessel-product Fourier
transform, density recovery by inversion, the bias delta, and concentration
bounds. Sampling is seeded, sharded, and merged deterministically: identical
inputs give bit-identical summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .race import RaceTrajectory
from .zeros import ZeroSet

__all__ = [
    "bessel_j0",
    "DistributionSummary",
    "FourierProfile",
    "InsufficientDecayError",
    "sample_li",
    "sample_time_average",
    "fourier_hat",
    "default_xi_grid",
    "density_by_inversion",
    "delta_estimate",
    "chebyshev_bound",
    "compare_empirical",
    "ComparisonResult",
]

RNG_NAME = "philox4x64"
_SAMPLE_SHARD = 8192
_HIST_BINS = 512
_SERIES_CUT = 12.0  # series is rounding-stable below, asymptotic accurate above


# ---------------------------------------------------------------------------
# Bessel J0
# ---------------------------------------------------------------------------

def bessel_j0(x):
    """J0(x) to 1e-10 absolute: power series for |x| < 12, Hankel beyond.

    (The asymptotic expansion cannot reach 1e-10 below ~12, and the series
    loses digits to cancellation above, so the switch sits at 12.)
    """
    scalar = np.isscalar(x)
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.empty(ax.shape)
    small = ax < _SERIES_CUT
    if np.any(small):
        out[small] = _j0_series(ax[small])
    if np.any(~small):
        out[~small] = _j0_asymptotic(ax[~small])
    return float(out) if scalar else out


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -0.25 * x * x
    term = np.ones(x.shape)
    acc = np.ones(x.shape)
    for k in range(1, 42):
        term = term * q / (k * k)
        acc += term
    return acc


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel expansion J0 = sqrt(2/pi x) (P cos(x - pi/4) - Q sin(x - pi/4));
    # terms are added until they stop shrinking (error ~ first omitted term)
    p = np.ones(x.shape)
    qq = np.zeros(x.shape)
    term = np.ones(x.shape)
    prev = np.full(x.shape, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, 80):
        term = term * (2 * m - 1) ** 2 / (8.0 * x * m)
        stop = np.abs(term) >= prev
        active &= ~stop
        if not np.any(active):
            break
        contrib = np.where(active, term, 0.0)
        r = m % 4
        if r == 1:
            qq -= contrib
        elif r == 2:
            p -= contrib
        elif r == 3:
            qq += contrib
        else:
            p += contrib
        prev = np.abs(term)
    chi = x - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - qq * np.sin(chi))


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

@dataclass
class DistributionSummary:
    """Empirical or reconstructed observables of a limiting distribution."""

    mean: float
    variance: float
    skewness: float
    n_samples: int
    delta_estimate: float
    delta_stderr: float
    delta_method: str  # "montecarlo" or "fourier_inversion"
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    underflow: int
    overflow: int
    chebyshev_bound: Optional[tuple[float, str]]
    mean_input: float
    variance_analytic: float
    beta0: float
    truncation_T: float
    seed: Optional[int] = None
    sampler: str = "li_torus"
    rng: str = RNG_NAME
    li_hypothesis: bool = True
    density_t: Optional[np.ndarray] = None
    density_phi: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        d = {
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "n_samples": self.n_samples,
            "delta_estimate": self.delta_estimate,
            "delta_stderr": self.delta_stderr,
            "delta_method": self.delta_method,
            "histogram": {
                "edges": [float(v) for v in self.histogram_edges],
                "counts": [int(v) for v in self.histogram_counts],
                "underflow": self.underflow,
                "overflow": self.overflow,
            },
            "chebyshev_bound": (
                None
                if self.chebyshev_bound is None
                else {"value": self.chebyshev_bound[0], "side": self.chebyshev_bound[1]}
            ),
            "mean_input": self.mean_input,
            "variance_analytic": self.variance_analytic,
            "beta0": self.beta0,
            "truncation_T": self.truncation_T,
            "seed": self.seed,
            "sampler": self.sampler,
            "rng": self.rng,
            "li_hypothesis": self.li_hypothesis,
        }
        if self.density_t is not None:
            d["density"] = {
                "t": [float(v) for v in self.density_t],
                "phi": [float(v) for v in self.density_phi],
            }
        return d


@dataclass(frozen=True)
class FourierProfile:
    """hat(xi) = exp(-i mean xi) prod_gamma J0(2 |xi| |M| / |beta0 + i gamma|).

    Convention hat(xi) = integral exp(-i xi t) dmu(t); the grid covers
    xi >= 0 and hat(-xi) is the conjugate. Valid under the full-torus
    (linear independence) model, one factor per distinct ordinate with
    multiplicity folded into M.
    """

    xi_grid: np.ndarray
    hat_values: np.ndarray
    truncation_T: float
    mean: float
    beta0: float
    n_ordinates: int
    convention: str = "hat(xi) = E[exp(-i xi X)]"
    li_hypothesis: bool = True

    def save_csv(self, path: str | Path) -> None:
        lines = [
            f"# mean={self.mean!r}",
            f"# beta0={self.beta0!r}",
            f"# T={self.truncation_T!r}",
            f"# n_ordinates={self.n_ordinates}",
            "xi,re,im",
        ]
        lines.extend(
            f"{x:.12g},{h.real:.12g},{h.imag:.12g}"
            for x, h in zip(self.xi_grid, self.hat_values)
        )
        Path(path).write_text("\n".join(lines) + "\n")


class InsufficientDecayError(RuntimeError):
    """Fourier inversion refused: the truncated transform holds too little mass."""


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _oscillation_terms(zs: ZeroSet, t_cap: float) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes and phases of the cosine terms 2 Re(M e^(2 pi i theta)/(b+ig))."""
    g, m = zs.distinct(t_cap)
    coef = 2.0 * m / (zs.beta0 + 1j * g)
    return np.abs(coef), np.angle(coef)


def _hist_edges(mean: float, sigma: float) -> np.ndarray:
    span = 6.0 * sigma if sigma > 0 else 0.5
    return np.linspace(mean - span, mean + span, _HIST_BINS + 1)


def _summarize(
    mean_input: float,
    var_analytic: float,
    zs: ZeroSet,
    t_cap: float,
    n: int,
    seed: int,
    sampler: str,
    draw,
) -> DistributionSummary:
    """Shared shard-accumulate-merge loop for both samplers.

    `draw(rng, count) -> float64 samples`. Shards use Philox streams keyed by
    (seed, shard index), so the merge is deterministic and independent of how
    work would be distributed across workers.
    """
    edges = _hist_edges(mean_input, math.sqrt(var_analytic))
    counts = np.zeros(_HIST_BINS, dtype=np.int64)
    under = over = 0
    s1 = s2 = s3 = 0.0
    n_nonneg = 0
    done = 0
    shard = 0
    while done < n:
        c = min(_SAMPLE_SHARD, n - done)
        rng = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, shard]))
        x = draw(rng, c)
        n_nonneg += int((x >= 0.0).sum())
        d = x - mean_input
        s1 += float(d.sum())
        s2 += float((d * d).sum())
        s3 += float((d * d * d).sum())
        h, _ = np.histogram(x, bins=edges)
        counts += h
        under += int((x < edges[0]).sum())
        over += int((x >= edges[-1]).sum())
        # np.histogram puts values equal to the last edge into the last bin
        over -= int((x == edges[-1]).sum())
        done += c
        shard += 1
    mu1 = s1 / n
    m2 = max(s2 / n - mu1 * mu1, 0.0)
    m3 = s3 / n - 3 * mu1 * (s2 / n) + 2 * mu1**3
    delta = n_nonneg / n
    return DistributionSummary(
        mean=mean_input + mu1,
        variance=m2,
        skewness=0.0 if m2 == 0 else m3 / m2**1.5,
        n_samples=n,
        delta_estimate=delta,
        delta_stderr=math.sqrt(max(delta * (1 - delta), 0.0) / n),
        delta_method="montecarlo",
        histogram_edges=edges,
        histogram_counts=counts,
        underflow=under,
        overflow=over,
        chebyshev_bound=chebyshev_bound(mean_input, var_analytic),
        mean_input=mean_input,
        variance_analytic=var_analytic,
        beta0=zs.beta0,
        truncation_T=t_cap,
        seed=seed,
        sampler=sampler,
    )


def sample_li(
    zs: ZeroSet, mean: float, t_cap: float, n: int, seed: int
) -> DistributionSummary:
    """Sample X = mean - sum_gamma 2 Re(M e^(2 pi i theta)/(beta0 + i gamma))
    with independent uniform phases (the full-torus model of the zeros).

    The cosine sums run in float32 (per-sample error ~1e-5, far below every
    tolerance used on them) which roughly halves the cost of large draws.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    amp, phase = _oscillation_terms(zs, t_cap)
    amp32 = amp.astype(np.float32)
    phase32 = phase.astype(np.float32)
    two_pi = np.float32(2.0 * math.pi)

    if amp.size == 0:
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            return np.full(count, float(mean))
    else:
        def draw(rng: np.random.Generator, count: int) -> np.ndarray:
            u = rng.random((count, amp32.size), dtype=np.float32)
            u *= two_pi
            u += phase32
            np.cos(u, out=u)
            return (mean - u @ amp32).astype(np.float64)

    return _summarize(mean, zs.variance(t_cap), zs, t_cap, n, seed, "li_torus", draw)


def sample_time_average(
    zs: ZeroSet, mean: float, t_cap: float, y_max: float, n: int, seed: int
) -> DistributionSummary:
    """Empirical distribution of G(e^y) at uniform random y in [2, y_max].

    Makes no independence assumption on the ordinates; converges to the
    sample_li statistics when they are rationally independent and y_max
    grows.
    """
    if y_max <= 2:
        raise ValueError("y_max must exceed the window start y = 2")
    if n < 1:
        raise ValueError("need n >= 1 samples")

    def draw(rng: np.random.Generator, count: int) -> np.ndarray:
        y = rng.uniform(2.0, y_max, count)
        return zs.g_trig_y(mean, t_cap, y)

    out = _summarize(mean, zs.variance(t_cap), zs, t_cap, n, seed, "time_average", draw)
    return out


# ---------------------------------------------------------------------------
# Fourier transform, density, delta
# ---------------------------------------------------------------------------

def fourier_hat(
    zs: ZeroSet, mean: float, t_cap: float, xi_grid: np.ndarray
) -> FourierProfile:
    """Product-of-Bessel characteristic function under the full-torus model."""
    xi = np.asarray(xi_grid, dtype=np.float64)
    amp, _ = _oscillation_terms(zs, t_cap)
    prod = np.ones(xi.shape)
    block = max(1, 4_000_000 // max(xi.size, 1))
    for i in range(0, amp.size, block):
        prod *= np.prod(bessel_j0(np.abs(xi)[:, None] * amp[None, i : i + block]), axis=1)
    hat = np.exp(-1j * mean * xi) * prod
    return FourierProfile(
        xi_grid=xi,
        hat_values=hat,
        truncation_T=t_cap,
        mean=mean,
        beta0=zs.beta0,
        n_ordinates=int(amp.size),
    )


def default_xi_grid(
    zs: ZeroSet, mean: float, t_cap: float, decay_bound: float = 1e-8
) -> np.ndarray:
    """Grid [0, Xi] where the J0 decay bound certifies |hat| < decay_bound,
    with step fine enough that the highest t-frequency is well resolved."""
    amp, _ = _oscillation_terms(zs, t_cap)
    if amp.size == 0:
        return np.linspace(0.0, 1.0, 64)

    def bound(xi: float) -> float:
        with np.errstate(divide="ignore"):
            b = np.sqrt(2.0 / (math.pi * amp * xi))
        return float(np.exp(np.sum(np.log(np.minimum(1.0, b)))))

    xi_hi = 1.0
    while bound(xi_hi) > decay_bound and xi_hi < 1e6:
        xi_hi *= 1.25
    sigma = math.sqrt(zs.variance(t_cap))
    t_abs_max = abs(mean) + 8.0 * sigma + 1.0
    step = min(0.1 / t_abs_max, xi_hi / 256.0)
    return np.arange(0.0, xi_hi + step, step)


def default_t_grid(mean: float, variance: float, n_points: int = 2001) -> np.ndarray:
    sigma = math.sqrt(max(variance, 0.0))
    span = 8.0 * sigma if sigma > 0 else 1.0
    return np.linspace(mean - span, mean + span, n_points)


def _invert_raw(fp: FourierProfile, t: np.ndarray) -> np.ndarray:
    xi = fp.xi_grid
    re = fp.hat_values.real
    im = fp.hat_values.imag
    phi = np.empty(t.shape)
    block = max(1, 8_000_000 // max(xi.size, 1))
    for i in range(0, t.size, block):
        tb = t[i : i + block]
        arg = tb[:, None] * xi[None, :]
        integrand = np.cos(arg) * re[None, :] - np.sin(arg) * im[None, :]
        phi[i : i + block] = np.trapezoid(integrand, xi, axis=1) / math.pi
    return phi


def density_by_inversion(
    fp: FourierProfile, t_grid: np.ndarray, return_mass: bool = False
):
    """phi(t) = (1/2 pi) integral e^(i xi t) hat(xi) d xi on the stored grid.

    Requires at least 3 ordinates (below that the product does not decay
    enough to invert). The raw mass must land within 1% of 1; the returned
    density is renormalized to integrate to exactly 1 on the grid.
    """
    if fp.n_ordinates < 3:
        raise InsufficientDecayError(
            f"inversion needs >= 3 ordinates for integrable decay, got {fp.n_ordinates}"
        )
    t = np.asarray(t_grid, dtype=np.float64)
    phi = _invert_raw(fp, t)
    mass = float(np.trapezoid(phi, t))
    if abs(mass - 1.0) > 0.01:
        raise InsufficientDecayError(
            f"raw inverted mass {mass:.6f} deviates from 1 by more than 1%; "
            f"extend the xi grid (Xi={fp.xi_grid[-1]:.3g}) or the t window"
        )
    phi = phi / mass
    return (phi, mass) if return_mass else phi


def _integral_nonneg(t: np.ndarray, phi: np.ndarray) -> float:
    """Trapezoid integral of phi over t >= 0, splitting the cell containing 0."""
    if t[0] >= 0:
        return float(np.trapezoid(phi, t))
    if t[-1] <= 0:
        return 0.0
    k = int(np.searchsorted(t, 0.0))
    phi0 = float(np.interp(0.0, t, phi))
    tt = np.concatenate([[0.0], t[k:]])
    pp = np.concatenate([[phi0], phi[k:]])
    return float(np.trapezoid(pp, tt))


def delta_estimate(
    zs: ZeroSet,
    mean: float,
    t_cap: float,
    method: str = "montecarlo",
    n: int = 1_000_000,
    seed: int = 0,
    decay_bound: float = 1e-8,
) -> tuple[float, float]:
    """delta = mu([0, inf)), with a crude error estimate.

    montecarlo: fraction of torus samples >= 0, error = 3 standard errors.
    fourier_inversion: integral of the inverted density over t >= 0, error =
    the observed raw-mass defect plus the trapezoid resolution.
    """
    g, _ = zs.distinct(t_cap)
    if g.size == 0:
        return (1.0 if mean >= 0 else 0.0), 0.0
    if method == "montecarlo":
        s = sample_li(zs, mean, t_cap, n, seed)
        return s.delta_estimate, 3.0 * s.delta_stderr
    if method == "fourier_inversion":
        fp = fourier_hat(zs, mean, t_cap, default_xi_grid(zs, mean, t_cap, decay_bound))
        t = default_t_grid(mean, zs.variance(t_cap))
        phi, mass = density_by_inversion(fp, t, return_mass=True)
        delta = _integral_nonneg(t, phi)
        err = abs(mass - 1.0) + 1e-4
        return min(max(delta, 0.0), 1.0), err
    raise ValueError(f"unknown delta method {method!r}")


def chebyshev_bound(mean: float, variance_total: float) -> Optional[tuple[float, str]]:
    """Concentration bound on the bias from (mean, variance).

    mean < 0: upper bound variance/mean^2 on the upper density (capped at 1);
    mean > 0: lower bound 1 - variance/mean^2 on the lower density (floored
    at 0); mean = 0: inapplicable, None.
    """
    if mean == 0.0:
        return None
    ratio = variance_total / (mean * mean)
    if mean < 0:
        return min(1.0, ratio), "upper"
    return max(0.0, 1.0 - ratio), "lower"


# ---------------------------------------------------------------------------
# empirical-vs-analytic comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonResult:
    rms_diff: float
    correlation: float
    n_points: int
    y_window: tuple[float, float]
    truncation_T: float
    constant_inputs: bool


def compare_empirical(
    traj: RaceTrajectory,
    zs: ZeroSet,
    mean: float,
    t_cap: float,
    y_window: tuple[float, float],
    n: int = 2001,
    empirical_scale: float = 1.0,
) -> ComparisonResult:
    """RMS difference and Pearson correlation between the normalized
    trajectory E(e^y) and the trigonometric approximation G(e^y) on n evenly
    spaced y points.

    `empirical_scale` rescales E before comparing (the phi(q) knob for
    congruence races, where the indicator race is 1/phi(q) of the
    character-sum race the zero side describes).
    """
    y0, y1 = y_window
    if y0 >= y1:
        raise ValueError("empty comparison window")
    if y0 < math.log(2.0) - 1e-12 or y1 > math.log(traj.xmax) + 1e-12:
        raise ValueError("window exceeds the trajectory range")
    if abs(traj.spec.beta0 - zs.beta0) > 1e-12:
        raise ValueError(
            f"beta0 mismatch: trajectory {traj.spec.beta0} vs zeros {zs.beta0}"
        )
    y = np.linspace(y0, y1, n)
    e_vals = empirical_scale * traj.e_at_sorted(np.exp(y))
    g_vals = zs.g_trig_y(mean, t_cap, y)
    diff = e_vals - g_vals
    rms = float(np.sqrt(np.mean(diff * diff)))
    se, sg = float(np.std(e_vals)), float(np.std(g_vals))
    constant = se == 0.0 or sg == 0.0
    if constant:
        corr = float("nan")
    else:
        corr = float(np.corrcoef(e_vals, g_vals)[0, 1])
    return ComparisonResult(rms, corr, n, (y0, y1), t_cap, constant)
