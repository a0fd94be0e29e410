"""Critical-line evaluation of zeta and real Dirichlet L-functions, zero
location, and zero-set bookkeeping (M(gamma), the mean m_S, the variance sum).

Evaluation is Euler-Maclaurin on Hurwitz zeta; zero scanning rotates to a
real-valued Hardy-style Z function and bisects sign changes. Found zeros get
multiplicity 1: numerical bisection cannot certify higher multiplicity, so
multiplicities and central orders are user-supplied metadata.
"""

from __future__ import annotations

import cmath
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import loggamma

from .coeffs import kronecker, _is_fundamental

__all__ = [
    "CriticalLineEvaluator",
    "find_zeros",
    "ZeroSet",
    "ComponentMeta",
    "load_zero_file",
    "save_zero_file",
    "zero_count_main_term",
    "file_digest",
]

TWO_PI = 2.0 * math.pi


def _bernoulli_over_factorial(count: int) -> np.ndarray:
    """B_{2k}/(2k)! for k = 1..count, exact recurrence then float."""
    n_max = 2 * count
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        binom = 1
        for j in range(m):
            acc += binom * b[j]
            binom = binom * (m + 1 - j) // (j + 1)
        b.append(-acc / (m + 1))
    out = np.empty(count)
    fact = 1
    for k in range(1, count + 1):
        fact *= (2 * k) * (2 * k - 1)
        out[k - 1] = float(b[2 * k] / fact)
    return out


_B2K_OVER_FACT = _bernoulli_over_factorial(40)


def _hurwitz_many(s: np.ndarray, a: float, em_terms: int, n_terms: int) -> np.ndarray:
    """Hurwitz zeta(s, a) for an array of s sharing one truncation length."""
    s = np.asarray(s, dtype=np.complex128)
    n = np.arange(n_terms, dtype=np.float64) + a
    ln_n = np.log(n)
    out = np.empty(s.shape, dtype=np.complex128)
    block = max(1, 4_000_000 // max(n_terms, 1))
    for i in range(0, s.size, block):
        sb = s[i : i + block]
        out[i : i + block] = np.exp(-sb[:, None] * ln_n[None, :]).sum(axis=1)
    z = float(n_terms) + a
    zs = np.exp(-s * math.log(z))
    out += zs * z / (s - 1.0) + 0.5 * zs
    # asymptotic correction sum: B_2k/(2k)! * s(s+1)...(s+2k-2) * z^(1-2k)
    t = s / z
    corr = _B2K_OVER_FACT[0] * t
    for k in range(2, em_terms + 1):
        t = t * (s + (2 * k - 3)) * (s + (2 * k - 2)) / (z * z)
        corr = corr + _B2K_OVER_FACT[k - 1] * t
    out += zs * corr
    return out


def _n_terms_for(t_abs: float) -> int:
    return max(16, int(t_abs / math.pi) + 8)


@dataclass(frozen=True)
class CriticalLineEvaluator:
    """Evaluates L(1/2 + it) for zeta or a real primitive Dirichlet character.

    `em_terms` is the Euler-Maclaurin correction depth; the main-sum length
    grows with t so the remainder stays below `precision_target` for
    |t| <= t_max. The Dirichlet case goes through the Hurwitz decomposition
    L(s, chi) = q^-s sum_r chi(r) zeta(s, r/q).
    """

    lfunc: str = "zeta"  # "zeta" or "dirichlet"
    q: int = 1
    character_index: int = 0
    em_terms: int = 24
    precision_target: float = 1e-10
    t_max: float = 1e5
    _chi: tuple[int, ...] = field(init=False, compare=False, repr=False)
    _parity: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.em_terms < 4 or self.em_terms > 39:
            raise ValueError("em_terms must be in [4, 39]")
        if self.lfunc == "zeta":
            object.__setattr__(self, "_chi", (1,))
            object.__setattr__(self, "_parity", 0)
            return
        if self.lfunc != "dirichlet":
            raise ValueError(f"unknown lfunc {self.lfunc!r}")
        discs = [d for d in (self.q, -self.q) if _is_fundamental(d)]
        if not discs:
            raise ValueError(f"no real primitive character of modulus {self.q}")
        if not 0 <= self.character_index < len(discs):
            raise ValueError(f"character_index out of range for q={self.q}")
        d = discs[self.character_index]
        object.__setattr__(self, "_chi", tuple(kronecker(d, r) for r in range(self.q)))
        object.__setattr__(self, "_parity", 0 if d > 0 else 1)

    def label(self) -> str:
        if self.lfunc == "zeta":
            return "zeta"
        return f"dirichlet_{self.q}_{self.character_index}"

    # -- raw values -------------------------------------------------------

    def evaluate_s(self, s: complex) -> complex:
        """L(s) at a general point (s != 1)."""
        return complex(self._values(np.array([s], dtype=np.complex128))[0])

    def evaluate(self, t: float) -> complex:
        """L(1/2 + it)."""
        self._check_range(abs(t))
        return self.evaluate_s(0.5 + 1j * t)

    def _values(self, s: np.ndarray) -> np.ndarray:
        n_terms = _n_terms_for(float(np.max(np.abs(s.imag))))
        if self.lfunc == "zeta":
            return _hurwitz_many(s, 1.0, self.em_terms, n_terms)
        out = np.zeros(s.shape, dtype=np.complex128)
        for r, chi_r in enumerate(self._chi):
            if chi_r:
                out += chi_r * _hurwitz_many(s, r / self.q, self.em_terms, n_terms)
        return out * np.exp(-s * math.log(self.q))

    # -- rotated real detector --------------------------------------------

    def theta(self, t: np.ndarray) -> np.ndarray:
        """Phase making e^(i theta) L(1/2+it) real (Riemann-Siegel theta for zeta)."""
        t = np.asarray(t, dtype=np.float64)
        zarg = (0.5 + self._parity) / 2.0 + 0.5j * t
        return loggamma(zarg).imag + (t / 2.0) * math.log(self.q / math.pi)

    def z_many(self, t: np.ndarray) -> np.ndarray:
        """Hardy-style Z(t), real-valued on the critical line, chunked by height."""
        t = np.asarray(t, dtype=np.float64)
        if t.size == 0:
            return np.empty(0)
        self._check_range(float(np.max(np.abs(t))))
        out = np.empty(t.shape)
        order = np.argsort(np.abs(t), kind="stable")
        block = 2048
        for i in range(0, t.size, block):
            sel = order[i : i + block]
            tb = t[sel]
            vals = self._values(0.5 + 1j * tb)
            out[sel] = (np.exp(1j * self.theta(tb)) * vals).real
        return out

    def z(self, t: float) -> float:
        return float(self.z_many(np.array([t]))[0])

    def _check_range(self, t_abs: float) -> None:
        if t_abs > self.t_max:
            raise ValueError(f"|t|={t_abs} beyond validated range t_max={self.t_max}")

    def remainder_bound(self, t_abs: float) -> float:
        """Upper bound for the Euler-Maclaurin truncation error at height t."""
        n_terms = _n_terms_for(t_abs)
        z = n_terms + 1.0
        k = self.em_terms
        log_rise = sum(
            math.log(abs(complex(0.5, t_abs) + j)) for j in range(2 * k + 1)
        )
        log_term = (
            math.log(abs(_B2K_OVER_FACT[k] if k < len(_B2K_OVER_FACT) else 1e-30))
            + log_rise
            - (0.5 + 2 * k + 1) * math.log(z)
        )
        ratio = abs(complex(0.5 + 2 * k + 1, t_abs)) / (0.5 + 2 * k + 1)
        return math.exp(log_term) * ratio


def zero_count_main_term(q: int, t: float) -> float:
    """Main term of the zero-counting function on (0, t]."""
    if t <= 0:
        return 0.0
    x = q * t / (TWO_PI * math.e)
    if x <= 1.0:
        return 0.0
    return t / TWO_PI * math.log(x) + 7.0 / 8.0


def find_zeros(
    ev: CriticalLineEvaluator,
    t_min: float,
    t_max: float,
    step: float = 0.05,
    refine_tol: float = 1e-8,
) -> np.ndarray:
    """Ordinates of sign changes of Z on [t_min, t_max], bisected to refine_tol.

    Each zero is returned once (multiplicity 1). If the count strays from the
    zero-counting main term a warning with diagnostics is emitted; pairs
    closer than the scan step can in principle be missed.
    """
    if t_min < 0:
        raise ValueError("t_min must be >= 0")
    if t_max <= t_min:
        return np.empty(0)
    grid = np.arange(t_min, t_max + step * 0.5, step)
    grid[-1] = min(grid[-1], t_max)
    zv = ev.z_many(grid)
    sign = np.sign(zv)
    hits = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    exact = np.flatnonzero(sign == 0)

    lo, hi = grid[hits], grid[hits + 1]
    z_lo = zv[hits]
    n_iter = max(1, int(math.ceil(math.log2(step / refine_tol))) + 2)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        z_mid = ev.z_many(mid)
        take_left = (z_lo * z_mid) <= 0
        hi = np.where(take_left, mid, hi)
        lo = np.where(take_left, lo, mid)
        z_lo = np.where(take_left, z_lo, z_mid)
    zeros = np.sort(np.concatenate([0.5 * (lo + hi), grid[exact]]))
    zeros = zeros[zeros > 0]

    expected = zero_count_main_term(ev.q, t_max) - zero_count_main_term(ev.q, t_min)
    if abs(zeros.size - expected) > 2.0 + 0.02 * expected:
        warnings.warn(
            f"zero count sanity: found {zeros.size} on [{t_min}, {t_max}] for "
            f"{ev.label()} but the counting main term gives {expected:.2f}; "
            f"scan step {step} may be missing close pairs",
            stacklevel=2,
        )
    return zeros


# ---------------------------------------------------------------------------
# zero sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentMeta:
    """Per-component weight a_f and the orders feeding the mean formula."""

    weight: float
    central_order: int = 0
    second_moment_pole: int = -1


@dataclass(frozen=True)
class ZeroSet:
    """Positive ordinates with per-component multiplicities at real part beta0."""

    beta0: float
    gammas: np.ndarray
    component_ids: np.ndarray
    multiplicities: np.ndarray
    labels: tuple[str, ...]
    meta: dict[str, ComponentMeta]

    def __post_init__(self) -> None:
        if np.any(self.gammas <= 0):
            raise ValueError("ordinates must be strictly positive")
        if np.any(np.diff(self.gammas) < 0):
            raise ValueError("ordinates must be sorted ascending")
        if np.any(self.multiplicities < 1):
            raise ValueError("multiplicities must be >= 1")
        if set(self.labels) != set(self.meta):
            raise ValueError("component metadata must cover exactly the labels")

    @staticmethod
    def from_entries(
        beta0: float,
        entries: list[tuple[float, str, int]],
        meta: dict[str, ComponentMeta],
    ) -> "ZeroSet":
        entries = sorted(entries, key=lambda e: e[0])
        labels = tuple(sorted(meta))
        lab_ix = {lab: i for i, lab in enumerate(labels)}
        gammas = np.array([e[0] for e in entries], dtype=np.float64)
        comp = np.array([lab_ix[e[1]] for e in entries], dtype=np.int32)
        mult = np.array([e[2] for e in entries], dtype=np.int64)
        return ZeroSet(beta0, gammas, comp, mult, labels, dict(meta))

    def n_entries(self) -> int:
        return int(self.gammas.size)

    def big_m(self, gamma: float) -> complex:
        """M(gamma) = sum of weight * multiplicity at that ordinate (0 if absent)."""
        sel = self.gammas == gamma
        total = 0.0
        for cid, mult in zip(self.component_ids[sel], self.multiplicities[sel]):
            total += self.meta[self.labels[cid]].weight * mult
        return complex(total)

    def distinct(self, t_cap: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
        """(distinct ordinates <= t_cap, aggregated M values)."""
        sel = np.ones(self.gammas.shape, dtype=bool)
        if t_cap is not None:
            sel = self.gammas <= t_cap
        g = self.gammas[sel]
        w = np.array(
            [self.meta[self.labels[c]].weight for c in self.component_ids[sel]]
        ) * self.multiplicities[sel]
        uniq, inv = np.unique(g, return_inverse=True)
        m = np.zeros(uniq.shape)
        np.add.at(m, inv, w)
        return uniq, m.astype(np.complex128)

    def predicted_mean(self) -> float:
        """m_S = sum_f a_f (second-moment order * [beta0 = 1/2] - central order / beta0)."""
        rh = 1.0 if self.beta0 == 0.5 else 0.0
        return float(
            sum(
                c.weight * (c.second_moment_pole * rh - c.central_order / self.beta0)
                for c in self.meta.values()
            )
        )

    def variance(self, t_cap: float) -> float:
        """2 sum over distinct gamma <= t_cap of |M|^2 / (beta0^2 + gamma^2)."""
        if t_cap <= 0:
            return 0.0
        g, m = self.distinct(t_cap)
        if g.size == 0:
            return 0.0
        return float(np.sum(2.0 * np.abs(m) ** 2 / (self.beta0**2 + g**2)))

    def g_trig_y(self, mean: float, t_cap: float, y: np.ndarray) -> np.ndarray:
        """G(e^y) = mean - sum 2 Re(M e^(i gamma y) / (beta0 + i gamma))."""
        y = np.asarray(y, dtype=np.float64)
        g, m = self.distinct(t_cap)
        if g.size == 0:
            return np.full(y.shape, mean)
        coef = 2.0 * m / (self.beta0 + 1j * g)
        amp = np.abs(coef)
        phase = np.angle(coef)
        out = np.full(y.shape, float(mean))
        block = max(1, 8_000_000 // max(g.size, 1))
        for i in range(0, y.size, block):
            yb = y[i : i + block]
            out[i : i + block] -= np.cos(np.outer(yb, g) + phase) @ amp
        return out

    def g_trig(self, mean: float, t_cap: float, x: np.ndarray | float) -> np.ndarray | float:
        """The truncated trigonometric approximation, evaluated at x >= 2."""
        xs = np.asarray(x, dtype=np.float64)
        if np.any(xs < 2):
            raise ValueError("g_trig is defined for x >= 2")
        out = self.g_trig_y(mean, t_cap, np.log(xs))
        return float(out) if np.isscalar(x) else out

    def scaled(self, factor: float) -> "ZeroSet":
        """Same ordinates with every component weight multiplied by factor."""
        meta = {
            lab: ComponentMeta(c.weight * factor, c.central_order, c.second_moment_pole)
            for lab, c in self.meta.items()
        }
        return ZeroSet(
            self.beta0, self.gammas, self.component_ids, self.multiplicities, self.labels, meta
        )


def save_zero_file(zs: ZeroSet, path: str | Path) -> None:
    lines = [f"# beta0={zs.beta0!r}"]
    for lab in zs.labels:
        c = zs.meta[lab]
        lines.append(
            f"# component={lab} weight={c.weight!r} central_order={c.central_order} "
            f"second_moment_pole={c.second_moment_pole}"
        )
    for g, cid, mult in zip(zs.gammas, zs.component_ids, zs.multiplicities):
        lines.append(f"{float(g)!r},{zs.labels[cid]},{int(mult)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_zero_file(
    path: str | Path,
    plain_component: Optional[tuple[str, ComponentMeta]] = None,
    beta0_default: float = 0.5,
) -> ZeroSet:
    """Parse a zero file; with `plain_component`, bare-ordinate lists (one
    gamma per line, LMFDB exports) are accepted and assigned that component."""
    beta0 = beta0_default
    meta: dict[str, ComponentMeta] = {}
    entries: list[tuple[float, str, int]] = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("beta0="):
                beta0 = float(body[len("beta0=") :])
            elif body.startswith("component="):
                fields = dict(tok.split("=", 1) for tok in body.split())
                meta[fields["component"]] = ComponentMeta(
                    weight=float(fields["weight"]),
                    central_order=int(fields.get("central_order", 0)),
                    second_moment_pole=int(fields.get("second_moment_pole", -1)),
                )
            continue
        parts = line.split(",")
        try:
            if len(parts) == 1:
                if plain_component is None:
                    raise ValueError("bare ordinate without plain_component")
                gamma, label, mult = float(parts[0]), plain_component[0], 1
            elif len(parts) == 3:
                gamma, label, mult = float(parts[0]), parts[1], int(parts[2])
            else:
                raise ValueError(f"expected 'gamma,component,multiplicity', got {line!r}")
            if gamma <= 0:
                raise ValueError(f"ordinate must be positive, got {gamma}")
            if mult < 1:
                raise ValueError(f"multiplicity must be >= 1, got {mult}")
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: {exc}") from exc
        entries.append((gamma, label, mult))
    if plain_component is not None and plain_component[0] not in meta:
        meta[plain_component[0]] = plain_component[1]
    used = {e[1] for e in entries}
    missing = used - set(meta)
    if missing:
        raise ValueError(f"{path}: no metadata for components {sorted(missing)}")
    if not meta:
        raise ValueError(f"{path}: empty zero file without component metadata")
    return ZeroSet.from_entries(beta0, entries, meta)


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
