"""Deterministic coefficient maps p -> lambda(p) for every race family.

All maps are pure functions of (family parameters, p): repeated evaluation
returns identical values, and everything is safe to call from any number of
workers. Ramified/bad primes contribute 0 by convention (finitely many, so
they cannot move a logarithmic density).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

__all__ = [
    "cornacchia",
    "sqrt_mod",
    "kronecker",
    "lambda_sum2sq",
    "lambda_gauss",
    "dirichlet_pair_coeff",
    "qr_race_coeff",
    "EllipticCurve",
    "BadReductionError",
    "ec_ap",
    "lambda_ec_pair",
    "CoefficientSource",
    "PRESET_CURVES",
    "parse_curve",
]

# Legendre sums cost O(p) per prime, baby-step/giant-step O(p^(1/4+eps));
# this crossover keeps multi-million-prime runs in the minutes range.
EC_BSGS_CUTOFF = 1 << 16


# ---------------------------------------------------------------------------
# modular arithmetic helpers
# ---------------------------------------------------------------------------

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    if t and a % 2 == 0:
        return 0
    if t % 2 == 1 and a % 8 in (3, 5):
        sign = -sign
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def sqrt_mod(n: int, p: int) -> Optional[int]:
    """A square root of n modulo prime p, or None if n is a non-residue.

    Tonelli-Shanks, with the exponentiation shortcut for p = 3 mod 4.
    """
    n %= p
    if p == 2:
        return n
    if n == 0:
        return 0
    if pow(n, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return r


# ---------------------------------------------------------------------------
# Cornacchia decompositions and the derived coefficients
# ---------------------------------------------------------------------------

def cornacchia(p: int, D: int) -> Optional[tuple[int, int]]:
    """Solve a^2 + D*b^2 = p with a >= 0, b > 0, or None if not representable.

    Canonical choice: the Euclidean descent result; for D=1, where both
    orderings solve the equation, the pair is returned with a < b.
    """
    if D not in (1, 2, 3, 4):
        raise ValueError(f"unsupported form parameter D={D}")
    if (2 * D) % p == 0:
        raise ValueError(f"p={p} divides 2D; caller must skip this prime")
    r = sqrt_mod(-D, p)
    if r is None:
        return None
    if 2 * r < p:
        r = p - r
    a, b = p, r
    lim = math.isqrt(p)
    while b > lim:
        a, b = b, a % b
    c = p - b * b
    if c % D:
        return None
    t = c // D
    s = math.isqrt(t)
    if s * s != t or s == 0:
        return None
    a_out, b_out = b, s
    if D == 1 and a_out > b_out:
        a_out, b_out = b_out, a_out
    return a_out, b_out


def lambda_sum2sq(p: int, D: int, with_factor2: bool = False) -> float:
    """(a^2 - D b^2)/p when p = a^2 + D b^2, else 0; doubled on request.

    The undoubled value is the one plotted in the race figures; the doubled
    one matches the average formula for the race mean.
    """
    ab = cornacchia(p, D)
    if ab is None:
        return 0.0
    a, b = ab
    val = (a * a - D * b * b) / p
    return 2.0 * val if with_factor2 else val


def lambda_gauss(p: int) -> float:
    """cos(4*theta_p) for the Gaussian prime angles when p = a^2 + b^2.

    Equals (a^4 + b^4 - 6 a^2 b^2)/p^2, symmetric in a and b. Returns 0 for
    p = 2 (ramified, by convention) and for p = 3 mod 4.
    """
    if p == 2 or p % 4 == 3:
        return 0.0
    a, b = cornacchia(p, 1)  # type: ignore[misc]  # p = 1 mod 4 is always a^2+b^2
    a2, b2 = a * a, b * b
    return (a2 * a2 + b2 * b2 - 6 * a2 * b2) / (p * p)


def dirichlet_pair_coeff(q: int, a: int, b: int, p: int) -> float:
    """+1 if p = a, -1 if p = b (mod q), else 0."""
    if math.gcd(a, q) != 1 or math.gcd(b, q) != 1:
        raise ValueError("residues must be invertible mod q")
    if (a - b) % q == 0:
        raise ValueError("residues must be distinct mod q")
    r = p % q
    if r == a % q:
        return 1.0
    if r == b % q:
        return -1.0
    return 0.0


@lru_cache(maxsize=None)
def _squares_mod(q: int) -> tuple[frozenset[int], int]:
    """(invertible squares mod q, index rho(q) of the squares in (Z/q)*)."""
    units = [x for x in range(1, q) if math.gcd(x, q) == 1]
    squares = frozenset(x * x % q for x in units)
    return squares, len(units) // len(squares)


def qr_race_coeff(q: int, p: int) -> float:
    """(rho-1)/rho on quadratic residues mod q, -1/rho on non-residues, 0 if p | q."""
    if q < 3:
        raise ValueError("q must be >= 3")
    if math.gcd(p, q) != 1:
        return 0.0
    squares, rho = _squares_mod(q)
    return (rho - 1) / rho if p % q in squares else -1.0 / rho


# ---------------------------------------------------------------------------
# elliptic curves
# ---------------------------------------------------------------------------

class BadReductionError(ValueError):
    """Raised when a Frobenius trace is requested at a bad-reduction prime."""


def _prime_factors(n: int) -> tuple[int, ...]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


@dataclass(frozen=True)
class EllipticCurve:
    """Integral Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.

    conductor_primes holds the primes dividing this model's discriminant: the
    bad-reduction primes, plus possibly extra ones when the model is not
    minimal (those few primes then contribute 0 to races, per the convention).
    """

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    analytic_rank_hint: Optional[int] = None
    conductor_primes: frozenset[int] = field(init=False, compare=False)
    discriminant: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        b2 = self.a1 * self.a1 + 4 * self.a2
        b4 = 2 * self.a4 + self.a1 * self.a3
        b6 = self.a3 * self.a3 + 4 * self.a6
        b8 = (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise ValueError("singular curve (discriminant 0)")
        object.__setattr__(self, "discriminant", disc)
        object.__setattr__(self, "conductor_primes", frozenset(_prime_factors(abs(disc))))

    def short_weierstrass(self, p: int) -> tuple[int, int]:
        """(A, B) with the curve isomorphic to y^2 = x^3 + Ax + B over F_p, p > 3."""
        b2 = self.a1 * self.a1 + 4 * self.a2
        b4 = 2 * self.a4 + self.a1 * self.a3
        b6 = self.a3 * self.a3 + 4 * self.a6
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        return (-27 * c4) % p, (-54 * c6) % p

    def label(self) -> str:
        return f"[{self.a1},{self.a2},{self.a3},{self.a4},{self.a6}]"


PRESET_CURVES = {
    "E1": EllipticCurve(0, 0, 1, -1, 0, analytic_rank_hint=1),
    "E2": EllipticCurve(0, 1, 1, -2, 0, analytic_rank_hint=2),
    "E0": EllipticCurve(0, -1, 1, 0, 0, analytic_rank_hint=0),
    "E0prime": EllipticCurve(0, 1, 1, 1, 0, analytic_rank_hint=0),
}


def parse_curve(text: str) -> EllipticCurve:
    """A preset name (E1, E2, E0, E0prime) or 'a1,a2,a3,a4,a6'."""
    if text in PRESET_CURVES:
        return PRESET_CURVES[text]
    parts = text.split(",")
    if len(parts) != 5:
        raise ValueError(f"curve must be a preset name or 5 comma-separated integers, got {text!r}")
    return EllipticCurve(*(int(v) for v in parts))


def _ap_exhaustive(curve: EllipticCurve, p: int) -> int:
    # counts all points of the general Weierstrass model; fine for tiny p
    count = 1  # point at infinity
    for x in range(p):
        rhs = (x * x * x + curve.a2 * x * x + curve.a4 * x + curve.a6) % p
        for y in range(p):
            if (y * y + curve.a1 * x * y + curve.a3 * y - rhs) % p == 0:
                count += 1
    return p + 1 - count


def _ap_legendre(curve: EllipticCurve, p: int) -> int:
    # a_p = -sum_x chi(x^3 + Ax + B) via a quadratic-residue table
    A, B = curve.short_weierstrass(p)
    x = np.arange(p, dtype=np.int64)
    sq = np.zeros(p, dtype=bool)
    sq[(x * x) % p] = True
    vals = (((x * x) % p) * x + A * x + B) % p
    chi = np.where(vals == 0, 0, np.where(sq[vals], 1, -1))
    return -int(chi.sum())


# --- affine point arithmetic on y^2 = x^3 + Ax + B (None is the identity) ---

def _ec_add(P, Q, A: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, p - 2, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _ec_neg(P, p: int):
    return None if P is None else (P[0], (-P[1]) % p)


def _ec_mul(k: int, P, A: int, p: int):
    if k < 0:
        return _ec_mul(-k, _ec_neg(P, p), A, p)
    R = None
    while k:
        if k & 1:
            R = _ec_add(R, P, A, p)
        P = _ec_add(P, P, A, p)
        k >>= 1
    return R


def _next_point(A: int, B: int, p: int, start: int):
    """First non-2-torsion curve point with x >= start (deterministic)."""
    x = start
    while True:
        rhs = (x * x % p * x + A * x + B) % p
        y = sqrt_mod(rhs, p)
        if y is not None and y != 0:
            return (x % p, y), x + 1
        x += 1


def _annihilator_in_interval(P, A: int, p: int, lo: int, hi: int) -> int:
    """Some m in [lo, hi] with m*P = identity, by BSGS over the interval."""
    m = math.isqrt(hi - lo) + 1
    # baby steps: j*P for j in [1, m)
    table: dict[int, list[tuple[int, int]]] = {}
    R = P
    for j in range(1, m):
        if R is None:  # ord(P) = j, small; lift to the interval
            return ((lo + j - 1) // j) * j
        table.setdefault(R[0], []).append((j, R[1]))
        R = _ec_add(R, P, A, p)
    step = R  # = m*P
    if step is None:
        d = _exact_order(P, A, p, m)
        return ((lo + d - 1) // d) * d
    Q = _ec_mul(lo, P, A, p)
    # giant steps: Q_i = (lo + i*m)*P; annihilator when Q_i = -+ j*P
    for i in range(m + 1):
        n0 = lo + i * m
        if Q is None:
            if lo <= n0 <= hi:
                return n0
        else:
            for j, yj in table.get(Q[0], ()):
                if Q[1] == (p - yj) % p and lo <= n0 + j <= hi:
                    return n0 + j
                if Q[1] == yj and lo <= n0 - j <= hi:
                    return n0 - j
        Q = _ec_add(Q, step, A, p)
    raise ArithmeticError(f"BSGS found no annihilator at p={p}")


def _exact_order(P, A: int, p: int, m: int) -> int:
    """Reduce an annihilator m of P to the exact order of P."""
    order = m
    for ell in _prime_factors(m):
        while order % ell == 0 and _ec_mul(order // ell, P, A, p) is None:
            order //= ell
    return order


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def _group_order(curve: EllipticCurve, p: int) -> int:
    """|E(F_p)| by Shanks-Mestre: point orders on the curve and its quadratic
    twist constrain the Hasse interval until one candidate survives."""
    A, B = curve.short_weierstrass(p)
    w = math.isqrt(4 * p)
    lo, hi = p + 1 - w, p + 1 + w

    d = 2
    while kronecker(d, p) != -1:
        d += 1
    At, Bt = A * d * d % p, B * d % p * d % p * d % p

    n_e, n_t = 1, 1  # known divisors of |E| and of |E_twist|
    cur_e, cur_t = 1, 1
    for _ in range(60):
        first = lo + (-lo) % n_e
        cands = [n for n in range(first, hi + 1, n_e) if (2 * p + 2 - n) % n_t == 0]
        if len(cands) == 1:
            return cands[0]
        if not cands:
            raise ArithmeticError(f"order search emptied the Hasse interval at p={p}")
        if n_e <= n_t:
            P, cur_e = _next_point(A, B, p, cur_e)
            ann = _annihilator_in_interval(P, A, p, lo, hi)
            n_e = _lcm(n_e, _exact_order(P, A, p, ann))
        else:
            P, cur_t = _next_point(At, Bt, p, cur_t)
            ann = _annihilator_in_interval(P, At, p, lo, hi)
            n_t = _lcm(n_t, _exact_order(P, At, p, ann))
    raise ArithmeticError(f"group order not pinned down at p={p}")


def ec_ap(curve: EllipticCurve, p: int) -> int:
    """Frobenius trace a_p = p + 1 - |E(F_p)| at a good prime.

    Exhaustive count for p <= 3, a Legendre-symbol sum below the
    baby-step/giant-step cutoff, Shanks-Mestre above it.
    """
    if p in curve.conductor_primes:
        raise BadReductionError(f"p={p} divides the discriminant of {curve.label()}")
    if p <= 3:
        return _ap_exhaustive(curve, p)
    if p < EC_BSGS_CUTOFF:
        return _ap_legendre(curve, p)
    ap = p + 1 - _group_order(curve, p)
    if ap * ap > 4 * p:
        raise ArithmeticError(f"Hasse bound violated at p={p}: a_p={ap}")
    return ap


def lambda_ec_pair(c1: EllipticCurve, c2: EllipticCurve, p: int) -> float:
    """a_p(c1) * a_p(c2) / p; primes of bad reduction for either curve give 0."""
    try:
        return ec_ap(c1, p) * ec_ap(c2, p) / p
    except BadReductionError:
        return 0.0


_AP_CACHE: dict[tuple[EllipticCurve, int], int] = {}


def _ap_cached(curve: EllipticCurve, p: int) -> int:
    key = (curve, p)
    v = _AP_CACHE.get(key)
    if v is None:
        v = ec_ap(curve, p)
        _AP_CACHE[key] = v
    return v


# ---------------------------------------------------------------------------
# coefficient sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSource:
    """A race family plus the metadata used for normalization and reporting.

    `pole_order_s1` is the order at s=1 of the attached Dirichlet series
    (negative for a pole: -1 for zeta) and feeds the Li correction;
    `second_moment_pole` is the order at s=1 of the squared-local-roots
    series, which shifts the race mean. Both are 0 for the aggregated
    congruence families, which are indicator combinations rather than single
    L-functions; their predicted means live in `predicted_mean_rh`.
    Coefficients satisfy |lambda(p)| <= degree away from ramified primes.
    """

    family: str
    degree: int
    pole_order_s1: int
    second_moment_pole: int
    label: str
    params: tuple = ()

    def values(self, primes: np.ndarray) -> np.ndarray:
        """lambda(p) for a segment of primes, as float64."""
        p = np.asarray(primes, dtype=np.int64)
        if self.family == "zeta":
            return np.ones(p.shape)
        if self.family == "dirichlet_pair":
            q, a, b = self.params
            r = p % q
            return np.where(r == a % q, 1.0, np.where(r == b % q, -1.0, 0.0))
        if self.family == "qr_race":
            (q,) = self.params
            squares, rho = _squares_mod(q)
            in_sq = np.isin(p % q, np.array(sorted(squares), dtype=np.int64))
            out = np.where(in_sq, (rho - 1) / rho, -1.0 / rho)
            out[np.gcd(p, q) != 1] = 0.0
            return out
        if self.family == "sum_two_squares":
            D, factor2 = self.params
            return np.array(
                [0.0 if (2 * D) % v == 0 else lambda_sum2sq(v, D, factor2) for v in p.tolist()]
            )
        if self.family == "gauss_angle":
            return np.array([lambda_gauss(v) for v in p.tolist()])
        if self.family == "ec_trace":
            (curve,) = self.params
            out = np.zeros(p.shape)
            for i, v in enumerate(p.tolist()):
                if v not in curve.conductor_primes:
                    out[i] = _ap_cached(curve, v) / math.sqrt(v)
            return out
        if self.family == "ec_pair":
            c1, c2 = self.params
            bad = c1.conductor_primes | c2.conductor_primes
            out = np.zeros(p.shape)
            for i, v in enumerate(p.tolist()):
                if v not in bad:
                    out[i] = _ap_cached(c1, v) * _ap_cached(c2, v) / v
            return out
        raise ValueError(f"unknown family {self.family!r}")

    def predicted_mean_rh(self) -> Optional[float]:
        """Mean of the limiting distribution under RH with no central zeros,
        where the family pins it down; None when it needs extra input.

        For the congruence families this is the character-sum-side value; the
        indicator trajectory it normalizes differs by the phi(q) factor.
        """
        if self.family in ("zeta", "sum_two_squares", "gauss_angle", "ec_pair"):
            return float(self.second_moment_pole)
        if self.family == "ec_trace":
            (curve,) = self.params
            if curve.analytic_rank_hint is None:
                return None
            return 1.0 - 2.0 * curve.analytic_rank_hint
        if self.family == "dirichlet_pair":
            q, a, b = self.params
            return float(sum(kronecker(d, b) - kronecker(d, a) for d in real_characters(q)))
        if self.family == "qr_race":
            (q,) = self.params
            _, rho = _squares_mod(q)
            return (1 - rho) / rho
        return None


def zeta_source() -> CoefficientSource:
    return CoefficientSource("zeta", 1, -1, -1, "zeta")


def dirichlet_pair_source(q: int, a: int, b: int) -> CoefficientSource:
    if math.gcd(a, q) != 1 or math.gcd(b, q) != 1 or (a - b) % q == 0:
        raise ValueError("need invertible residues a != b mod q")
    return CoefficientSource("dirichlet_pair", 1, 0, 0, f"dirichlet({q};{a},{b})", (q, a, b))


def qr_race_source(q: int) -> CoefficientSource:
    if q < 3:
        raise ValueError("q must be >= 3")
    return CoefficientSource("qr_race", 1, 0, 0, f"qr({q})", (q,))


def sum2sq_source(D: int, with_factor2: bool = False) -> CoefficientSource:
    if D not in (2, 3, 4):
        raise ValueError("sum-of-two-squares races support D in {2, 3, 4}")
    tag = "2" if with_factor2 else "1"
    return CoefficientSource(
        "sum_two_squares", 2, 0, -1, f"sum2sq(D={D},factor={tag})", (D, bool(with_factor2))
    )


def gauss_angle_source() -> CoefficientSource:
    return CoefficientSource("gauss_angle", 2, 0, -1, "gauss_angle")


def ec_source(curve: EllipticCurve) -> CoefficientSource:
    return CoefficientSource("ec_trace", 2, 0, 1, f"ec{curve.label()}", (curve,))


def ec_pair_source(c1: EllipticCurve, c2: EllipticCurve) -> CoefficientSource:
    return CoefficientSource("ec_pair", 4, 0, -1, f"ecpair{c1.label()}x{c2.label()}", (c1, c2))


def real_characters(q: int) -> list[int]:
    """Fundamental discriminants d whose Kronecker character induces a real
    nontrivial character mod q (conductor |d| divides q)."""
    out = []
    for d in range(-q, q + 1):
        if d in (0, 1):
            continue
        if _is_fundamental(d) and q % abs(d) == 0:
            out.append(d)
    return out


def _is_fundamental(d: int) -> bool:
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True
