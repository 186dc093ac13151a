"""Analytic continuation of periodic Dirichlet series.

Everything reduces to weighted sums of Hurwitz zeta values,

    F_a(s) = q^(-s) * sum_j a_j zeta(s, j/q),

evaluated by Euler-Maclaurin summation with an explicit remainder bound.
The 1/(s-1) pole terms of the individual Hurwitz values are split into
``(sum w_j)/(s-1)`` plus an expm1 remainder, so sequences with zero mean
are evaluated without cancellation, including at s = 1 itself.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import bernoulli, factorial

from .characters import Character
from .errors import FactorSingular, PoleError, PrecisionError
from .primes import prime_factors, prime_power_tail, primes_in

POLE_RADIUS = 1e-14
MAX_TERMS = 1 << 20
_CHUNK = 1 << 21

_B = bernoulli(200)
# B_{2k} / (2k)!  for k = 0..100
_B2K = np.array([_B[2 * k] / factorial(2 * k, exact=False) for k in range(101)])


@dataclass(frozen=True)
class EvalOptions:
    target_abs_error: float = 1e-12
    max_imag: float = 1e4

    def __post_init__(self):
        if not 1e-15 <= self.target_abs_error <= 1e-3:
            raise ValueError(f"target_abs_error must lie in [1e-15, 1e-3], got {self.target_abs_error}")
        if self.max_imag <= 0:
            raise ValueError("max_imag must be positive")


DEFAULT_OPTS = EvalOptions()


class PeriodicSequence:
    """A q-periodic coefficient sequence a_1, ..., a_q (extended periodically)."""

    __slots__ = ("period", "values")

    def __init__(self, values, period: int | None = None):
        vals = np.asarray(values, dtype=complex).reshape(-1).copy()
        if period is not None and period != vals.size:
            raise ValueError(f"period {period} does not match {vals.size} values")
        if vals.size == 0:
            raise ValueError("a periodic sequence needs at least one value")
        vals.setflags(write=False)
        self.period = int(vals.size)
        self.values = vals

    def __call__(self, n):
        idx = (np.asarray(n, dtype=np.int64) - 1) % self.period
        out = self.values[idx]
        return complex(out) if np.ndim(out) == 0 else out

    def __eq__(self, other):
        if not isinstance(other, PeriodicSequence):
            return NotImplemented
        return self.period == other.period and bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.period, self.values.tobytes()))

    def __repr__(self):
        vals = ", ".join(_fmt(v) for v in self.values)
        return f"PeriodicSequence(q={self.period}, [{vals}])"

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def extended(self, period: int) -> "PeriodicSequence":
        if period % self.period:
            raise ValueError(f"{period} is not a multiple of {self.period}")
        return PeriodicSequence(np.tile(self.values, period // self.period))

    def conj(self) -> "PeriodicSequence":
        return PeriodicSequence(self.values.conj())

    def __mul__(self, c) -> "PeriodicSequence":
        return PeriodicSequence(self.values * complex(c))

    __rmul__ = __mul__

    def __add__(self, other: "PeriodicSequence") -> "PeriodicSequence":
        q = math.lcm(self.period, other.period)
        return PeriodicSequence(self.extended(q).values + other.extended(q).values)

    def to_json(self) -> dict:
        return {"q": self.period, "values": [[float(v.real), float(v.imag)] for v in self.values]}


def _fmt(v: complex) -> str:
    return f"{v.real:g}" if v.imag == 0 else f"{v:g}"


class DirichletPolynomial:
    """Finitely supported sum_k c_k k^(-s)."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Mapping[int, complex] | None = None):
        coeffs = {}
        for k, c in (coefficients or {}).items():
            k = int(k)
            if k < 1:
                raise ValueError(f"support must be positive integers, got {k}")
            c = complex(c)
            if c != 0:
                coeffs[k] = coeffs.get(k, 0) + c
        self.coefficients = dict(sorted(coeffs.items()))

    def __repr__(self):
        return f"DirichletPolynomial({self.coefficients})"

    def __eq__(self, other):
        if not isinstance(other, DirichletPolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    @property
    def support(self) -> list[int]:
        return list(self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, s):
        return dirichlet_poly_eval(self, s)

    def __add__(self, other: "DirichletPolynomial") -> "DirichletPolynomial":
        out = dict(self.coefficients)
        for k, c in other.coefficients.items():
            out[k] = out.get(k, 0) + c
        return DirichletPolynomial(out)

    def __mul__(self, other):
        if isinstance(other, DirichletPolynomial):
            out: dict[int, complex] = {}
            for k1, c1 in self.coefficients.items():
                for k2, c2 in other.coefficients.items():
                    out[k1 * k2] = out.get(k1 * k2, 0) + c1 * c2
            return DirichletPolynomial(out)
        return DirichletPolynomial({k: c * complex(other) for k, c in self.coefficients.items()})

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# Euler-Maclaurin kernel


def _cutoff(s: np.ndarray) -> int:
    t = float(np.max(np.abs(s.imag))) if s.size else 0.0
    return int(math.ceil(max(20.0, 1.3 * t) + 30))


def _direct_sums(s: np.ndarray, shifts: np.ndarray, weights: np.ndarray, N: int) -> np.ndarray:
    """sum_j w_j sum_{n<N} (n + r_j)^(-s), vectorised over s."""
    logs = np.log(np.arange(N)[None, :] + shifts[:, None]).reshape(-1)
    w = np.repeat(weights, N)
    out = np.empty(s.shape, dtype=complex)
    rows = max(1, _CHUNK // logs.size)
    for i in range(0, s.size, rows):
        blk = s[i : i + rows]
        out[i : i + rows] = np.exp(-np.multiply.outer(blk, logs)) @ w
    return out


def _tail_terms(s, x, order):
    """Euler-Maclaurin correction at x = N + r and the remainder bound."""
    logx = math.log(x)
    xs = np.exp(-s * logx)  # x^(-s)
    total = 0.5 * xs
    poch = s.copy()
    xpow = xs / x
    x2 = 1.0 / (x * x)
    for k in range(1, order + 1):
        total = total + _B2K[k] * poch * xpow
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
        xpow = xpow * x2
    # first omitted term, corrected by |s + 2M + 1| / (Re s + 2M + 1)
    a = s.real + 2 * order + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(a > 0, np.abs(s + 2 * order + 1) / np.where(a > 0, a, 1.0), np.inf)
    bound = np.abs(_B2K[order + 1] * poch * xpow * x) * fac
    return total, bound


def _pole_split(s, x, w):
    """sum_j w_j x_j^(1-s)/(s-1) minus its pole part (sum w)/(s-1)."""
    z = np.multiply.outer(1.0 - s, np.log(x))  # (S, J)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(z) > 0, np.expm1(z) / np.where(z == 0, 1, z), 1.0)
    # expm1(z)/(s-1) = -log(x) * expm1(z)/z
    return -(ratio * np.log(x)[None, :]) @ w


def weighted_hurwitz(s, shifts, weights, *, opts: EvalOptions = DEFAULT_OPTS,
                     n_terms: int | None = None, order: int = 12,
                     entire: bool | None = None) -> np.ndarray:
    """sum_j w_j zeta(s, r_j) for an array of s.

    ``entire`` declares sum_j w_j = 0 (pole cancelled).  When None it is
    decided from the weights with a relative tolerance of 1e-14.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    shifts = np.asarray(shifts, dtype=float).reshape(-1)
    weights = np.asarray(weights, dtype=complex).reshape(-1)
    if np.any(shifts <= 0) or np.any(shifts > 1):
        raise ValueError("Hurwitz shifts must lie in (0, 1]")
    if s.size and np.max(np.abs(s.imag)) > opts.max_imag:
        raise PrecisionError(f"|Im s| exceeds max_imag={opts.max_imag}")
    if order < 1 or 2 * order + 2 > 200:
        raise ValueError("Bernoulli order out of range")
    wsum = complex(np.sum(weights))
    wabs = float(np.sum(np.abs(weights)))
    if entire is None:
        entire = abs(wsum) <= 1e-14 * max(wabs, 1e-300)
    if not entire:
        near = np.abs(s - 1) < POLE_RADIUS
        if np.any(near):
            raise PoleError(f"s = {complex(s[near][0])} is at the pole s = 1")

    if n_terms is None and s.size > 1:
        # points far below the vertical range of the batch would lose digits
        # to cancellation in an over-long direct sum; group by cutoff
        buckets = np.ceil((np.maximum(20.0, 1.3 * np.abs(s.imag)) + 30) / 32).astype(int)
        if buckets.min() != buckets.max():
            out = np.empty(s.shape, dtype=complex)
            for b in np.unique(buckets):
                m = buckets == b
                out[m] = weighted_hurwitz(s[m], shifts, weights, opts=opts, order=order, entire=entire)
            return out

    N = n_terms if n_terms is not None else _cutoff(s)
    while True:
        x = N + shifts
        tails = np.zeros(s.shape, dtype=complex)
        bound = np.zeros(s.shape)
        for xj, wj in zip(x, weights):
            tj, bj = _tail_terms(s, xj, order)
            tails += wj * tj
            bound += abs(wj) * bj
        if n_terms is not None or np.all(bound <= opts.target_abs_error * max(wabs, 1.0)):
            break
        if 2 * N > MAX_TERMS:
            raise PrecisionError(
                f"Euler-Maclaurin remainder {float(np.max(bound)):.3g} above target with {N} terms"
            )
        N *= 2

    out = _direct_sums(s, shifts, weights, N) + tails + _pole_split(s, x, weights)
    if not entire:
        out = out + wsum / (s - 1)
    return out


def _scalar(fn, s, *args, **kw) -> complex:
    return complex(fn(np.array([s], dtype=complex), *args, **kw)[0])


def hurwitz_zeta(s: complex, r: float, opts: EvalOptions = DEFAULT_OPTS, **kw) -> complex:
    """zeta(s, r) = sum_{n>=0} (n + r)^(-s), analytically continued."""
    if not 0 < r <= 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    return _scalar(weighted_hurwitz, s, [r], [1.0], opts=opts, entire=False, **kw)


def residue_at_one(a: PeriodicSequence) -> complex:
    return complex(np.sum(a.values)) / a.period


def _has_pole(a: PeriodicSequence) -> bool:
    total = np.sum(a.values)
    return abs(total) > 1e-14 * max(float(np.sum(np.abs(a.values))), 1e-300)


def f_eval_array(a: PeriodicSequence, s, opts: EvalOptions = DEFAULT_OPTS, **kw) -> np.ndarray:
    """F_a on an array of points."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    q = a.period
    nz = np.nonzero(a.values)[0]
    if nz.size == 0:
        return np.zeros(s.shape, dtype=complex)
    shifts = (nz + 1) / q
    vals = weighted_hurwitz(s, shifts, a.values[nz], opts=opts, entire=not _has_pole(a), **kw)
    return vals * np.exp(-s * math.log(q)) if q > 1 else vals


def f_eval(a: PeriodicSequence, s: complex, opts: EvalOptions = DEFAULT_OPTS, **kw) -> complex:
    """F_a(s), the continuation of sum a_n n^(-s)."""
    return complex(f_eval_array(a, np.array([s]), opts, **kw)[0])


def character_sequence(chi: Character) -> PeriodicSequence:
    return PeriodicSequence(chi.values)


def l_function(chi: Character, s: complex, opts: EvalOptions = DEFAULT_OPTS, **kw) -> complex:
    return f_eval(character_sequence(chi), s, opts, **kw)


def l_function_array(chi: Character, s, opts: EvalOptions = DEFAULT_OPTS, **kw) -> np.ndarray:
    return f_eval_array(character_sequence(chi), s, opts, **kw)


# ---------------------------------------------------------------------------
# Dirichlet polynomials and Euler products


def dirichlet_poly_eval(P: DirichletPolynomial, s):
    s_arr = np.asarray(s, dtype=complex)
    out = np.zeros(s_arr.shape, dtype=complex)
    for k, c in P.coefficients.items():
        out = out + c * (1.0 if k == 1 else np.exp(-s_arr * math.log(k)))
    return complex(out) if out.ndim == 0 else out


def _twist(t, p: int) -> float:
    if t is None:
        return 0.0
    if isinstance(t, Mapping):
        return float(t.get(p, 0.0))
    return float(t)


def twisted_poly_eval(P: DirichletPolynomial, s, t=None):
    """sum_k c_k prod_{p^e || k} p^(-(s + i t_p) e).

    ``t`` is a mapping prime -> shift (missing primes get 0) or one real
    shift applied to every prime.
    """
    s_arr = np.asarray(s, dtype=complex)
    out = np.zeros(s_arr.shape, dtype=complex)
    for k, c in P.coefficients.items():
        if k == 1:
            out = out + c
            continue
        phase = sum(e * _twist(t, p) * math.log(p) for p, e in prime_factors(k).items())
        out = out + c * np.exp(-s_arr * math.log(k) - 1j * phase)
    return complex(out) if out.ndim == 0 else out


class EulerProduct(NamedTuple):
    value: complex
    log_tail_bound: float


def euler_tail_eval(chi: Character, s: complex, t, p_from: float, p_to: float) -> EulerProduct:
    """prod over primes p_from < p <= p_to of (1 - chi(p) p^(-s - i t_p))^(-1).

    ``log_tail_bound`` bounds |log| of the omitted product over p > p_to
    (infinite when Re s <= 1).
    """
    if p_from > p_to:
        raise ValueError("p_from must not exceed p_to")
    s = complex(s)
    ps = primes_in(p_from, p_to)
    sigma = s.real
    tail = math.inf
    if sigma > 1:
        pt = max(p_to, 2.0)
        tail = prime_power_tail(pt, sigma) / (1.0 - pt**-sigma)
    if ps.size == 0:
        return EulerProduct(1.0 + 0j, tail)
    chi_p = chi(ps)
    lp = np.log(ps.astype(float))
    if isinstance(t, Mapping):
        tp = np.array([float(t.get(int(p), 0.0)) for p in ps])
    else:
        tp = np.full(ps.size, _twist(t, 0))
    x = chi_p * np.exp(-(s + 1j * tp) * lp)
    fac = 1.0 - x
    if np.any(np.abs(fac) < 1e-14):
        raise FactorSingular(f"Euler factor vanishes at s={s}")
    return EulerProduct(complex(np.exp(-np.sum(np.log(fac)))), tail)
