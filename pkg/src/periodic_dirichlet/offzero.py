"""Constructive search for zeros of sum_j P_j(s) L_{psi_j}(s) with Re s > 1.

The pipeline follows the phase-assignment argument: per residue class the
primes beyond y are cut into three blocks of weight ~1/3 whose phases
0, pi + u1, pi - u2 reproduce any small target; a fixed-point iteration
absorbs the higher-order terms of the logarithms of the Euler factors;
the resulting twisted products G_j take the values e^(2 pi i j / n),
which sum to zero.  A shift t aligning finitely many prime phases is then
searched for, and a zero of F(s + it) is certified by Rouche's theorem on
a circle around the centre of the strip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .characters import Character, character_matrix, enumerate_characters, induce, is_primitive
from .errors import (
    CertificationFailed,
    FactorSingular,
    InfeasibleRadius,
    NoPositiveGamma,
    NoSolution,
    NonConvergence,
    NotFound,
    PeriodicDirichletError,
    ResidualTooLarge,
    SplitUnattainable,
)
from .primes import prime_factors, prime_power_tail, primes_in, primes_up_to
from .special import (
    DirichletPolynomial,
    EvalOptions,
    PeriodicSequence,
    f_eval_array,
    twisted_poly_eval,
)
from .zerocount import circle_winding

TWO_PI = 2 * math.pi
LEMMA_DISK = 0.1


@dataclass(frozen=True)
class SolverConfig:
    q: int
    sigma: float
    y_prime: float = 2.0
    p_max: int = 10**7
    R: float = 0.1
    fix_tol: float = 1e-9
    max_iter: int = 200
    delta: float = 0.01

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if not 1 < self.sigma <= 2:
            raise ValueError(f"sigma must lie in (1, 2], got {self.sigma}")
        if not self.y_prime < self.p_max:
            raise ValueError("y_prime must be below p_max")
        if self.R < 0 or self.fix_tol <= 0 or self.max_iter < 1 or self.delta < 0:
            raise ValueError("invalid solver tolerances")


@dataclass(frozen=True)
class BlockSplit:
    p1a: int
    p2a: int
    lambda0: float
    lambda1: float
    lambda2: float
    delta: float
    i1: int  # last index of block 0
    i2: int  # last index of block 1


@dataclass
class ClassSums:
    config: SolverConfig
    residues: tuple[int, ...]
    sums: dict[int, float]
    primes: dict[int, np.ndarray]
    weights: dict[int, np.ndarray]
    tail: float
    inverse_inf_norm: float
    feasible: bool
    max_feasible_R: float


@dataclass
class ThetaAssignment:
    """Phases theta_p of p^(-sigma - i t_p) = p^(-sigma) e^(i theta_p)."""

    primes: np.ndarray
    theta: np.ndarray
    residual: float = 0.0
    tail_allowance: float = 0.0
    in_lemma_disk: bool = True

    def t_values(self) -> np.ndarray:
        return -self.theta / np.log(self.primes.astype(float))

    def as_mapping(self) -> dict[int, float]:
        return {int(p): float(t) for p, t in zip(self.primes, self.t_values())}

    def phase_of(self, p: int) -> float:
        i = np.searchsorted(self.primes, p)
        if i < self.primes.size and self.primes[i] == p:
            return float(self.theta[i])
        return 0.0


@dataclass
class FixedPointResult:
    theta: ThetaAssignment
    w: np.ndarray
    iterations: int
    residual: float
    max_E: float
    E_bound: float
    damping: float


@dataclass
class RoucheCertificate:
    sigma0: float
    r: float
    gamma: float
    max_diff: float
    t: float
    zeros_inside: int
    sample_count: int
    lipschitz_bound: float
    sampling_slack: float

    @property
    def valid(self) -> bool:
        return self.max_diff + self.sampling_slack < self.gamma and self.zeros_inside >= 1

    @property
    def center(self) -> complex:
        return complex(self.sigma0, self.t)

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "center": [self.sigma0, self.t],
            "radius": self.r,
            "gamma": self.gamma,
            "maxDiff": self.max_diff,
            "slack": self.sampling_slack,
            "zeros": self.zeros_inside,
            "samples": self.sample_count,
        }


# ---------------------------------------------------------------------------
# class sums and the three-block split


def class_sums(cfg: SolverConfig, strict: bool = False) -> ClassSums:
    """S_a = sum_{y < p <= p_max, p = a mod q} p^-sigma for every unit a mod q.

    ``feasible`` records S_a >= 10 ||C^-1|| R for all a.  With ``strict``
    an infeasible configuration raises InfeasibleRadius.
    """
    q = cfg.q
    C = character_matrix(q)
    ps = primes_in(cfg.y_prime, cfg.p_max)
    ps = ps[np.gcd(ps, q) == 1]
    w_all = ps.astype(float) ** -cfg.sigma
    cls = ps % q
    sums, primes, weights = {}, {}, {}
    for a in C.residues:
        m = cls == (a % q)
        primes[a] = ps[m]
        weights[a] = w_all[m]
        sums[a] = float(np.sum(weights[a]))
    smin = min(sums.values())
    max_R = smin / (10 * C.inverse_inf_norm)
    if smin <= 0:
        empty = [a for a, s in sums.items() if s <= 0]
        raise InfeasibleRadius(f"no primes in ({cfg.y_prime}, {cfg.p_max}] for classes {empty} mod {q}", 0.0)
    feasible = smin >= 10 * C.inverse_inf_norm * cfg.R
    if strict and not feasible:
        raise InfeasibleRadius(
            f"min S_a = {smin:.4g} < 10 ||C^-1|| R = {10 * C.inverse_inf_norm * cfg.R:.4g}", max_R
        )
    tail = prime_power_tail(cfg.p_max, cfg.sigma)
    return ClassSums(cfg, C.residues, sums, primes, weights, tail, C.inverse_inf_norm, feasible, max_R)


def split_weights(weights: Sequence[float], delta: float = 0.01) -> tuple[float, float, float, float, int, int]:
    """Cut a weight sequence into three consecutive blocks of relative weight ~1/3.

    Returns (lambda0, lambda1, lambda2, achieved delta, i1, i2) where block 0
    is weights[:i1+1] and block 1 is weights[i1+1:i2+1].
    """
    w = np.asarray(weights, dtype=float)
    if w.size < 3:
        raise SplitUnattainable("need at least three weights for three blocks", math.inf)
    c = np.cumsum(w) / np.sum(w)
    third = 1.0 / 3.0
    k = int(np.searchsorted(c, third))
    best = None
    for i1 in {max(0, min(w.size - 3, j)) for j in (k - 1, k, k + 1)}:
        lam0 = c[i1]
        cand = np.arange(i1 + 1, w.size - 1)
        i2 = int(cand[np.argmin(np.abs(c[cand] - lam0 - third))])
        lam1 = c[i2] - lam0
        d = max(abs(lam0 - third), abs(lam1 - third))
        if best is None or d < best[3]:
            best = (float(lam0), float(lam1), float(1.0 - c[i2]), float(d), i1, i2)
    if best[3] > delta + 1e-15:
        raise SplitUnattainable(f"best achievable delta {best[3]:.4g} exceeds {delta:.4g}", best[3])
    return best


def block_split(sums: ClassSums, a: int, delta: float | None = None) -> BlockSplit:
    delta = sums.config.delta if delta is None else delta
    if sums.sums.get(a, 0.0) <= 0:
        raise SplitUnattainable(f"class {a} is empty", math.inf)
    l0, l1, l2, d, i1, i2 = split_weights(sums.weights[a], delta)
    ps = sums.primes[a]
    return BlockSplit(int(ps[i1]), int(ps[i2]), l0, l1, l2, d, i1, i2)


# ---------------------------------------------------------------------------
# the two-angle equation


def _two_angle_residual(l1, l2, tau, u):
    return l1 * np.exp(1j * u[0]) + l2 * np.exp(-1j * u[1]) - tau


def _geometric_guess(l1, l2, tau):
    rho = abs(tau)
    if rho == 0:
        raise NoSolution("target at the origin")
    c = (rho * rho + l1 * l1 - l2 * l2) / (2 * rho * l1)
    if abs(c) > 1:
        raise NoSolution(f"|target| = {rho:.4g} outside [|l1 - l2|, l1 + l2]")
    u1 = math.atan2(tau.imag, tau.real) + math.acos(c)
    u2 = -np.angle((tau - l1 * np.exp(1j * u1)) / l2)
    return np.array([u1, float(u2)])


def _newton_two_angle(l1, l2, tau, u, max_iter=50):
    for _ in range(max_iter):
        r = _two_angle_residual(l1, l2, tau, u)
        if abs(r) < 1e-14:
            return u
        d1 = 1j * l1 * np.exp(1j * u[0])
        d2 = -1j * l2 * np.exp(-1j * u[1])
        J = np.array([[d1.real, d2.real], [d1.imag, d2.imag]])
        try:
            du = np.linalg.solve(J, [-r.real, -r.imag])
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-4 and abs(_two_angle_residual(l1, l2, tau, u + lam * du)) >= abs(r):
            lam *= 0.5
        u = u + lam * du
    return u if abs(_two_angle_residual(l1, l2, tau, u)) < 1e-13 else None


def solve_two_angle(lambda0: float, lambda1: float, lambda2: float, target: complex,
                    lemma_region: bool = True) -> tuple[float, float]:
    """Solve lambda1 e^(i u1) + lambda2 e^(-i u2) = target.

    With ``lemma_region`` the solution must have u1, u2 in (0, pi/2); without
    it any real solution is accepted (the target may then lie anywhere in
    the annulus |lambda1 - lambda2| <= |target| <= lambda1 + lambda2).
    """
    tau = complex(target)
    starts = [np.array([math.pi / 3, math.pi / 3])]
    try:
        starts.append(_geometric_guess(lambda1, lambda2, tau))
    except NoSolution:
        pass
    for u0 in starts:
        u = _newton_two_angle(lambda1, lambda2, tau, u0)
        if u is None:
            continue
        u = (u + math.pi) % TWO_PI - math.pi
        if lemma_region and not (0 < u[0] < math.pi / 2 and 0 < u[1] < math.pi / 2):
            continue
        if abs(_two_angle_residual(lambda1, lambda2, tau, u)) < 1e-12:
            return float(u[0]), float(u[1])
    raise NoSolution(f"no two-angle solution for target {tau} (lambda0={lambda0:.4g})")


# ---------------------------------------------------------------------------
# Lemma-1 system


def _full_targets(q: int, characters: Sequence[Character], z) -> np.ndarray:
    chars = enumerate_characters(q)
    z = np.asarray(z, dtype=complex).reshape(-1)
    if len(characters) != z.size:
        raise ValueError("one target per character required")
    if len(set(characters)) != len(characters):
        raise ValueError("characters must be pairwise distinct")
    full = np.zeros(len(chars), dtype=complex)
    index = {c: i for i, c in enumerate(chars)}
    for chi, v in zip(characters, z):
        if chi.modulus != q:
            raise ValueError(f"character {chi} is not modulo {q}")
        full[index[chi]] = v
    return full


@dataclass
class _Prepared:
    sums: ClassSums
    splits: dict[int, BlockSplit]
    primes: np.ndarray
    order: dict[int, np.ndarray]  # positions of each class in ``primes``


def prepare(cfg: SolverConfig, sums: ClassSums | None = None) -> _Prepared:
    sums = sums or class_sums(cfg)
    splits = {a: block_split(sums, a, cfg.delta) for a in sums.residues}
    ps = np.concatenate([sums.primes[a] for a in sums.residues])
    order_idx = np.argsort(ps)
    inv = np.empty_like(order_idx)
    inv[order_idx] = np.arange(order_idx.size)
    pos, start = {}, 0
    for a in sums.residues:
        n = sums.primes[a].size
        pos[a] = inv[start : start + n]
        start += n
    return _Prepared(sums, splits, ps[order_idx], pos)


def _assign(prep: _Prepared, w_full: np.ndarray):
    C = character_matrix(prep.sums.config.q)
    w_class = C.inverse @ w_full  # w_a, in residue order
    theta = np.zeros(prep.primes.size)
    in_disk = True
    for a, wa in zip(prep.sums.residues, w_class):
        sp = prep.splits[a]
        Sa = prep.sums.sums[a]
        tau = sp.lambda0 - wa / Sa
        in_disk &= abs(tau - sp.lambda0) <= LEMMA_DISK
        try:
            u1, u2 = solve_two_angle(sp.lambda0, sp.lambda1, sp.lambda2, tau, lemma_region=False)
        except NoSolution as exc:
            raise NoSolution(f"class {a}: |w_a|/S_a = {abs(wa) / Sa:.4g} too large; {exc}") from exc
        th = np.zeros(prep.sums.primes[a].size)
        th[sp.i1 + 1 : sp.i2 + 1] = math.pi + u1
        th[sp.i2 + 1 :] = math.pi - u2
        theta[prep.order[a]] = np.angle(np.exp(1j * th))
    # map (-pi, pi] exactly: np.angle returns [-pi, pi]
    theta[theta <= -math.pi] += TWO_PI
    return theta, in_disk


def character_sums(chars: Sequence[Character], primes: np.ndarray, theta: np.ndarray, sigma: float) -> np.ndarray:
    """sum_p chi_j(p) p^-sigma e^(i theta_p) for each character."""
    x = primes.astype(float) ** -sigma * np.exp(1j * theta)
    return np.array([np.sum(chi(primes) * x) for chi in chars])


def lemma1_solve(cfg: SolverConfig, characters: Sequence[Character], z, *, prepared: _Prepared | None = None,
                 tol: float = 1e-8) -> ThetaAssignment:
    """Phases theta_p (y < p <= p_max) with sum_p chi_j(p) p^-sigma e^(i theta_p) = z_j."""
    prep = prepared or prepare(cfg)
    z_full = _full_targets(cfg.q, characters, z)
    theta, in_disk = _assign(prep, z_full)
    got = character_sums(characters, prep.primes, theta, cfg.sigma)
    residual = float(np.max(np.abs(got - np.asarray(z, dtype=complex))))
    tail = prep.sums.tail
    if residual > tol + tail:
        raise ResidualTooLarge(f"Lemma-1 residual {residual:.3g} exceeds {tol:g} + tail {tail:.3g}", residual)
    return ThetaAssignment(prep.primes, theta, residual, tail, bool(in_disk))


# ---------------------------------------------------------------------------
# fixed-point correction


def _log_terms(chars, primes, theta, sigma):
    """(sum_p x_jp, sum_p [log(1 - x_jp) + x_jp]) with x_jp = chi_j(p) p^-sigma e^(i theta_p)."""
    base = primes.astype(float) ** -sigma * np.exp(1j * theta)
    lin, E = [], []
    for chi in chars:
        x = chi(primes) * base
        lin.append(np.sum(x))
        E.append(np.sum(np.log1p(-x) + x) if x.size else 0.0)
    return np.array(lin), np.array(E)


def log_product(chars, theta: ThetaAssignment, sigma: float) -> np.ndarray:
    """-sum_p log(1 - chi_j(p) p^(-sigma) e^(i theta_p)) over the assigned primes."""
    lin, E = _log_terms(chars, theta.primes, theta.theta, sigma)
    return lin - E


def lemma2_fixed_point(cfg: SolverConfig, characters: Sequence[Character], z, *,
                       prepared: _Prepared | None = None) -> FixedPointResult:
    """Phases with -sum_{p>y} log(1 - chi_j(p) p^(-sigma - i t_p)) = z_j.

    Iterates w <- z + E(t(w)), first undamped, then with damping 1/2.
    """
    prep = prepared or prepare(cfg)
    z = np.asarray(z, dtype=complex).reshape(-1)
    ps = prep.primes
    E_bound = float(np.sum(ps.astype(float) ** (-2 * cfg.sigma)))
    last_err = math.inf
    for damping in (1.0, 0.5):
        w = z.copy()
        max_E = 0.0
        for it in range(1, cfg.max_iter + 1):
            th = lemma1_solve(cfg, characters, w, prepared=prep)
            _, E = _log_terms(characters, ps, th.theta, cfg.sigma)
            max_E = max(max_E, float(np.max(np.abs(E))))
            if max_E >= E_bound:
                raise AssertionError(f"E-bound violated: {max_E} >= {E_bound}")
            w_new = z + E
            step = float(np.max(np.abs(w_new - w)))
            w = w + damping * (w_new - w)
            last_err = step
            if step < cfg.fix_tol:
                th = lemma1_solve(cfg, characters, w, prepared=prep)
                resid = float(np.max(np.abs(log_product(characters, th, cfg.sigma) - z)))
                if resid > 10 * cfg.fix_tol + prep.sums.tail:
                    raise ResidualTooLarge(f"fixed-point residual {resid:.3g}", resid)
                return FixedPointResult(th, w, it, resid, max_E, E_bound, damping)
    raise NonConvergence(f"fixed point not reached in {cfg.max_iter} iterations", last_err)


# ---------------------------------------------------------------------------
# targets and the comparison functions G_j


def build_targets(n: int) -> list[complex]:
    """e^(2 pi i j / n), j = 1..n."""
    if n < 2:
        raise ValueError("need at least two characters")
    exact = {0: 1 + 0j, 1: 1j, 2: -1 + 0j, 3: -1j}
    out = []
    for j in range(1, n + 1):
        if (4 * j) % n == 0:
            out.append(exact[(4 * j // n) % 4])
        else:
            out.append(complex(np.exp(2j * math.pi * j / n)))
    return out


@dataclass
class Problem:
    """F = sum_j P_j L_{psi_j} with the data needed for the G_j."""

    psis: list[Character]
    polys: list[DirichletPolynomial]
    q: int
    chis: list[Character]
    y: int
    sequence: PeriodicSequence

    @property
    def n(self) -> int:
        return len(self.psis)

    @property
    def small_primes(self) -> list[int]:
        return [int(p) for p in primes_up_to(self.y)]


def make_problem(components: Sequence[tuple[Character, DirichletPolynomial]], y: float = 2) -> Problem:
    if len(components) < 2:
        raise ValueError("at least two primitive characters are required")
    psis = [c for c, _ in components]
    polys = [P if isinstance(P, DirichletPolynomial) else DirichletPolynomial(P) for _, P in components]
    for psi, P in zip(psis, polys):
        if not is_primitive(psi):
            raise ValueError(f"{psi} is not primitive")
        if P.is_zero:
            raise ValueError("polynomials must be non-zero")
    if len(set(psis)) != len(psis):
        raise ValueError("characters must be distinct")
    q = math.lcm(*(p.modulus for p in psis))
    chis = [induce(p, q) for p in psis]
    ymax = max([float(y), 2.0] + [float(p) for p in prime_factors(q)]
               + [float(p) for P in polys for k in P.support for p in prime_factors(k)])
    y_int = int(primes_up_to(int(ymax))[-1])
    # periodic coefficients of sum_j P_j L_psi_j
    period = math.lcm(*[k * psi.modulus for psi, P in zip(psis, polys) for k in P.support])
    n = np.arange(1, period + 1)
    vals = np.zeros(period, dtype=complex)
    for psi, P in zip(psis, polys):
        for k, c in P.coefficients.items():
            m = n % k == 0
            vals[m] += c * psi(n[m] // k)
    return Problem(psis, polys, q, chis, y_int, PeriodicSequence(vals))


def h_values(prob: Problem, s, t_small: dict[int, float]) -> np.ndarray:
    """h_j at the twisted small primes: P_j twisted times prod_{p<=y} (1 - psi_j(p) p^(-s-it_p))^-1."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty((prob.n, s.size), dtype=complex)
    for j, (psi, P) in enumerate(zip(prob.psis, prob.polys)):
        v = np.asarray(twisted_poly_eval(P, s, t_small), dtype=complex) * np.ones(s.size)
        for p in prob.small_primes:
            x = psi(p) * np.exp(-(s + 1j * t_small.get(p, 0.0)) * math.log(p))
            v = v / (1 - x)
        out[j] = v
    return out


class TwistedLogSum:
    """-sum_p log(1 - c_p p^(-s)) for s near s0.

    Primes up to ``direct_cut`` are summed directly; the rest through a
    Taylor series in s - s0 built from logarithmic moments, valid for
    |s - s0| <= radius.
    """

    def __init__(self, primes: np.ndarray, coef: np.ndarray, s0: complex, radius: float,
                 direct_cut: int = 2000, tol: float = 1e-16):
        self.s0 = complex(s0)
        self.radius = float(radius)
        keep = coef != 0
        primes, coef = primes[keep], coef[keep]
        small = primes <= direct_cut
        self.sp = primes[small].astype(float)
        self.sc = coef[small]
        lp = np.log(primes[~small].astype(float))
        x0 = coef[~small] * np.exp(-self.s0 * lp)
        self.coeffs = np.zeros(1, dtype=complex)
        if x0.size:
            xmax = float(np.max(np.abs(x0)))
            mmax = max(1, int(math.ceil(math.log(tol) / math.log(xmax)))) if xmax > 0 else 1
            K = 8
            while (mmax * lp.max() * self.radius) ** K / math.factorial(K) > tol and K < 170:
                K += 4
            coeffs = np.zeros(K + 1, dtype=complex)
            xm = np.ones_like(x0)
            for m in range(1, mmax + 1):
                xm = xm * x0
                term = xm / m
                L = -m * lp
                for k in range(K + 1):
                    coeffs[k] += np.sum(term)
                    term = term * L / (k + 1)
            self.coeffs = coeffs

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        d = s - self.s0
        if np.any(np.abs(d) > self.radius * (1 + 1e-12)):
            raise ValueError("evaluation point outside the expansion disk")
        out = np.polynomial.polynomial.polyval(d, self.coeffs)
        if self.sp.size:
            x = self.sc[None, :] * np.exp(-np.multiply.outer(s, np.log(self.sp)))
            fac = 1 - x
            if np.any(np.abs(fac) < 1e-14):
                raise FactorSingular("Euler factor vanishes")
            out = out - np.sum(np.log(fac), axis=1)
        return out


@dataclass
class GFamily:
    """G_j(s) = h_j(s; t_small) * prod_{y < p <= p_max} (1 - chi_j(p) p^(-s - i t_p))^-1."""

    problem: Problem
    t_small: dict[int, float]
    theta: ThetaAssignment
    sigma0: float
    radius: float
    tail_bound: float
    _logs: list[TwistedLogSum] = field(default_factory=list, repr=False)

    def __post_init__(self):
        ps = self.theta.primes
        rot = np.exp(1j * self.theta.theta)
        self._logs = [TwistedLogSum(ps, chi(ps) * rot, self.sigma0, self.radius) for chi in self.problem.chis]

    def each(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        h = h_values(self.problem, s, self.t_small)
        return np.array([h[j] * np.exp(L(s)) for j, L in enumerate(self._logs)])

    def __call__(self, s) -> np.ndarray:
        return np.sum(self.each(s), axis=0)


def g_eval(j: int, s, family: GFamily):
    """G_j(s) (j counted from 1) with the truncation error bound of the product."""
    vals = family.each(s)[j - 1]
    return (complex(vals[0]) if np.ndim(s) == 0 else vals), family.tail_bound


# ---------------------------------------------------------------------------
# circle, shift search and certification


@dataclass
class Circle:
    sigma0: float
    r: float
    gamma: float
    gamma_raw: float
    slack: float
    lipschitz: float


def _circle_points(center: complex, r: float, n: int) -> np.ndarray:
    return center + r * np.exp(2j * math.pi * np.arange(n) / n)


def _sampled_min(g: Callable, center: complex, r: float, n: int):
    pts = _circle_points(center, r, n)
    vals = g(pts)
    arc = TWO_PI * r / n
    lip = float(np.max(np.abs(np.diff(np.append(vals, vals[0]))))) / arc
    slack = lip * arc / 2
    return float(np.min(np.abs(vals))), slack, lip


def choose_circle(G: Callable, sigma1: float, sigma2: float, samples: int = 512,
                  fractions=(0.8, 0.6, 0.4, 0.2)) -> Circle:
    sigma0 = 0.5 * (sigma1 + sigma2)
    half = 0.5 * (sigma2 - sigma1)
    for frac in fractions:
        r = frac * half
        m, slack, lip = _sampled_min(G, complex(sigma0), r, samples)
        if m - slack > 0:
            return Circle(sigma0, r, m - slack, m, slack, lip)
    raise NoPositiveGamma("sum of G_j has a (near) zero on every tried circle")


def _phase_mismatch(t: np.ndarray, logp: np.ndarray, target: np.ndarray) -> np.ndarray:
    d = np.multiply.outer(-t, logp) - target[None, :]
    d = np.abs((d + math.pi) % TWO_PI - math.pi)
    return d.max(axis=1)


def find_t(targets: dict[int, float], window: tuple[float, float], eps: float) -> float:
    """First t in the window with max_p dist(-t log p, theta_p) < eps on the circle."""
    if not targets:
        raise ValueError("no constrained primes")
    if len(targets) > 8:
        raise ValueError("at most 8 constrained primes are supported")
    lo, hi = map(float, window)
    ps = np.array(sorted(targets))
    logp = np.log(ps.astype(float))
    th = np.array([targets[int(p)] for p in ps])
    if ps.size == 1:
        per = TWO_PI / logp[0]
        t0 = -th[0] / logp[0]
        t = t0 + per * math.ceil((lo - t0) / per)
        if t <= hi:
            return float(t)
        raise NotFound("single-prime solution outside the window")
    step = eps / (2 * logp.max())
    chunk = 1 << 16
    start = lo
    while start <= hi:
        grid = start + step * np.arange(chunk)
        grid = grid[grid <= hi]
        obj = _phase_mismatch(grid, logp, th)
        good = np.nonzero(obj < eps)[0]
        if good.size:
            k = int(good[0])
            a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
            f = lambda x: float(_phase_mismatch(np.array([x]), logp, th)[0])
            g = (math.sqrt(5) - 1) / 2
            c, d = b - g * (b - a), a + g * (b - a)
            for _ in range(60):
                if f(c) < f(d):
                    b = d
                else:
                    a = c
                c, d = b - g * (b - a), a + g * (b - a)
            t = 0.5 * (a + b)
            return float(t if f(t) < obj[k] else grid[k])
        start = grid[-1] + step if grid.size else hi + 1
    raise NotFound(f"no aligned shift in [{lo}, {hi}] at eps={eps}")


def rouche_certify(F: Callable, G: Callable, center: complex, r: float, *, gamma: float | None = None,
                   t: float = 0.0, samples: int = 512) -> RoucheCertificate:
    """Certify that F has a zero in |s - center| < r by comparison with G.

    ``F`` is evaluated on the same points as ``G`` (already shifted).
    """
    n = max(512, int(samples))
    if center.real - r <= 1:
        raise ValueError("the circle must lie in Re s > 1")
    if gamma is None:
        m, sl, _ = _sampled_min(G, center, r, n)
        gamma = m - sl
    if gamma <= 0:
        raise CertificationFailed("gamma is not positive", {"stage": "rouche", "gamma": gamma})
    diff = lambda s: F(s) - G(s)
    md, slack, lip = _sampled_min(lambda s: np.abs(diff(s)) + 0j, center, r, n)
    pts = _circle_points(center, r, n)
    max_diff = float(np.max(np.abs(diff(pts))))
    report = {"stage": "rouche", "t": t, "center": [center.real, center.imag + t], "radius": r,
              "gamma": gamma, "maxDiff": max_diff, "slack": slack}
    if not max_diff + slack < gamma:
        raise CertificationFailed(f"max|F - G| + slack = {max_diff + slack:.4g} >= gamma = {gamma:.4g}", report)
    zeros = circle_winding(F, center, r, sides=n)
    cert = RoucheCertificate(center.real, r, gamma, max_diff, t, zeros, n, lip, slack)
    if zeros < 1:
        report["zeros"] = zeros
        raise CertificationFailed("winding of F around the circle is zero", report)
    return cert


# ---------------------------------------------------------------------------
# the whole pipeline


@dataclass
class Theorem2Report:
    certificates: list[RoucheCertificate]
    t_budget: float
    sigma1: float
    sigma2: float
    failure: dict | None = None
    attempts: list[dict] = field(default_factory=list)

    @property
    def density(self) -> float:
        return len(self.certificates) / self.t_budget

    def to_json(self) -> dict:
        return {
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "budget": self.t_budget,
            "certificates": [c.to_json() for c in self.certificates],
            "density": self.density,
            "failure": self.failure,
        }


def _small_prime_phases(prob: Problem, sigma0: float, targets, rng: np.random.Generator, trials: int = 256):
    """Shifts of the polynomial primes making log(target_j / h_j) small."""
    ps = prob.small_primes
    best, best_val = {p: 0.0 for p in ps}, math.inf
    for k in range(trials):
        cand = {p: 0.0 for p in ps} if k == 0 else {p: float(rng.uniform(0, TWO_PI / math.log(p))) for p in ps}
        h = h_values(prob, sigma0, cand)[:, 0]
        if np.any(h == 0) or not np.all(np.isfinite(h)):
            continue
        val = float(np.max(np.abs(np.log(np.asarray(targets) / h))))
        if val < best_val:
            best, best_val = cand, val
    return best


def theorem2_demo(components, sigma1: float, sigma2: float, t_budget: float = 1e4, *,
                  p_max: int = 10**7, y: float = 2, delta: float = 0.1, constrained: int = 4,
                  eps: float = 0.3, window: float = 1000.0, samples: int = 512, seed: int = 0,
                  max_certificates: int = 10, raise_on_empty: bool = False) -> Theorem2Report:
    """Search for certified zeros of sum_j P_j L_psi_j in sigma1 < Re s < sigma2, 0 < t <= budget."""
    if len(components) < 2:
        raise ValueError("at least two primitive Dirichlet characters are required")
    if not 1 < sigma1 < sigma2 <= 1.5:
        raise ValueError("need 1 < sigma1 < sigma2 <= 1.5")
    rng = np.random.default_rng(seed)
    prob = make_problem(components, y)
    sigma0 = 0.5 * (sigma1 + sigma2)
    report = Theorem2Report([], float(t_budget), sigma1, sigma2)

    def fail(stage: str, exc: Exception, **extra) -> Theorem2Report:
        report.failure = {"stage": stage, "error": type(exc).__name__, "message": str(exc), **extra}
        if raise_on_empty:
            raise CertificationFailed(f"{stage}: {exc}", report.failure) from exc
        return report

    targets = build_targets(prob.n)
    t_small = _small_prime_phases(prob, sigma0, targets, rng)
    h = h_values(prob, sigma0, t_small)[:, 0]
    z = np.log(np.asarray(targets) / h)
    cfg = SolverConfig(prob.q, sigma0, prob.y, p_max, float(np.max(np.abs(z))), delta=delta)
    try:
        sums = class_sums(cfg)
        prep = prepare(cfg, sums)
        fp = lemma2_fixed_point(cfg, prob.chis, z, prepared=prep)
    except (InfeasibleRadius, SplitUnattainable, NoSolution, NonConvergence, ResidualTooLarge) as exc:
        extra = {"targets_log_modulus": float(np.max(np.abs(z))), "q": prob.q, "y": prob.y}
        if isinstance(exc, InfeasibleRadius):
            extra["max_feasible_R"] = exc.max_feasible_R
        try:
            s = class_sums(cfg)
            extra["class_sums"] = {str(a): v for a, v in s.sums.items()}
            extra["required_R"] = cfg.R
            extra["max_feasible_R"] = s.max_feasible_R
        except PeriodicDirichletError:
            pass
        return fail("lemma2", exc, **extra)

    half = 0.5 * (sigma2 - sigma1)
    family = GFamily(prob, t_small, fp.theta, sigma0, half, prime_power_tail(p_max, sigma1))
    try:
        circle = choose_circle(family, sigma1, sigma2, samples)
    except NoPositiveGamma as exc:
        return fail("circle", exc)

    phases = {p: -t_small.get(p, 0.0) * math.log(p) for p in prob.small_primes}
    for p in fp.theta.primes[: max(0, constrained - len(phases))]:
        phases[int(p)] = fp.theta.phase_of(int(p))
    phases = dict(sorted(phases.items())[:constrained])
    seq = prob.sequence

    t0 = 0.0
    while t0 < t_budget and len(report.certificates) < max_certificates:
        hi = min(t0 + window, t_budget)
        try:
            t = find_t(phases, (t0 + 1.0, hi), eps)
        except NotFound as exc:
            report.attempts.append({"window": [t0, hi], "error": "NotFound"})
            t0 = hi
            continue
        F = lambda s, t=t: f_eval_array(seq, s + 1j * t, EvalOptions(1e-10, max(1e4, 2 * t_budget)))
        try:
            cert = rouche_certify(F, family, complex(circle.sigma0), circle.r, gamma=circle.gamma,
                                  t=t, samples=samples)
            report.certificates.append(cert)
        except CertificationFailed as exc:
            report.attempts.append(exc.report)
        t0 = t + 1.0
    if not report.certificates:
        last = report.attempts[-1] if report.attempts else {}
        return fail("rouche", CertificationFailed("no certificate within the t budget"),
                    attempts=len(report.attempts), last=last)
    return report
