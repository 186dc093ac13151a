"""Zero counting for F_a in rectangles by argument tracking.

The argument of F_a is followed along polygonal contours with adaptive
node insertion: an interval is accepted once |F(b) - F(a)| is smaller
than both |F(a)| and |F(b)|, which keeps each increment below pi/2.
Tall regions are cut into horizontal strips that share their dividing
lines, so the counts of adjacent strips add up exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import BoundaryZero, PoleError, PrecisionError, DegenerateInput
from .special import (
    DEFAULT_OPTS,
    EvalOptions,
    PeriodicSequence,
    _has_pole,
    f_eval_array,
    hurwitz_zeta,
)

ZERO_MODULUS = 1e-10
JITTER = 1e-4
MAX_JITTER = 5
DEFAULT_STEP = 0.1
STRIP_HEIGHT = 10.0
INTEGRALITY_TOL = 0.01

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Rectangle:
    sigma1: float
    sigma2: float
    t1: float
    t2: float

    def __post_init__(self):
        if not (self.sigma1 < self.sigma2 and self.t1 < self.t2):
            raise ValueError(f"degenerate rectangle {self}")

    @classmethod
    def parse(cls, text: str) -> "Rectangle":
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 4:
            raise ValueError("rectangle needs sigma1,sigma2,t1,t2")
        return cls(*parts)

    @property
    def diameter(self) -> float:
        return math.hypot(self.sigma2 - self.sigma1, self.t2 - self.t1)

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.sigma1 + margin < z.real < self.sigma2 - margin
                and self.t1 + margin < z.imag < self.t2 - margin)

    def distance_to_boundary(self, z: complex) -> float:
        dx = min(abs(z.real - self.sigma1), abs(z.real - self.sigma2))
        dy = min(abs(z.imag - self.t1), abs(z.imag - self.t2))
        inside_x = self.sigma1 <= z.real <= self.sigma2
        inside_y = self.t1 <= z.imag <= self.t2
        if inside_x and inside_y:
            return min(dx, dy)
        if inside_x:
            return dy
        if inside_y:
            return dx
        return math.hypot(dx, dy)


@dataclass
class ZeroReport:
    count_with_multiplicity: int
    distinct: list[tuple[complex, int]]
    boundary_min_modulus: float
    refinement_depth: int
    unresolved: list[tuple[complex, int]] = field(default_factory=list)

    @property
    def count_distinct(self) -> int:
        return len(self.distinct)


@dataclass
class MomentResult:
    sigma: float
    T: float
    integral_value: float
    main_term: float
    relative_gap: float


class DensityRow(NamedTuple):
    T: float
    N: int
    Nprime: int
    N_over_T: float


@dataclass
class Theorem3Result:
    u: float
    T: float
    sigma_cap: float
    count: int
    ratio: float


# ---------------------------------------------------------------------------
# argument tracking


@dataclass
class ArgTrack:
    delta: float
    min_modulus: float
    min_location: complex
    depth: int
    evaluations: int


def track_segment(f: Func, z0: complex, z1: complex, step: float = DEFAULT_STEP,
                  max_depth: int = 40) -> ArgTrack:
    """Continuous change of arg f along the straight segment z0 -> z1."""
    n = max(2, int(math.ceil(abs(z1 - z0) / step)))
    tau = np.linspace(0.0, 1.0, n + 1)
    F = f(z0 + (z1 - z0) * tau)
    evals = tau.size
    depth = 0
    while True:
        mod = np.abs(F)
        k = int(np.argmin(mod))
        if not mod[k] >= ZERO_MODULUS:  # also catches nan
            z = z0 + (z1 - z0) * tau[k]
            raise BoundaryZero(f"|F| = {mod[k]:.3g} on the contour at {z}", z, float(mod[k]))
        bad = np.abs(np.diff(F)) >= np.minimum(mod[:-1], mod[1:])
        if not bad.any():
            break
        depth += 1
        if depth > max_depth:
            raise PrecisionError(f"argument tracking did not settle on {z0} -> {z1}")
        idx = np.nonzero(bad)[0]
        mid = 0.5 * (tau[idx] + tau[idx + 1])
        Fm = f(z0 + (z1 - z0) * mid)
        evals += mid.size
        tau = np.insert(tau, idx + 1, mid)
        F = np.insert(F, idx + 1, Fm)
    delta = float(np.sum(np.angle(F[1:] / F[:-1])))
    return ArgTrack(delta, float(mod[k]), complex(z0 + (z1 - z0) * tau[k]), depth, evals)


def track_polyline(f: Func, vertices, step: float = DEFAULT_STEP) -> ArgTrack:
    parts = [track_segment(f, complex(a), complex(b), step) for a, b in zip(vertices[:-1], vertices[1:])]
    best = min(parts, key=lambda p: p.min_modulus)
    return ArgTrack(sum(p.delta for p in parts), best.min_modulus, best.min_location,
                    max(p.depth for p in parts), sum(p.evaluations for p in parts))


def circle_winding(f: Func, center: complex, radius: float, sides: int = 64,
                   step: float | None = None) -> int:
    ang = np.linspace(0.0, 2 * np.pi, sides + 1)
    verts = center + radius * np.exp(1j * ang)
    verts[-1] = verts[0]
    tr = track_polyline(f, verts, step or radius)
    return _to_integer(tr.delta)


def _to_integer(total_arg: float) -> int:
    w = total_arg / (2 * np.pi)
    k = round(w)
    if abs(w - k) > INTEGRALITY_TOL:
        raise PrecisionError(f"accumulated argument {w:.4f} turns is not near an integer")
    return int(k)


# ---------------------------------------------------------------------------
# strips sharing their horizontal lines


@dataclass
class StripScan:
    sigma1: float
    sigma2: float
    breaks: list[float]
    windings: list[int]
    min_modulus: float
    depth: int


def _check_pole_clear(has_pole: bool, pts) -> None:
    if not has_pole:
        return
    for a, b in zip(pts[:-1], pts[1:]):
        a, b = complex(a), complex(b)
        d = b - a
        tt = 0.0 if d == 0 else min(1.0, max(0.0, ((1 - a) * d.conjugate()).real / abs(d) ** 2))
        if abs(a + tt * d - 1) < 1e-6:
            raise PoleError("contour passes through the pole s = 1")


def scan_strips(f: Func, sigma1: float, sigma2: float, breaks, *, step: float = DEFAULT_STEP,
                has_pole: bool = False, lo_external: bool = True, hi_external: bool = True) -> StripScan:
    """Windings of f around every rectangle [sigma1, sigma2] x [b_k, b_{k+1}].

    A line carrying a (near) zero of f is moved by multiples of 1e-4:
    outward for the outer lines, upward for shared ones.  A vertical side
    with a zero gets an outward detour of the same size.
    """
    breaks = [float(b) for b in breaks]
    if any(b2 <= b1 for b1, b2 in zip(breaks[:-1], breaks[1:])):
        raise ValueError("breaks must be increasing")
    H: list[ArgTrack] = []
    for i, t in enumerate(breaks):
        direction = -1.0 if (i == 0 and lo_external) else 1.0
        for k in range(MAX_JITTER + 1):
            tt = t + direction * JITTER * k
            pts = [complex(sigma1, tt), complex(sigma2, tt)]
            try:
                _check_pole_clear(has_pole, pts)
                H.append(track_segment(f, pts[0], pts[1], step))
                breaks[i] = tt
                break
            except (BoundaryZero, PoleError):
                if k == MAX_JITTER:
                    raise
    if any(b2 <= b1 for b1, b2 in zip(breaks[:-1], breaks[1:])):
        raise PrecisionError("jittered breaks crossed; use taller strips")

    def vertical(sigma: float, ta: float, tb: float, outward: float) -> ArgTrack:
        for k in range(MAX_JITTER + 1):
            if k == 0:
                pts = [complex(sigma, ta), complex(sigma, tb)]
            else:
                s2 = sigma + outward * JITTER * k
                pts = [complex(sigma, ta), complex(s2, ta), complex(s2, tb), complex(sigma, tb)]
            try:
                _check_pole_clear(has_pole, pts)
                return track_polyline(f, pts, step)
            except (BoundaryZero, PoleError):
                if k == MAX_JITTER:
                    raise
        raise AssertionError

    windings = []
    tracks = list(H)
    for k in range(len(breaks) - 1):
        R = vertical(sigma2, breaks[k], breaks[k + 1], +1.0)
        L = vertical(sigma1, breaks[k], breaks[k + 1], -1.0)
        tracks += [R, L]
        windings.append(_to_integer(H[k].delta + R.delta - H[k + 1].delta - L.delta))
    return StripScan(sigma1, sigma2, breaks, windings,
                     min(t.min_modulus for t in tracks), max(t.depth for t in tracks))


def strip_breaks(t1: float, t2: float, height: float = STRIP_HEIGHT, extra=(), avoid_real_axis=False):
    """Break points from t1 to t2 with gaps <= height, including ``extra``."""
    n = max(1, int(math.ceil((t2 - t1) / height - 1e-12)))
    pts = set(np.linspace(t1, t2, n + 1).tolist())
    pts.update(float(x) for x in extra if t1 <= x <= t2)
    out = sorted(pts)
    if avoid_real_axis:
        out = [b for b in out if b in (t1, t2) or abs(b) >= 0.5]
    return out


# ---------------------------------------------------------------------------
# counting


def _function(a: PeriodicSequence, opts: EvalOptions) -> Func:
    return lambda z: f_eval_array(a, z, opts)


def _pole_inside(a: PeriodicSequence, rect: Rectangle) -> int:
    if not _has_pole(a):
        return 0
    if rect.distance_to_boundary(1 + 0j) < 1e-6:
        raise PoleError("the pole s = 1 lies on the rectangle boundary")
    return 1 if rect.contains(1 + 0j) else 0


def _scan_rect(a, rect, step, opts, height=STRIP_HEIGHT):
    has_pole = _has_pole(a)
    breaks = strip_breaks(rect.t1, rect.t2, height,
                          avoid_real_axis=rect.sigma1 < 1 < rect.sigma2 or a.is_real)
    return scan_strips(_function(a, opts), rect.sigma1, rect.sigma2, breaks,
                       step=step, has_pole=has_pole)


def winding_number(a: PeriodicSequence, rect: Rectangle, step: float = DEFAULT_STEP,
                   opts: EvalOptions = DEFAULT_OPTS) -> int:
    """Zeros minus poles of F_a inside ``rect`` (argument principle)."""
    if a.is_zero:
        raise DegenerateInput("F_a is identically zero")
    _pole_inside(a, rect)  # rejects a pole on the boundary
    return sum(_scan_rect(a, rect, step, opts).windings)


def count_zeros(a: PeriodicSequence, rect: Rectangle, step: float = DEFAULT_STEP,
                opts: EvalOptions = DEFAULT_OPTS) -> int:
    """Number of zeros of F_a in ``rect`` counted with multiplicity."""
    return winding_number(a, rect, step, opts) + _pole_inside(a, rect)


# ---------------------------------------------------------------------------
# distinct zeros


def _newton(f: Func, z: complex, cell: Rectangle, tol: float = 1e-10, max_iter: int = 60):
    h = 1e-6
    for _ in range(max_iter):
        F = complex(f(np.array([z]))[0])
        if abs(F) < tol:
            return z, abs(F)
        Fp, Fm = f(np.array([z + h, z - h]))
        dF = (Fp - Fm) / (2 * h)
        if dF == 0:
            return None
        dz = -F / dF
        lam = 1.0
        while not cell.contains(z + lam * dz) and lam > 1e-3:
            lam *= 0.5
        if not cell.contains(z + lam * dz):
            return None
        z = z + lam * dz
        if abs(lam * dz) < 1e-15 * max(1.0, abs(z)):
            F = complex(f(np.array([z]))[0])
            return (z, abs(F)) if abs(F) < tol else None
    return None


def _split_value(lo: float, hi: float, attempt: int) -> float:
    offsets = (0.0, 0.0137, -0.0191, 0.0313, -0.0419, 0.0571)
    return lo + (hi - lo) * (0.5 + offsets[attempt % len(offsets)])


def _children(cell: Rectangle, attempt: int) -> list[Rectangle]:
    w, h = cell.sigma2 - cell.sigma1, cell.t2 - cell.t1
    sm = _split_value(cell.sigma1, cell.sigma2, attempt)
    tm = _split_value(cell.t1, cell.t2, attempt)
    if h > 2 * w:
        return [Rectangle(cell.sigma1, cell.sigma2, cell.t1, tm), Rectangle(cell.sigma1, cell.sigma2, tm, cell.t2)]
    if w > 2 * h:
        return [Rectangle(cell.sigma1, sm, cell.t1, cell.t2), Rectangle(sm, cell.sigma2, cell.t1, cell.t2)]
    return [Rectangle(cell.sigma1, sm, cell.t1, tm), Rectangle(sm, cell.sigma2, cell.t1, tm),
            Rectangle(cell.sigma1, sm, tm, cell.t2), Rectangle(sm, cell.sigma2, tm, cell.t2)]


def _cell_count(a, f, cell, step, has_pole) -> int:
    pole = 0
    if has_pole:
        if cell.distance_to_boundary(1 + 0j) < 1e-6:
            raise PoleError("split line through the pole")
        pole = 1 if cell.contains(1 + 0j) else 0
    scan = scan_strips(f, cell.sigma1, cell.sigma2, [cell.t1, cell.t2], step=step,
                       has_pole=has_pole, lo_external=False, hi_external=False)
    if scan.breaks != [cell.t1, cell.t2]:
        raise BoundaryZero("cell edge needed jitter")
    return scan.windings[0] + pole


def _locate(a, f, cell: Rectangle, count: int, sep: float, step: float, has_pole: bool):
    """Resolve the zeros of a cell known to contain ``count`` of them."""
    found: list[tuple[complex, int]] = []
    unresolved: list[tuple[complex, int]] = []
    depth = 0
    stack = [(cell, count, 0)]
    while stack:
        c, n, d = stack.pop()
        depth = max(depth, d)
        if n <= 0:
            continue
        center = complex(0.5 * (c.sigma1 + c.sigma2), 0.5 * (c.t1 + c.t2))
        if n == 1:
            res = _newton(f, center, c)
            if res is not None:
                z, _ = res
                r = min(sep, 0.5 * c.distance_to_boundary(z))
                found.append((complex(z), circle_winding(f, z, r)))
                continue
        if c.diameter < sep:
            res = _newton(f, center, c) if n == 1 else None
            loc = res[0] if res else center
            if n > 1:
                unresolved.append((loc, n))
            found.append((complex(loc), n))
            continue
        cstep = min(step, 0.25 * min(c.sigma2 - c.sigma1, c.t2 - c.t1))
        for attempt in range(8):
            try:
                kids = _children(c, attempt)
                counts = [_cell_count(a, f, k, cstep, has_pole) for k in kids]
            except (BoundaryZero, PoleError):
                continue
            if sum(counts) == n:
                break
            cstep *= 0.5
        else:
            raise PrecisionError(f"could not subdivide cell {c} consistently")
        stack.extend((k, m, d + 1) for k, m in zip(kids, counts))
    found.sort(key=lambda zm: (zm[0].imag, zm[0].real))
    return found, unresolved, depth


def distinct_zeros(a: PeriodicSequence, rect: Rectangle, sep: float = 1e-6, step: float = DEFAULT_STEP,
                   opts: EvalOptions = DEFAULT_OPTS) -> ZeroReport:
    if sep <= 0:
        raise ValueError("sep must be positive")
    f = _function(a, opts)
    has_pole = _has_pole(a)
    pole = _pole_inside(a, rect)
    scan = _scan_rect(a, rect, step, opts)
    total = sum(scan.windings) + pole
    found, unresolved, depth = [], [], 0
    for k, w in enumerate(scan.windings):
        cell = Rectangle(rect.sigma1, rect.sigma2, scan.breaks[k], scan.breaks[k + 1])
        n = w + (1 if has_pole and cell.contains(1 + 0j) else 0)
        if n:
            fz, un, d = _locate(a, f, cell, n, sep, step, has_pole)
            found += fz
            unresolved += un
            depth = max(depth, d)
    if sum(m for _, m in found) != total:
        raise PrecisionError("located multiplicities disagree with the contour count")
    return ZeroReport(total, found, scan.min_modulus, depth, unresolved)


# ---------------------------------------------------------------------------
# density tables


def _scan_chunk(a, sigma1, sigma2, breaks, step, opts, lo_ext, hi_ext, with_distinct, sep):
    f = _function(a, opts)
    has_pole = _has_pole(a)
    scan = scan_strips(f, sigma1, sigma2, breaks, step=step, has_pole=has_pole,
                       lo_external=lo_ext, hi_external=hi_ext)
    rows = []
    for k, w in enumerate(scan.windings):
        cell = Rectangle(sigma1, sigma2, scan.breaks[k], scan.breaks[k + 1])
        n = w + (1 if has_pole and cell.contains(1 + 0j) else 0)
        nd = 0
        if with_distinct and n:
            fz, _, _ = _locate(a, f, cell, n, sep, step, has_pole)
            nd = len(fz)
        rows.append((n, nd))
    return rows


def density_table(a: PeriodicSequence, sigma1: float, sigma2: float, Ts, *, symmetric: bool = False,
                  height: float = STRIP_HEIGHT, step: float = DEFAULT_STEP, with_distinct: bool = True,
                  sep: float = 1e-6, workers: int = 1, opts: EvalOptions = DEFAULT_OPTS) -> list[DensityRow]:
    """N, N' and N/T for (sigma1, sigma2) x [0, T] (or [-T, T]) for each T."""
    Ts = [float(T) for T in Ts]
    if any(T <= 0 for T in Ts) or any(b <= a_ for a_, b in zip(Ts[:-1], Ts[1:])):
        raise ValueError("Ts must be positive and increasing")
    if not sigma1 < sigma2:
        raise ValueError("need sigma1 < sigma2")
    if a.is_zero:
        raise DegenerateInput("F_a is identically zero")
    Tmax = Ts[-1]
    lo = -Tmax if symmetric else 0.0
    extra = Ts + ([-T for T in Ts] if symmetric else [])
    pole_band = sigma1 < 1 < sigma2 and _has_pole(a)
    breaks = strip_breaks(lo, Tmax, height, extra, avoid_real_axis=symmetric and (pole_band or a.is_real))
    if pole_band and not symmetric:
        raise PoleError("the pole s = 1 lies on the bottom edge t = 0")

    workers = max(1, int(workers))
    nstrips = len(breaks) - 1
    bounds = np.linspace(0, nstrips, min(workers, nstrips) + 1).round().astype(int)
    jobs = [(breaks[i : j + 1], i == 0, j == nstrips) for i, j in zip(bounds[:-1], bounds[1:]) if j > i]

    def run(job):
        br, lo_ext, hi_ext = job
        return _scan_chunk(a, sigma1, sigma2, br, step, opts, lo_ext, hi_ext, with_distinct, sep)

    if len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=len(jobs)) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(jobs[0])]
    strips = [r for part in parts for r in part]

    rows = []
    for T in Ts:
        lo_T = -T if symmetric else 0.0
        sel = [s for s, b0, b1 in zip(strips, breaks[:-1], breaks[1:]) if b0 >= lo_T - 1e-9 and b1 <= T + 1e-9]
        N = sum(s[0] for s in sel)
        Nd = sum(s[1] for s in sel) if with_distinct else N
        rows.append(DensityRow(T, N, Nd, N / T))
    return rows


# ---------------------------------------------------------------------------
# moments and density ratios


def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def adaptive_gauss(g: Callable[[np.ndarray], np.ndarray], a: float, b: float, abs_tol: float,
                   panel: float = 1.0, nodes: int = 16, max_rounds: int = 30) -> float:
    """Panel-wise Gauss-Legendre with bisection of panels whose one- and two-piece rules disagree."""
    x, w = _gauss_legendre(nodes)
    n0 = max(1, int(math.ceil((b - a) / panel)))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    total = 0.0
    for _ in range(max_rounds):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        pts = np.concatenate([
            (mid[:, None] + half[:, None] * x[None, :]).ravel(),
            (0.5 * (lo + mid)[:, None] + 0.5 * half[:, None] * x[None, :]).ravel(),
            (0.5 * (mid + hi)[:, None] + 0.5 * half[:, None] * x[None, :]).ravel(),
        ])
        vals = g(pts).reshape(3, lo.size, nodes)
        whole = half * (vals[0] @ w)
        split = 0.5 * half * (vals[1] @ w + vals[2] @ w)
        err = np.abs(whole - split)
        ok = err <= abs_tol * (hi - lo) / (b - a)
        total += float(np.sum(split[ok]))
        if ok.all():
            return total
        lo, hi = lo[~ok], hi[~ok]
        lo, hi = np.concatenate([lo, 0.5 * (lo + hi)]), np.concatenate([0.5 * (lo + hi), hi])
    raise PrecisionError("adaptive quadrature did not converge")


def moment_main_term(a: PeriodicSequence, sigma: float, T: float, opts: EvalOptions = DEFAULT_OPTS) -> float:
    q = a.period
    acc = 0.0
    for j, v in enumerate(a.values, start=1):
        if v != 0:
            acc += abs(v) ** 2 * hurwitz_zeta(2 * sigma, j / q, opts).real
    return float(T * q ** (-2 * sigma) * acc)


def second_moment(a: PeriodicSequence, sigma: float, T: float, opts: EvalOptions = DEFAULT_OPTS) -> MomentResult:
    """Mean square of F_a on the line Re s = sigma against the Hurwitz main term."""
    if not 0.5 < sigma < 1:
        raise ValueError("sigma must lie in (1/2, 1)")
    if T < 10:
        raise ValueError("T must be >= 10")
    if a.is_zero:
        raise DegenerateInput("F_a is identically zero")
    main = moment_main_term(a, sigma, T, opts)

    def g(t):
        return np.abs(f_eval_array(a, sigma + 1j * t, opts)) ** 2

    integral = adaptive_gauss(g, 0.0, T, 1e-6 * main)
    return MomentResult(float(sigma), float(T), float(integral), main, float(abs(integral - main) / main))


def _leading(a: PeriodicSequence) -> int:
    nz = np.nonzero(a.values)[0]
    if nz.size == 0:
        raise DegenerateInput("F_a is identically zero")
    return int(nz[0]) + 1


def dominance_margin(a: PeriodicSequence, sigma: float) -> float:
    """|a_m| m^-sigma / 2 - sum_{n>m} |a_n| n^-sigma, with a_m the first nonzero term.

    Positive means F_a(s) = a_m m^-s (1 + theta), |theta| < 1/2, for Re s >= sigma.
    """
    m = _leading(a)
    absa = PeriodicSequence(np.abs(a.values))
    full = float(f_eval_array(absa, np.array([sigma + 0j]))[0].real)
    head = sum(abs(a(n)) * n ** -sigma for n in range(1, m + 1))
    return abs(a(m)) * m ** -sigma / 2 - (full - head)


def certified_sigma_cap(a: PeriodicSequence, start: float = 4.0, max_cap: float = 64.0) -> float:
    cap = max(start, 1 + 2 / math.log(2))
    while dominance_margin(a, cap) <= 0:
        cap *= 1.5
        if cap > max_cap:
            raise PrecisionError("no half-plane of leading-term dominance found")
    return cap


def theorem3_ratio(a: PeriodicSequence, u: float, T: float, sigma_cap: float | None = None,
                   step: float = DEFAULT_STEP, opts: EvalOptions = DEFAULT_OPTS) -> Theorem3Result:
    """N(1/2 + u, sigma_cap, T) * u / (T log(1/u)) over |Im s| <= T."""
    if not 0 < u <= 0.5:
        raise ValueError("u must lie in (0, 1/2]")
    if T < 10:
        raise ValueError("T must be >= 10")
    cap = certified_sigma_cap(a) if sigma_cap is None else float(sigma_cap)
    if cap <= 0.5 + u:
        raise ValueError("sigma_cap must exceed 1/2 + u")
    n = count_zeros(a, Rectangle(0.5 + u, cap, -T, T), step, opts)
    return Theorem3Result(u, T, cap, n, n * u / (T * math.log(1 / u)))
