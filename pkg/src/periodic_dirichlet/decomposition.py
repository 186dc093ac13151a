"""Orthogonal character basis of the q-periodic sequences and the
regrouping of F_a into sum_psi P_psi(s) L_psi(s) over primitive psi.

Basis elements are chi~(n) = chi(n/d) for d | q and chi mod q/d; their
Dirichlet series are L_chi(s)/d^s.  Each L_chi/d^s is rewritten as
L_psi(s) times d^(-s) prod_{p | q/d} (1 - psi(p) p^(-s)) with psi the
primitive character inducing chi, which gives the Dirichlet polynomials
P_psi directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .characters import (
    Character,
    PrimitiveDescriptor,
    enumerate_characters,
    primitive_inducer,
)
from .errors import DegenerateInput
from .primes import divisors, euler_phi, prime_factors
from .special import DirichletPolynomial, PeriodicSequence


@dataclass(frozen=True)
class BasisElement:
    d: int
    chi: Character
    sequence: PeriodicSequence
    norm_sq: int

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.d, self.chi.label)


@dataclass
class BasisCoefficients:
    q: int
    entries: dict[tuple[int, tuple[int, ...]], complex]


@dataclass
class PrimitiveComponent:
    psi: PrimitiveDescriptor
    poly: DirichletPolynomial

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.psi.conductor, self.psi.inducer.label)


def inner(a, b) -> complex:
    """<a, b> = sum_{n=1}^q a_n conj(b_n)."""
    va = a.values if isinstance(a, PeriodicSequence) else np.asarray(a)
    vb = b.values if isinstance(b, PeriodicSequence) else np.asarray(b)
    return complex(np.vdot(vb, va))


@lru_cache(maxsize=64)
def _basis(q: int) -> tuple[BasisElement, ...]:
    out = []
    n = np.arange(1, q + 1)
    for d in divisors(q):
        mask = n % d == 0
        for chi in enumerate_characters(q // d):
            vals = np.zeros(q, dtype=complex)
            vals[mask] = chi(n[mask] // d)
            out.append(BasisElement(d, chi, PeriodicSequence(vals), euler_phi(q // d)))
    return tuple(out)


def tilde_basis(q: int) -> list[BasisElement]:
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return list(_basis(int(q)))


def project(a: PeriodicSequence) -> BasisCoefficients:
    entries = {}
    for b in _basis(a.period):
        entries[b.key] = inner(a, b.sequence) / b.norm_sq
    return BasisCoefficients(a.period, entries)


def reconstruct_from_coefficients(coeffs: BasisCoefficients) -> PeriodicSequence:
    vals = np.zeros(coeffs.q, dtype=complex)
    for b in _basis(coeffs.q):
        vals += coeffs.entries.get(b.key, 0) * b.sequence.values
    return PeriodicSequence(vals)


def _euler_expansion(psi: Character, d: int, rest: int) -> dict[int, complex]:
    """d^(-s) prod_{p | rest} (1 - psi(p) p^(-s)) as {k: coefficient}."""
    terms = {d: 1.0 + 0j}
    for p in prime_factors(rest):
        v = psi(p)
        if v == 0:
            continue
        nxt = dict(terms)
        for k, c in terms.items():
            nxt[k * p] = nxt.get(k * p, 0) - c * v
        terms = nxt
    return terms


def primitive_components(a: PeriodicSequence, drop_zero: bool = True) -> list[PrimitiveComponent]:
    """Unique representation F_a = sum_psi P_psi L_psi, ordered by (conductor, label).

    With ``drop_zero`` components whose polynomial vanishes identically
    (coefficients exactly zero) are omitted.
    """
    q = a.period
    coeffs = project(a)
    groups: dict[tuple[int, tuple[int, ...]], tuple[PrimitiveDescriptor, dict[int, complex]]] = {}
    for b in _basis(q):
        c = coeffs.entries[b.key]
        desc = primitive_inducer(b.chi)
        key = (desc.conductor, desc.inducer.label)
        _, poly = groups.setdefault(key, (desc, {}))
        if c == 0:
            continue
        for k, v in _euler_expansion(desc.inducer, b.d, q // (b.d * desc.conductor)).items():
            poly[k] = poly.get(k, 0) + c * v
    out = []
    for key in sorted(groups):
        desc, poly = groups[key]
        P = DirichletPolynomial(poly)
        if drop_zero and P.is_zero:
            continue
        out.append(PrimitiveComponent(desc, P))
    return out


def reconstruct(components: list[PrimitiveComponent], q: int) -> PeriodicSequence:
    """Coefficients a_1..a_q of sum_psi P_psi(s) L_psi(s)."""
    n = np.arange(1, q + 1)
    vals = np.zeros(q, dtype=complex)
    for comp in components:
        psi = comp.psi.inducer
        for k, c in comp.poly.coefficients.items():
            if q % k:
                raise ValueError(f"polynomial support {k} does not divide q={q}")
            mask = n % k == 0
            vals[mask] += c * psi(n[mask] // k)
    return PeriodicSequence(vals)


def component_poly_magnitudes(components: list[PrimitiveComponent]) -> dict:
    return {c.key: max((abs(v) for v in c.poly.coefficients.values()), default=0.0) for c in components}


def membership(a: PeriodicSequence, psi: PrimitiveDescriptor, tol: float = 1e-9) -> bool:
    """Is F_a in E_{q,psi}, i.e. of the form P(s) L_psi(s)?"""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.is_zero:
        raise DegenerateInput("membership is undefined for the zero sequence")
    if a.period % psi.conductor:
        return False
    if a.period <= 2:
        # only the trivial primitive character occurs, the answer is structural
        return psi.conductor == 1
    comps = primitive_components(a, drop_zero=False)
    mags = component_poly_magnitudes(comps)
    scale = max(mags.values())
    target = (psi.conductor, psi.inducer.label)
    return all(m < tol * scale for key, m in mags.items() if key != target)
