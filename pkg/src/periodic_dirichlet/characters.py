"""Dirichlet characters modulo q with exact exponent bookkeeping.

A character is stored as its label (exponents on a fixed set of
generators of (Z/qZ)*) together with an integer phase table: the value at
n is exp(2 pi i k(n) / E) where E is the exponent of the group, or 0 when
gcd(n, q) > 1 (encoded as k = -1).  Complex values are derived from the
integer table, so comparisons between characters are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .primes import divisors, euler_phi, prime_factors

MAX_MODULUS = 10**6


@dataclass(frozen=True)
class GroupStructure:
    """Generator decomposition of (Z/qZ)*."""

    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    exponent: int
    # logs[n % q] = exponent tuple of n on the generators (row of -1 if not a unit)
    logs: np.ndarray = field(repr=False)


def _is_primitive_root(g: int, pk: int, phi: int, phi_primes: list[int]) -> bool:
    if math.gcd(g, pk) != 1:
        return False
    return all(pow(g, phi // ell, pk) != 1 for ell in phi_primes)


def _local_generators(p: int, k: int) -> list[tuple[int, int]]:
    """(generator, order) pairs for (Z/p^k Z)*."""
    pk = p**k
    if p == 2:
        if k == 1:
            return []
        if k == 2:
            return [(3, 2)]
        return [(pk - 1, 2), (5, 2 ** (k - 2))]
    phi = pk - pk // p
    ells = list(prime_factors(phi))
    g = 2
    while not _is_primitive_root(g, pk, phi, ells):
        g += 1
    return [(g, phi)]


@lru_cache(maxsize=256)
def group_structure(q: int) -> GroupStructure:
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    if q > MAX_MODULUS:
        raise ValueError(f"modulus {q} exceeds the table cap {MAX_MODULUS}")
    gens: list[int] = []
    orders: list[int] = []
    for p, k in sorted(prime_factors(q).items()):
        pk = p**k
        rest = q // pk
        for g, o in _local_generators(p, k):
            # CRT lift: x = g mod p^k, x = 1 mod q/p^k
            if rest == 1:
                x = g % q
            else:
                x = (g * rest * pow(rest, -1, pk) + pk * pow(pk, -1, rest)) % q
            gens.append(x)
            orders.append(o)
    exponent = math.lcm(*orders) if orders else 1

    r = len(gens)
    logs = np.full((q, max(r, 1)), -1, dtype=np.int64)
    elems = np.array([1 % q], dtype=np.int64)
    exps = np.zeros((1, r), dtype=np.int64)
    for i, (g, o) in enumerate(zip(gens, orders)):
        pw = np.array([pow(g, j, q) for j in range(o)], dtype=np.int64)
        elems = (elems[:, None] * pw[None, :] % q).reshape(-1)
        new = np.repeat(exps, o, axis=0)
        new[:, i] = np.tile(np.arange(o), len(exps))
        exps = new
    if r:
        logs[elems] = exps
    else:
        logs[elems] = 0
    logs.setflags(write=False)
    return GroupStructure(q, tuple(gens), tuple(orders), exponent, logs)


_QUARTER_TURNS = np.array([1, 1j, -1, -1j])


def _roots_of_unity(k: np.ndarray, E: int) -> np.ndarray:
    """exp(2 pi i k / E), exactly 0 where k < 0 and exact at quarter turns."""
    kk = np.maximum(k, 0)
    vals = np.exp(2j * np.pi * kk / E)
    quarter = (4 * kk) % E == 0
    vals[quarter] = _QUARTER_TURNS[(4 * kk[quarter] // E) % 4]
    vals[k < 0] = 0
    return vals


class Character:
    """A Dirichlet character modulo ``modulus``.

    ``values[i]`` is the value at the residue ``i + 1`` (so the last entry is
    the value at ``q``), matching the 1..q convention of the file formats.
    """

    __slots__ = ("modulus", "label", "order_base", "phases", "values")

    def __init__(self, modulus: int, label: tuple[int, ...]):
        G = group_structure(modulus)
        label = tuple(int(e) for e in label)
        if len(label) != len(G.orders):
            raise ValueError(f"label {label} does not match {len(G.orders)} generators mod {modulus}")
        if any(not 0 <= e < o for e, o in zip(label, G.orders)):
            raise ValueError(f"label {label} out of range for orders {G.orders}")
        E = G.exponent
        weights = np.array([e * (E // o) for e, o in zip(label, G.orders)], dtype=np.int64)
        by_residue = np.full(modulus, -1, dtype=np.int64)
        unit = G.logs[:, 0] >= 0
        if weights.size:
            by_residue[unit] = (G.logs[unit] @ weights) % E
        else:
            by_residue[unit] = 0
        phases = np.roll(by_residue, -1)  # position i <-> residue i + 1
        phases.setflags(write=False)
        vals = _roots_of_unity(phases, E)
        vals.setflags(write=False)
        self.modulus = modulus
        self.label = label
        self.order_base = E
        self.phases = phases
        self.values = vals

    def __call__(self, n):
        """Value at integer(s) ``n``."""
        idx = (np.asarray(n, dtype=np.int64) - 1) % self.modulus
        out = self.values[idx]
        return complex(out) if np.ndim(out) == 0 else out

    def phase_at(self, n: int) -> Fraction | None:
        """chi(n) = exp(2 pi i * phase); None when chi(n) = 0."""
        k = int(self.phases[(n - 1) % self.modulus])
        return None if k < 0 else Fraction(k, self.order_base)

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.label)

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        return self.modulus == other.modulus and self.label == other.label

    def __hash__(self):
        return hash((self.modulus, self.label))

    def __repr__(self):
        return f"Character(modulus={self.modulus}, label={list(self.label)})"

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "label": list(self.label),
            "values": [[float(v.real), float(v.imag)] for v in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Character":
        chi = cls(int(obj["modulus"]), tuple(obj["label"]))
        if "values" in obj:
            given = np.array([complex(re, im) for re, im in obj["values"]])
            if given.shape != chi.values.shape or np.max(np.abs(given - chi.values)) > 1e-9:
                raise ValueError("character values do not match the label")
        return chi


@dataclass(frozen=True)
class PrimitiveDescriptor:
    conductor: int
    inducer: Character


@dataclass(frozen=True)
class CharacterMatrix:
    modulus: int
    residues: tuple[int, ...]
    characters: tuple[Character, ...]
    entries: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    inverse_inf_norm: float = 1.0


def _check_modulus(q: int) -> int:
    q = int(q)
    if q < 1:
        raise ValueError(f"modulus must be a positive integer, got {q}")
    return q


@lru_cache(maxsize=256)
def _enumerate(q: int) -> tuple[Character, ...]:
    G = group_structure(q)
    labels = product(*(range(o) for o in G.orders))
    return tuple(Character(q, lab) for lab in labels)


def enumerate_characters(q: int) -> list[Character]:
    """All phi(q) characters mod q, principal first, lexicographic by label."""
    return list(_enumerate(_check_modulus(q)))


def trivial_character() -> Character:
    return _enumerate(1)[0]


def conductor(chi: Character) -> int:
    q = chi.modulus
    for m in divisors(q):
        # chi must be trivial on units n = 1 mod m; positions are n - 1 = k m
        ph = chi.phases[::m]
        if np.all(ph <= 0):
            return m
    return q  # unreachable: m = q always qualifies


def _lift_unit(g: int, m: int, q: int) -> int:
    """Smallest n = g mod m with gcd(n, q) = 1."""
    n = g % m if m > 1 else 1
    if n == 0:
        n = m
    while math.gcd(n, q) != 1:
        n += m
    return n


def _label_from_generator_values(target_q: int, value_phase) -> tuple[int, ...]:
    G = group_structure(target_q)
    label = []
    for g, o in zip(G.generators, G.orders):
        ph = value_phase(g)
        e = ph * o
        if e.denominator != 1:
            raise ArithmeticError("value is not an o-th root of unity on a generator")
        label.append(int(e) % o)
    return tuple(label)


def primitive_inducer(chi: Character) -> PrimitiveDescriptor:
    q = chi.modulus
    m = conductor(chi)
    if m == 1:
        return PrimitiveDescriptor(1, trivial_character())
    if m == q:
        return PrimitiveDescriptor(q, chi)
    label = _label_from_generator_values(m, lambda g: chi.phase_at(_lift_unit(g, m, q)))
    return PrimitiveDescriptor(m, Character(m, label))


def induce(psi: Character, q: int) -> Character:
    """The character mod q induced by ``psi`` (whose modulus must divide q)."""
    m = psi.modulus
    if q % m:
        raise ValueError(f"modulus {m} does not divide {q}")
    if m == q:
        return psi
    label = _label_from_generator_values(q, lambda g: psi.phase_at(g % m if m > 1 else 1))
    return Character(q, label)


def is_primitive(chi: Character) -> bool:
    return conductor(chi) == chi.modulus


def primitive_characters_dividing(q: int) -> list[PrimitiveDescriptor]:
    """The set of primitive characters inducing the characters mod q."""
    seen: dict[tuple[int, tuple[int, ...]], PrimitiveDescriptor] = {}
    for chi in enumerate_characters(q):
        d = primitive_inducer(chi)
        seen.setdefault((d.conductor, d.inducer.label), d)
    return sorted(seen.values(), key=lambda d: (d.conductor, d.inducer.label))


@lru_cache(maxsize=64)
def character_matrix(q: int) -> CharacterMatrix:
    q = _check_modulus(q)
    chars = _enumerate(q)
    residues = tuple(a for a in range(1, q + 1) if math.gcd(a, q) == 1)
    idx = np.array(residues) - 1
    C = np.array([chi.values[idx] for chi in chars])
    inv = C.conj().T / euler_phi(q)
    for arr in (C, inv):
        arr.setflags(write=False)
    norm = float(np.max(np.sum(np.abs(inv), axis=1)))
    return CharacterMatrix(q, residues, chars, C, inv, norm)
