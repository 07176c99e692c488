"""Finite abelian groups, their duals, and operator-valued Fourier transforms.

A group is a product of cyclic factors ``Z_{n_1} x ... x Z_{n_k}``;
characters carry the same coordinate tuples through the standard
self-duality, with pairing ``(t, x) = prod_i exp(2 pi i t_i x_i / n_i)``.

Haar masses: 1 per point of G and ``1/|G|`` per character. The forward
transform uses ``(t, x)`` without a conjugate, the inverse uses the conjugate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FactorMismatch, ShapeMismatch

Element = tuple


@dataclass(frozen=True)
class FiniteAbelianGroup:
    factors: tuple[int, ...]

    def __post_init__(self):
        fs = tuple(int(n) for n in self.factors)
        if any(n < 1 for n in fs):
            raise ValueError(f"cyclic orders must be >= 1, got {fs}")
        object.__setattr__(self, "factors", fs)

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Parse a factor list such as ``"4,2"``; the empty string is the trivial group."""
        text = text.strip()
        if not text:
            return cls(())
        try:
            return cls(tuple(int(p) for p in text.split(",")))
        except ValueError:
            raise ValueError(f"bad group literal {text!r}") from None

    def __str__(self) -> str:
        return ",".join(map(str, self.factors)) or "1"

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def mass(self) -> float:
        return 1.0

    @property
    def dual_mass(self) -> float:
        return 1.0 / self.order

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        return tuple(itertools.product(*(range(n) for n in self.factors)))

    @cached_property
    def _index(self) -> dict:
        return {t: i for i, t in enumerate(self.elements)}

    def index(self, t) -> int:
        return self._index[self.coerce(t)]

    def coerce(self, t) -> Element:
        if isinstance(t, (int, np.integer)) and len(self.factors) == 1:
            t = (int(t),)
        t = tuple(int(v) for v in t)
        if len(t) != len(self.factors):
            raise FactorMismatch(f"element {t} does not match factors {self.factors}")
        return tuple(v % n for v, n in zip(t, self.factors))

    def zero(self) -> Element:
        return (0,) * len(self.factors)

    def add(self, s, t) -> Element:
        s, t = self.coerce(s), self.coerce(t)
        return tuple((a + b) % n for a, b, n in zip(s, t, self.factors))

    def neg(self, t) -> Element:
        return tuple((-a) % n for a, n in zip(self.coerce(t), self.factors))

    def sub(self, s, t) -> Element:
        return self.add(s, self.neg(t))

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]`` is the index of ``elements[i] + elements[j]``."""
        n = self.order
        out = np.empty((n, n), dtype=np.int64)
        for i, s in enumerate(self.elements):
            for j, t in enumerate(self.elements):
                out[i, j] = self._index[self.add(s, t)]
        return out

    @cached_property
    def neg_index(self) -> np.ndarray:
        return np.array([self._index[self.neg(t)] for t in self.elements], dtype=np.int64)

    @cached_property
    def character_table(self) -> np.ndarray:
        """``table[i, j] = (elements[i], elements[j])``."""
        n = self.order
        out = np.empty((n, n), dtype=complex)
        for i, t in enumerate(self.elements):
            for j, x in enumerate(self.elements):
                out[i, j] = _pairing_value(self.factors, t, x)
        return out


def _pairing_value(factors, t, x) -> complex:
    if not factors:
        return 1.0 + 0.0j
    m = math.lcm(*factors)
    phase = sum(ti * xi * (m // n) for ti, xi, n in zip(t, x, factors)) % m
    k = 4 * phase
    if k % m == 0:  # exact quarter turns
        return (1.0, 1j, -1.0, -1j)[(k // m) % 4] + 0j
    return complex(np.exp(2j * np.pi * phase / m))


def pairing(G: FiniteAbelianGroup, t, x) -> complex:
    """The duality pairing ``(t, x)``."""
    for v in (t, x):
        vt = (v,) if isinstance(v, (int, np.integer)) else tuple(v)
        if len(vt) != len(G.factors):
            raise FactorMismatch(f"{vt} does not match factors {G.factors}")
    return _pairing_value(G.factors, G.coerce(t), G.coerce(x))


def dual_group(G: FiniteAbelianGroup) -> tuple[Element, ...]:
    """The characters of G, indexed by the same coordinate tuples as G."""
    return G.elements


@dataclass(frozen=True)
class OperatorField:
    """Matrices indexed by the elements of G (or of its dual when ``dual``)."""

    group: FiniteAbelianGroup
    values: np.ndarray
    dual: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v.reshape(-1, 1, 1)
        if v.ndim != 3 or v.shape[0] != self.group.order or v.shape[1] != v.shape[2]:
            raise ShapeMismatch(f"expected ({self.group.order}, d, d) values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __call__(self, t) -> np.ndarray:
        return self.values[self.group.index(t)]

    @classmethod
    def from_function(cls, G: FiniteAbelianGroup, fn, dual: bool = False) -> "OperatorField":
        vals = [np.atleast_2d(np.asarray(fn(t), dtype=complex)) for t in G.elements]
        return cls(G, np.stack(vals), dual)

    @classmethod
    def delta(cls, G: FiniteAbelianGroup, t, M, dual: bool = False) -> "OperatorField":
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        vals = np.zeros((G.order,) + M.shape, dtype=complex)
        vals[G.index(t)] = M
        return cls(G, vals, dual)

    def to_json(self) -> dict:
        return {
            "group": list(self.group.factors),
            "dim": self.dim,
            "dual": self.dual,
            "values": [[[z.real, z.imag] for z in m.ravel()] for m in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorField":
        G = FiniteAbelianGroup(tuple(data["group"]))
        d = int(data["dim"])
        vals = np.array([[complex(a, b) for a, b in m] for m in data["values"]]).reshape(G.order, d, d)
        return cls(G, vals, bool(data.get("dual", False)))


def fourier(f: OperatorField) -> OperatorField:
    """``f^(x) = sum_t (t, x) f(t)`` with unit mass on G."""
    table = f.group.character_table
    vals = np.einsum("tx,tij->xij", table, f.values) * f.group.mass
    return OperatorField(f.group, vals, dual=True)


def inverse_fourier(g: OperatorField) -> OperatorField:
    """``g~(t) = sum_x conj((t, x)) g(x) / |G|``."""
    table = g.group.character_table
    vals = np.einsum("tx,xij->tij", table.conj(), g.values) * g.group.dual_mass
    return OperatorField(g.group, vals, dual=False)


def plancherel_check(f: OperatorField) -> tuple[float, float, float]:
    fh = fourier(f)
    lhs = float(np.sum(np.abs(f.values) ** 2)) * f.group.mass
    rhs = float(np.sum(np.abs(fh.values) ** 2)) * f.group.dual_mass
    return lhs, rhs, abs(lhs - rhs)


def random_field(G: FiniteAbelianGroup, d: int, rng: np.random.Generator) -> OperatorField:
    vals = rng.standard_normal((G.order, d, d)) + 1j * rng.standard_normal((G.order, d, d))
    return OperatorField(G, vals)
