"""Named vector fields that separate the integrability notions.

``basis-over-n``
    ``n -> e_n / n`` in l^2: unconditionally integrable (orthogonal values)
    but the norms are not summable.
``inverse-square``
    ``n -> e_n / n^2`` in l^2: norms summable, so it has a uniform tail.
``alternating-harmonic``
    ``n -> (-1)^n / n`` as a one-dimensional vector: conditionally but not
    unconditionally summable.
``sup-norm-basis``
    ``n -> e_n`` in the sup-norm sequence space: pseudo-integrable with
    bound 1, yet every singleton violates the Cauchy condition at eps < 1.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import polygamma

from .ucond import TailOracle, VectorField, coordinate_field, make_field, naturals


def inverse_square_tail(n: int) -> float:
    """``sum_{k > n} 1/k^2`` (trigamma at n + 1)."""
    return float(polygamma(1, n + 1))


def inverse_fourth_tail(n: int) -> float:
    """``sum_{k > n} 1/k^4`` via the pentagamma function."""
    return float(polygamma(3, n + 1)) / 6.0


def basis_over_n() -> VectorField:
    l2 = TailOracle("l2-orthogonal", tail=lambda n: math.sqrt(inverse_square_tail(n)))
    l1 = TailOracle("l1-norms", tail=lambda n: math.inf)
    return coordinate_field(naturals(), lambda ix: 1.0 / np.asarray(ix, dtype=float),
                            oracles=(l1, l2), name="basis-over-n")


def inverse_square_basis() -> VectorField:
    l1 = TailOracle("l1-norms", tail=inverse_square_tail)
    l2 = TailOracle("l2-orthogonal", tail=lambda n: math.sqrt(inverse_fourth_tail(n)))
    return coordinate_field(naturals(), lambda ix: 1.0 / np.asarray(ix, dtype=float) ** 2,
                            oracles=(l1, l2), name="inverse-square")


def alternating_harmonic() -> VectorField:
    def batch(ix):
        ix = np.asarray(ix, dtype=float)
        return (np.where(ix % 2 == 0, 1.0, -1.0) / ix).reshape(-1, 1)

    return make_field(naturals(), lambda n: batch([n])[0], shape=(1,), batch=batch, name="alternating-harmonic")


def alternating_inverse_square() -> VectorField:
    """The scalar field ``n -> (-1)^n / n^2``."""

    def batch(ix):
        ix = np.asarray(ix, dtype=float)
        return np.where(ix % 2 == 0, 1.0, -1.0) / ix**2

    l1 = TailOracle("l1-norms", tail=inverse_square_tail)
    return make_field(naturals(), lambda n: batch([n])[0], batch=batch, oracles=(l1,),
                      name="alternating-inverse-square")


def sup_norm_basis() -> VectorField:
    return coordinate_field(naturals(), lambda ix: np.ones(len(ix)), norm_kind="sup", name="sup-norm-basis")


INSTANCES = {
    "basis-over-n": basis_over_n,
    "inverse-square": inverse_square_basis,
    "alternating-harmonic": alternating_harmonic,
    "alternating-inverse-square": alternating_inverse_square,
    "sup-norm-basis": sup_norm_basis,
}


def get_instance(name: str) -> VectorField:
    try:
        return INSTANCES[name]()
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: {sorted(INSTANCES)}") from None
