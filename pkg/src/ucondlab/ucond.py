"""Unconditional integration over countable point-mass spaces.

Every measure space here is a countable set of points with point masses, so
the integral over a local set is a weighted finite sum. The net of partial
integrals is indexed by the local family; :func:`u_integrate` certifies its
limit either from an analytic tail oracle (a proof) or by probing disjoint
local sets beyond a stretch of the canonical exhaustion (evidence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import CauchyFailure, NoOracle, NotLocal, NotScalar, ShapeMismatch, UnboundedMultiplier
from .seqvec import SeqVector

NORM_KINDS = ("euclidean", "sup", "frobenius", "operator")

TRACE_MAX = 1 << 20
DENSE_TRACE_MAX = 1 << 16
PROBE_WINDOW = 4096
GENERIC_PROBE_WINDOW = 64

Point = Hashable
LocalSet = Any  # range, tuple, frozenset, set, list or 1-d integer array


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalIntegrationSpace:
    """A countable point-mass measure space with a local family.

    ``kind`` is ``"finite"`` (explicit point list, full power set is local),
    ``"naturals"`` (``start, start+1, ...``) or ``"integers"`` (enumerated
    ``0, 1, -1, 2, -2, ...``); on the infinite kinds every finite subset is
    local. ``mass`` is a constant or a callable point mass. The canonical
    exhaustion ``L_k`` is the first ``k`` points of the enumeration.
    """

    kind: str
    points: tuple = ()
    start: int = 1
    mass: float | Callable[[Any], float] = 1.0
    name: str = ""
    _position: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("finite", "naturals", "integers"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "finite":
            pos = {p: i for i, p in enumerate(self.points)}
            if len(pos) != len(self.points):
                raise ValueError("duplicate points in finite space")
            object.__setattr__(self, "_position", pos)
        if not callable(self.mass) and not (self.mass >= 0):
            raise ValueError("point mass must be nonnegative")

    # -- enumeration ------------------------------------------------------
    @property
    def size(self) -> int | None:
        return len(self.points) if self.kind == "finite" else None

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def integer_points(self) -> bool:
        if self.kind != "finite":
            return True
        return all(isinstance(p, (int, np.integer)) and not isinstance(p, bool) for p in self.points)

    def contains(self, s) -> bool:
        if self.kind == "finite":
            try:
                return s in self._position
            except TypeError:
                return False
        if not isinstance(s, (int, np.integer)) or isinstance(s, bool):
            return False
        return self.kind == "integers" or s >= self.start

    def position(self, s) -> int:
        if self.kind == "finite":
            return self._position[s]
        if self.kind == "naturals":
            return int(s) - self.start
        s = int(s)
        return 2 * s - 1 if s > 0 else -2 * s

    def point_at(self, i: int):
        if self.kind == "finite":
            return self.points[i]
        if self.kind == "naturals":
            return self.start + i
        return (i + 1) // 2 if i % 2 else -(i // 2)

    def points_at(self, positions: range):
        """Points at a range of enumeration positions (an array for integer spaces)."""
        if self.kind == "finite":
            positions = range(positions.start, min(positions.stop, len(self.points)), positions.step)
            if self.integer_points:
                return np.asarray([self.points[i] for i in positions], dtype=np.int64)
            return tuple(self.points[i] for i in positions)
        pos = np.arange(positions.start, positions.stop, positions.step, dtype=np.int64)
        if self.kind == "naturals":
            return pos + self.start
        return np.where(pos % 2 == 1, (pos + 1) // 2, -(pos // 2))

    def exhaustion(self, k: int) -> LocalSet:
        """The canonical local set ``L_k``: the first ``k`` points."""
        if k < 0:
            raise ValueError("exhaustion index must be nonnegative")
        if self.kind == "naturals":
            return range(self.start, self.start + k)
        if self.kind == "finite":
            return tuple(self.points[: min(k, len(self.points))])
        return tuple(self.point_at(i) for i in range(k))

    # -- local family -----------------------------------------------------
    def is_local(self, L) -> bool:
        try:
            self.check_local(L)
        except NotLocal:
            return False
        return True

    def check_local(self, L) -> LocalSet:
        """Validate ``L`` and return it ordered along the enumeration."""
        if isinstance(L, range):
            L = L if L.step > 0 else L[::-1]
            if len(L) == 0:
                return range(0)
            if self.kind == "naturals":
                if L.start < self.start:
                    raise NotLocal(f"range {L} leaves the space (starts at {self.start})")
                return L
            if self.kind == "finite" and len(L) > len(self.points):
                raise NotLocal("local set larger than the space")
            L = tuple(L)
        elif isinstance(L, np.ndarray):
            if L.ndim != 1:
                L = [tuple(row) for row in L.tolist()]
            else:
                L = L.tolist()
        elif L is None or isinstance(L, (str, bytes)):
            raise NotLocal(f"not a point set: {L!r}")
        try:
            pts = set(L)
        except TypeError as exc:
            raise NotLocal(f"not a finite point set: {exc}") from None
        bad = [s for s in pts if not self.contains(s)]
        if bad:
            raise NotLocal(f"points outside the space: {sorted(map(repr, bad))[:5]}")
        if self.kind == "naturals" and pts and all(isinstance(s, (int, np.integer)) for s in pts):
            lo, hi = min(pts), max(pts)
            if hi - lo + 1 == len(pts):
                return range(int(lo), int(hi) + 1)
        return tuple(sorted(pts, key=self.position))

    # -- masses -----------------------------------------------------------
    def mass_of(self, s) -> float:
        return float(self.mass(s)) if callable(self.mass) else float(self.mass)

    def masses(self, pts) -> np.ndarray:
        n = len(pts)
        if not callable(self.mass):
            return np.full(n, float(self.mass))
        return np.fromiter((self.mass(s) for s in pts), dtype=float, count=n)


def finite_space(points: Iterable, mass: float | Callable = 1.0, name: str = "") -> LocalIntegrationSpace:
    return LocalIntegrationSpace("finite", points=tuple(points), mass=mass, name=name)


def naturals(start: int = 1, mass: float | Callable = 1.0, name: str = "") -> LocalIntegrationSpace:
    return LocalIntegrationSpace("naturals", start=start, mass=mass, name=name)


def integers(mass: float | Callable = 1.0, name: str = "") -> LocalIntegrationSpace:
    return LocalIntegrationSpace("integers", mass=mass, name=name)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def norm_of(x, kind: str) -> float:
    """Norm of a target-space element (ndarray, SeqVector, or any object with ``.norm``)."""
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm kind {kind!r}")
    if not isinstance(x, (np.ndarray, np.generic, int, float, complex)):
        return float(x.norm(kind))
    a = np.asarray(x)
    if a.size == 0:
        return 0.0
    if kind == "sup":
        return float(np.max(np.abs(a)))
    if kind == "operator" and a.ndim == 2:
        return float(np.linalg.norm(a, 2))
    if kind == "operator" and a.ndim > 2:
        raise ValueError("operator norm needs a matrix")
    return float(np.linalg.norm(a.ravel()))


# ---------------------------------------------------------------------------
# fields and oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailOracle:
    """Analytic control of ``f`` outside a witness set.

    ``l2-orthogonal``: ``tail(n)`` bounds ``||int_D f||`` for every local D
    avoiding the first ``n`` exhaustion points (orthogonal values).
    ``l1-norms``: ``tail(n)`` bounds ``sum_D ||f|| mass`` for such D; this is
    the uniform kind, valid against every bounded multiplier.
    ``finite-support``: ``f`` vanishes outside ``support``.
    ``tail`` must be nonincreasing in ``n``; ``math.inf`` marks divergence.
    """

    kind: str
    tail: Callable[[int], float] | None = None
    support: LocalSet = None

    def __post_init__(self):
        if self.kind not in ("finite-support", "l1-norms", "l2-orthogonal"):
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if self.kind == "finite-support" and self.support is None:
            raise ValueError("finite-support oracle needs a support set")
        if self.kind != "finite-support" and self.tail is None:
            raise ValueError(f"{self.kind} oracle needs a tail bound")

    @property
    def uniform(self) -> bool:
        return self.kind in ("finite-support", "l1-norms")

    def scaled(self, c: float) -> "TailOracle":
        if self.kind == "finite-support":
            return self
        tail = self.tail
        c = float(c)
        return TailOracle(self.kind, tail=lambda n: c * tail(n) if c else 0.0)

    def witness(self, space: LocalIntegrationSpace, eps: float):
        """Return ``(L0, bound)`` with ``bound < eps`` (or ``bound == 0``), or None."""
        if self.kind == "finite-support":
            return space.check_local(self.support), 0.0
        tail = self.tail
        cap = space.size if space.size is not None else 1 << 62

        def ok(n):
            b = tail(n)
            return b < eps or b == 0.0

        if ok(0):
            return space.exhaustion(0), float(tail(0))
        lo, hi = 0, 1
        while not ok(hi):
            if hi >= cap:
                return None
            lo, hi = hi, min(cap, 2 * hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return space.exhaustion(hi), float(tail(hi))


@dataclass(frozen=True)
class VectorField:
    """A map from the points of a space into a target space.

    Values are ndarrays of a fixed shape (``zero`` fixes it), ``SeqVector``
    elements of a sequence space, or any object supporting ``+``, scalar
    ``*`` and ``.norm(kind)``. ``batch`` evaluates ndarray values for an array
    of integer points at once; ``coordinates`` marks a field of the form
    ``s -> c(s) e_s`` in a sequence space.
    """

    space: LocalIntegrationSpace
    value: Callable[[Any], Any]
    zero: Any
    norm_kind: str = "euclidean"
    batch: Callable[[np.ndarray], np.ndarray] | None = None
    coordinates: Callable[[np.ndarray], np.ndarray] | None = None
    oracles: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.norm_kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        if self.coordinates is not None and not self.space.integer_points:
            raise ValueError("coordinate fields need integer points")

    def __call__(self, s):
        return self.value(s)

    @property
    def is_array_valued(self) -> bool:
        return isinstance(self.zero, np.ndarray)

    def with_oracles(self, *oracles: TailOracle) -> "VectorField":
        return VectorField(self.space, self.value, self.zero, self.norm_kind, self.batch, self.coordinates, tuple(oracles), self.name)


def make_field(space, value, shape=(), norm_kind="euclidean", batch=None, oracles=(), name="") -> VectorField:
    return VectorField(space, value, np.zeros(shape, dtype=complex), norm_kind, batch, None, tuple(oracles), name)


def coordinate_field(space, coeffs, norm_kind="euclidean", oracles=(), name="") -> VectorField:
    """The sequence-space field ``s -> coeffs(s) e_s``; ``coeffs`` must be vectorized."""

    def value(s):
        return SeqVector.basis(int(s), complex(np.asarray(coeffs(np.array([s], dtype=np.int64)))[0]))

    return VectorField(space, value, SeqVector.zero(), norm_kind, None, coeffs, tuple(oracles), name)


@dataclass(frozen=True)
class UIntegralCertificate:
    """Result of :func:`u_integrate`.

    ``status`` is ``"exact"`` (finite support, ``epsilon == 0``), ``"proof"``
    (tail oracle) or ``"evidence"`` (probed Cauchy condition). ``trace``
    pairs prefixes of the reference local set with their distance to
    ``value``; ``probes`` records ``(label, size, norm)`` for the disjoint
    sets that were tested.
    """

    value: Any
    witness_set: LocalSet
    epsilon: float
    status: str
    policy: str
    trace: tuple = ()
    probes: tuple = ()
    bound: float = 0.0


@dataclass(frozen=True)
class TailWitness:
    witness_set: LocalSet
    bound: float
    kind: str


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _as_int_array(pts) -> np.ndarray:
    if isinstance(pts, range):
        return np.arange(pts.start, pts.stop, pts.step, dtype=np.int64)
    return np.asarray(pts, dtype=np.int64)


def _check_shape(f: VectorField, v):
    if f.is_array_valued:
        if np.shape(v) != f.zero.shape:
            raise ShapeMismatch(f"value of shape {np.shape(v)} in a field of shape {f.zero.shape}")
    elif isinstance(f.zero, SeqVector) and not isinstance(v, SeqVector):
        raise ShapeMismatch(f"sequence field produced {type(v).__name__}")


def _weighted_stack(f: VectorField, pts) -> np.ndarray:
    """Values times masses over ``pts`` as an array ``(n, *shape)``."""
    n = len(pts)
    shape = f.zero.shape
    if n == 0:
        return np.zeros((0,) + shape, dtype=complex)
    if f.batch is not None and f.space.integer_points:
        ix = _as_int_array(pts)
        vals = np.asarray(f.batch(ix), dtype=complex)
        if vals.shape != (n,) + shape:
            raise ShapeMismatch(f"batch returned {vals.shape}, expected {(n,) + shape}")
        m = f.space.masses(ix)
        return vals * m.reshape((n,) + (1,) * len(shape))
    out = np.empty((n,) + shape, dtype=complex)
    for i, s in enumerate(pts):
        v = f.value(s)
        _check_shape(f, v)
        out[i] = np.asarray(v) * f.space.mass_of(s)
    return out


def _integrate(f: VectorField, pts) -> Any:
    if len(pts) == 0:
        return f.zero.copy() if isinstance(f.zero, np.ndarray) else f.zero
    if f.coordinates is not None:
        coeffs, space = f.coordinates, f.space
        if isinstance(pts, range):
            if callable(space.mass):
                fn = lambda ix: np.asarray(coeffs(ix)) * space.masses(ix)  # noqa: E731
                return SeqVector.block(pts, fn)
            return SeqVector.block(pts, coeffs, scale=space.mass)
        ix = _as_int_array(pts)
        return SeqVector.from_entries(ix, np.asarray(coeffs(ix)) * space.masses(ix), unique=True)
    if f.is_array_valued:
        if f.batch is not None and f.space.integer_points:
            total = np.zeros(f.zero.shape, dtype=complex)
            for a in range(0, len(pts), TRACE_MAX):
                total = total + _weighted_stack(f, pts[a : a + TRACE_MAX]).sum(axis=0)
            return total
        total = f.zero.copy()
        for s in pts:
            v = f.value(s)
            _check_shape(f, v)
            total = total + np.asarray(v) * f.space.mass_of(s)
        return total
    total = f.zero
    for s in pts:
        v = f.value(s)
        _check_shape(f, v)
        total = total + v * f.space.mass_of(s)
    return total


def integrate_over(f: VectorField, L: LocalSet) -> Any:
    """The integral of ``f`` over the local set ``L``: ``sum_{s in L} f(s) mass(s)``."""
    return _integrate(f, f.space.check_local(L))


def _integrate_with_trace(f: VectorField, Lord) -> tuple[Any, tuple]:
    n = len(Lord)
    rems = [0]
    r = 1
    while r <= min(n, TRACE_MAX):
        rems.append(r)
        r *= 2
    if n <= TRACE_MAX and n not in rems:
        rems.append(n)
    if f.is_array_valued and f.coordinates is None and n <= DENSE_TRACE_MAX:
        w = _weighted_stack(f, Lord)
        prefix = np.cumsum(w, axis=0) if n else w
        value = prefix[-1].copy() if n else f.zero.copy()
        trace = []
        for r in rems:
            k = n - r
            part = prefix[k - 1] if k > 0 else f.zero
            trace.append((Lord[:k], norm_of(value - part, f.norm_kind)))
        return value, tuple(trace)
    value = _integrate(f, Lord)
    trace = tuple((Lord[: n - r], norm_of(_integrate(f, Lord[n - r :]), f.norm_kind)) for r in rems)
    return value, trace


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------


def _complement_window(space: LocalIntegrationSpace, L0, width: int):
    """Up to ``width`` points outside ``L0``, the first ones along the enumeration."""
    if space.kind == "naturals" and isinstance(L0, range) and L0.step == 1 and (len(L0) == 0 or L0.start == space.start):
        first = space.start + len(L0)
        return np.arange(first, first + width, dtype=np.int64)
    members = L0 if isinstance(L0, range) else frozenset(L0)
    out = []
    limit = len(L0) + width
    if space.size is not None:
        limit = min(limit, space.size)
    for i in range(limit):
        s = space.point_at(i)
        if s not in members:
            out.append(s)
            if len(out) == width:
                break
    if space.integer_points:
        return np.asarray(out, dtype=np.int64)
    return tuple(out)


class _ProbeWindow:
    """Weighted values of ``f`` on a window of points, for fast subset integrals."""

    def __init__(self, f: VectorField, pts, rng: np.random.Generator):
        self.f = f
        self.pts = pts
        n = len(pts)
        if f.coordinates is not None:
            ix = _as_int_array(pts)
            self.kind = "coord"
            self.w = np.asarray(f.coordinates(ix), dtype=complex) * f.space.masses(ix)
            self.scalar = self.w
        elif f.is_array_valued:
            self.kind = "array"
            self.w = _weighted_stack(f, pts)
            flat = self.w.reshape(n, -1)
            if flat.shape[1] == 1:
                direction = np.ones(1, dtype=complex)
            else:
                direction = rng.standard_normal(flat.shape[1]) + 1j * rng.standard_normal(flat.shape[1])
            self.scalar = flat @ np.conj(direction)
        else:
            self.kind = "object"
            self.w = [f.value(s) * f.space.mass_of(s) for s in pts]
            self.scalar = np.array([norm_of(v, f.norm_kind) for v in self.w], dtype=complex)
        self._prepare()

    def _prepare(self):
        # real-valued copies so masked sums run as float matrix products
        if self.kind == "coord":
            self.mag = np.abs(self.w)
            self.mag2 = self.mag * self.mag
        elif self.kind == "array":
            flat = self.w.reshape(len(self.w), -1)
            self.flat_re = np.ascontiguousarray(flat.real)
            self.flat_im = np.ascontiguousarray(flat.imag)

    def tail(self, off: int) -> "_ProbeWindow":
        """The window with its first ``off`` points dropped."""
        out = _ProbeWindow.__new__(_ProbeWindow)
        out.f, out.kind = self.f, self.kind
        out.pts, out.w, out.scalar = self.pts[off:], self.w[off:], self.scalar[off:]
        for name in ("mag", "mag2", "flat_re", "flat_im"):
            if hasattr(self, name):
                setattr(out, name, getattr(self, name)[off:])
        return out

    def norm(self, mask: np.ndarray) -> float:
        kind = self.f.norm_kind
        if self.kind == "coord":
            if not mask.any():
                return 0.0
            if kind == "sup":
                return float((self.mag * mask).max())  # magnitudes are >= 0
            return float(np.sqrt(mask.astype(np.float64) @ self.mag2))
        if self.kind == "array":
            mf = mask.astype(np.float64)
            total = (mf @ self.flat_re) + 1j * (mf @ self.flat_im)
            return norm_of(total.reshape(self.f.zero.shape), kind)
        total = self.f.zero
        for v, keep in zip(self.w, mask):
            if keep:
                total = total + v
        return norm_of(total, kind)

    def families(self, rng: np.random.Generator, budget: int):
        n = len(self.pts)
        if n == 0:
            return
        yield "window", np.ones(n, dtype=bool)
        if self.f.space.integer_points:
            ix = _as_int_array(self.pts)
            yield "even", ix % 2 == 0
            yield "odd", ix % 2 != 0
        re, im = self.scalar.real, self.scalar.imag
        yield "re>0", re > 0
        yield "re<0", re < 0
        yield "im>0", im > 0
        yield "im<0", im < 0
        first = np.zeros(n, dtype=bool)
        first[0] = True
        yield "first", first
        peak = np.zeros(n, dtype=bool)
        peak[int(np.argmax(np.abs(self.scalar)))] = True
        yield "peak", peak
        for j in range(budget):
            if j % 2 == 0:  # fair coin per point
                yield f"random{j}", np.frombuffer(rng.bytes(n), dtype=np.uint8) < 128
            else:  # about eight points
                mask = np.zeros(n, dtype=bool)
                mask[rng.choice(n, size=min(n, int(rng.binomial(n, min(1.0, 8.0 / n)))), replace=False)] = True
                yield f"random{j}", mask

    def subset(self, mask: np.ndarray):
        if isinstance(self.pts, np.ndarray):
            return self.pts[mask]
        return tuple(s for s, keep in zip(self.pts, mask) if keep)


def _run_probes(window: _ProbeWindow, rng, budget):
    results = []
    worst = (-1.0, None, None)
    for label, mask in window.families(rng, budget):
        if not mask.any():
            continue
        nrm = window.norm(mask)
        results.append((label, int(mask.sum()), nrm))
        if nrm > worst[0]:
            worst = (nrm, label, mask)
    return results, worst


# ---------------------------------------------------------------------------
# the engine operations
# ---------------------------------------------------------------------------


def _ordered_oracles(f: VectorField):
    rank = {"finite-support": 0, "l1-norms": 1, "l2-orthogonal": 2}
    return sorted(f.oracles, key=lambda o: rank[o.kind])


def u_integrate(
    f: VectorField,
    eps: float,
    probe_budget: int = 16,
    seed: int = 0,
    cutoff: int = 10**6,
) -> UIntegralCertificate:
    """Unconditional integral of ``f`` over its space, with a certificate.

    With a tail oracle (or a finite space) the witness set comes from the
    oracle and the certificate is a proof (``exact`` for finite support).
    Otherwise the exhaustion ``L_K`` is tried for ``K = 10, 100, ...`` up to
    ``cutoff / 8``, probing structured and random subsets of the window
    ``(K, cutoff]``; the first ``K`` with no violation is accepted as
    evidence. When every candidate is violated, :class:`CauchyFailure` is
    raised with the violator found beyond the largest candidate.
    """
    if not eps >= 0:
        raise ValueError("eps must be nonnegative")
    rng = np.random.default_rng(seed)
    space = f.space

    oracles = _ordered_oracles(f)
    if not oracles and space.is_finite:
        oracles = [TailOracle("finite-support", support=space.points)]
    for oracle in oracles:
        w = oracle.witness(space, eps)
        if w is None:
            continue
        L0, bound = w
        exact = oracle.kind == "finite-support"
        value, trace = _integrate_with_trace(f, L0)
        width = GENERIC_PROBE_WINDOW if not (f.coordinates is not None or f.batch is not None) else PROBE_WINDOW
        pts = _complement_window(space, L0, width)
        probes: list = []
        if len(pts):
            window = _ProbeWindow(f, pts, rng)
            probes, (worst, label, mask) = _run_probes(window, rng, probe_budget)
            violated = worst > 0.0 if exact else worst >= eps
            if violated:
                raise CauchyFailure(window.subset(mask), worst, 0.0 if exact else eps, L0,
                                    f"{oracle.kind} oracle contradicted by probe {label!r}")
        return UIntegralCertificate(
            value=value,
            witness_set=L0,
            epsilon=0.0 if exact else float(eps),
            status="exact" if exact else "proof",
            policy=f"oracle:{oracle.kind}",
            trace=trace,
            probes=tuple(probes),
            bound=bound,
        )

    if space.is_finite:
        raise NoOracle("finite space with an unusable oracle")
    if eps == 0:
        raise ValueError("evidence certification needs eps > 0")
    candidates = []
    k = 10
    while 8 * k <= cutoff:
        candidates.append(k)
        k *= 10
    if not candidates:
        candidates = [max(1, cutoff // 8)]
    pts_all = space.points_at(range(candidates[0], cutoff))
    base = _ProbeWindow(f, pts_all, rng)
    last = None
    probes_by_k = {}
    for K in candidates:
        window = base.tail(K - candidates[0])
        results, (worst, label, mask) = _run_probes(window, rng, probe_budget)
        probes_by_k[K] = results
        if worst >= eps:
            last = (window.subset(mask), worst, space.exhaustion(K), label)
            continue
        ref = space.exhaustion(cutoff)
        value, trace = _integrate_with_trace(f, ref)
        return UIntegralCertificate(
            value=value,
            witness_set=space.exhaustion(K),
            epsilon=float(eps),
            status="evidence",
            policy=f"exhaustion-probes:cutoff={cutoff},budget={probe_budget},seed={seed}",
            trace=trace,
            probes=tuple(results),
            bound=worst,
        )
    D, worst, L0, label = last
    raise CauchyFailure(D, worst, eps, L0, f"probe {label!r} beyond L_{len(L0)} has norm {worst:.6g} >= {eps:.6g}")


def pseudo_bound(f: VectorField, sample: Sequence[LocalSet]) -> float:
    """``max_L ||int_L f||`` over the sampled local sets (a lower bound for the supremum)."""
    best = 0.0
    for L in sample:
        best = max(best, norm_of(integrate_over(f, L), f.norm_kind))
    return best


def _scalar_weighted(f: VectorField, pts) -> np.ndarray:
    if f.coordinates is not None or not f.is_array_valued or f.zero.size != 1 or f.zero.ndim > 1:
        raise NotScalar("field values are not scalars")
    return _weighted_stack(f, pts).reshape(len(pts))


def scalar_variation_bound(f: VectorField, sample: Sequence[LocalSet]) -> float:
    """``sup_L int_L |f|`` over the sample closed under sign splits.

    Each sampled ``L`` is split into the parts where the real part is
    ``>= 0``/``< 0`` and the imaginary part is ``>= 0``/``< 0``. The result
    never exceeds four times the pseudo bound over the same closure; a
    violation raises ``ArithmeticError``.
    """
    if f.coordinates is not None or not f.is_array_valued or f.zero.size != 1 or f.zero.ndim > 1:
        raise NotScalar("field values are not scalars")
    variation = 0.0
    pseudo = 0.0
    for L in sample:
        pts = f.space.check_local(L)
        w = _scalar_weighted(f, pts)
        variation = max(variation, float(np.sum(np.abs(w))))
        pseudo = max(pseudo, abs(complex(np.sum(w))))
        for mask in (w.real >= 0, w.real < 0, w.imag >= 0, w.imag < 0):
            pseudo = max(pseudo, abs(complex(np.sum(w[mask]))))
            variation = max(variation, float(np.sum(np.abs(w[mask]))))
    if variation > 4.0 * pseudo * (1 + 1e-12) + 1e-300:
        raise ArithmeticError(f"variation {variation!r} exceeds 4 x pseudo bound {pseudo!r}")
    return variation


def _vectorized(phi, pts) -> np.ndarray:
    try:
        out = np.asarray(phi(pts), dtype=complex)
        if out.shape == (len(pts),):
            return out
    except Exception:
        pass
    return np.array([phi(s) for s in pts], dtype=complex)


def indicator(B) -> Callable:
    """Characteristic function of the point set ``B``; accepts arrays."""
    members = B if isinstance(B, range) else frozenset(B)

    def phi(s):
        if isinstance(s, np.ndarray) and s.ndim == 1:
            if isinstance(members, range):
                r = members
                return ((s >= r.start) & (s < r.stop) & ((s - r.start) % r.step == 0)).astype(float)
            return np.isin(s, np.fromiter(members, dtype=np.int64)).astype(float)
        return 1.0 if s in members else 0.0

    return phi


def multiply_linf(f: VectorField, phi: Callable, bound: float | None) -> VectorField:
    """The field ``s -> phi(s) f(s)`` for a bounded scalar ``phi``.

    ``bound`` is the declared ``sup |phi|``. Tail oracles carry over with
    their bounds scaled by it.
    """
    if bound is None or not math.isfinite(bound) or bound < 0:
        raise UnboundedMultiplier(f"multiplier bound {bound!r} is not a finite nonnegative number")
    batch = coords = None
    if f.batch is not None:
        fb = f.batch

        def batch(ix):
            vals = np.asarray(fb(ix))
            return _vectorized(phi, ix).reshape((len(ix),) + (1,) * (vals.ndim - 1)) * vals

    if f.coordinates is not None:
        fc = f.coordinates

        def coords(ix):
            return _vectorized(phi, ix) * np.asarray(fc(ix))

    fv = f.value
    oracles = tuple(o.scaled(bound) for o in f.oracles)
    return VectorField(f.space, lambda s: fv(s) * phi(s), f.zero, f.norm_kind, batch, coords, oracles,
                       f"phi*{f.name}" if f.name else "")


def uniform_tail_set(f: VectorField, eps: float) -> TailWitness:
    """A local set ``L0`` with ``||int_D phi f|| <= eps ||phi||`` for all local D avoiding it.

    Requires a uniform oracle (finite support or summable norms); an
    ``l2-orthogonal`` oracle does not control arbitrary multipliers.
    """
    for oracle in _ordered_oracles(f):
        if not oracle.uniform:
            continue
        w = oracle.witness(f.space, eps)
        if w is not None:
            return TailWitness(w[0], w[1], oracle.kind)
    kinds = [o.kind for o in f.oracles]
    raise NoOracle(f"no uniform tail oracle reaches eps={eps!r} (available: {kinds or 'none'})")


def restrict(f: VectorField, L0: LocalSet) -> VectorField:
    """``f`` times the characteristic function of ``L0``; carries a finite-support oracle."""
    L0 = f.space.check_local(L0)
    chi = indicator(L0)
    g = multiply_linf(f.with_oracles(), chi, 1.0)
    return g.with_oracles(TailOracle("finite-support", support=L0))


def truncate_to_local(f: VectorField, eps: float) -> tuple[VectorField, float]:
    """A locally supported ``f0`` with ``||T_{f - f0}|| <= bound <= eps``."""
    tw = uniform_tail_set(f, eps)
    return restrict(f, tw.witness_set), tw.bound


def describe_set(L, limit: int = 32):
    """JSON-friendly description of a local set."""
    if isinstance(L, range):
        return {"range": [L.start, L.stop, L.step], "size": len(L)}
    items = list(L.tolist() if isinstance(L, np.ndarray) else L)
    items = [list(s) if isinstance(s, tuple) else (int(s) if isinstance(s, (int, np.integer)) else repr(s)) for s in items]
    if len(items) <= limit:
        return {"points": items, "size": len(items)}
    return {"size": len(items), "head": items[:8]}
