"""Graded matrix bundles over a finite abelian group.

Each fiber ``B_t`` is a subspace of ``M_d`` stored with a Frobenius-orthonormal
basis. Sections are arrays ``(|G|, d, d)``; the cross-sectional algebra is
realized by the regular representation ``Lambda(f)[t, s] = f(t - s)`` on
``l^2(G) (x) C^d``, which is faithful because G is finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BundleMismatch, FiberViolation, GradingViolation, NotHomomorphism, NotUnitary
from .groups import FiniteAbelianGroup, pairing
from .positive import PositiveTypeVerdict, check_positive_type
from .groups import OperatorField
from .ucond import UIntegralCertificate, finite_space, make_field, u_integrate

RESIDUAL_TOL = 1e-12


def _orthonormal_basis(mats, d: int, tol: float = 1e-12) -> np.ndarray:
    mats = np.asarray(mats, dtype=complex).reshape(-1, d * d)
    if mats.shape[0] == 0:
        return np.zeros((0, d, d), dtype=complex)
    u, s, vh = np.linalg.svd(mats, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return vh[:rank].reshape(rank, d, d)


@dataclass(frozen=True, eq=False)
class FellBundle:
    group: FiniteAbelianGroup
    ambient_dim: int
    fibers: tuple  # per element index: (k_t, d, d) orthonormal basis
    name: str = ""
    _proj: tuple = field(default=(), repr=False)

    @classmethod
    def from_spans(cls, group: FiniteAbelianGroup, ambient_dim: int, spans, name: str = "") -> "FellBundle":
        """``spans`` maps elements (or element indices) to lists of spanning matrices."""
        d = ambient_dim
        if isinstance(spans, dict):
            items = [spans.get(t, spans.get(i, [])) for i, t in enumerate(group.elements)]
        else:
            items = list(spans)
        if len(items) != group.order:
            raise ValueError("one span per group element required")
        fibers = tuple(_orthonormal_basis(m, d) for m in items)
        return cls(group, d, fibers, name)

    def __post_init__(self):
        d = self.ambient_dim
        proj = []
        for B in self.fibers:
            flat = B.reshape(B.shape[0], d * d)
            proj.append(flat.T @ flat.conj())  # orthogonal projector on vec(M_d)
        object.__setattr__(self, "_proj", tuple(proj))

    def same_as(self, other: "FellBundle") -> bool:
        if self is other:
            return True
        if self.group != other.group or self.ambient_dim != other.ambient_dim:
            return False
        return all(np.allclose(p, q, atol=1e-12) for p, q in zip(self._proj, other._proj))

    def fiber_dim(self, t) -> int:
        return self.fibers[self.group.index(t)].shape[0]

    @property
    def total_dim(self) -> int:
        return sum(B.shape[0] for B in self.fibers)

    def project(self, i: int, M: np.ndarray) -> np.ndarray:
        d = self.ambient_dim
        return (self._proj[i] @ np.asarray(M, dtype=complex).reshape(d * d)).reshape(d, d)

    def residual(self, i: int, M: np.ndarray) -> float:
        return float(np.linalg.norm(M - self.project(i, M)))

    def unit(self) -> np.ndarray | None:
        """The identity matrix when it lies in the unit fiber, else None."""
        eye = np.eye(self.ambient_dim)
        e = self.group.index(self.group.zero())
        return eye.astype(complex) if self.residual(e, eye) <= RESIDUAL_TOL else None

    def basis_sections(self) -> list["Section"]:
        out = []
        for i, B in enumerate(self.fibers):
            for M in B:
                vals = np.zeros((self.group.order, self.ambient_dim, self.ambient_dim), dtype=complex)
                vals[i] = M
                out.append(Section(self, vals, check=False))
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "group": list(self.group.factors),
            "ambient_dim": self.ambient_dim,
            "fibers": {
                ",".join(map(str, t)): [[[z.real, z.imag] for z in M.ravel()] for M in B]
                for t, B in zip(self.group.elements, self.fibers)
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "FellBundle":
        G = FiniteAbelianGroup(tuple(data["group"]))
        d = int(data["ambient_dim"])
        spans = {}
        for key, mats in data["fibers"].items():
            t = G.coerce(tuple(int(v) for v in str(key).split(",") if v != ""))
            spans[t] = [np.array([complex(a, b) for a, b in m]).reshape(d, d) for m in mats]
        return cls.from_spans(G, d, spans, data.get("name", ""))


@dataclass(frozen=True)
class BundleReport:
    product_residual: float
    involution_residual: float
    unit_fiber_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.product_residual, self.involution_residual, self.unit_fiber_residual)


def validate_bundle(b: FellBundle, tol: float = RESIDUAL_TOL) -> BundleReport:
    """Check ``B_s B_t in B_{s+t}``, ``B_t* = B_{-t}`` and that ``B_e`` is a *-subalgebra."""
    G = b.group
    e = G.index(G.zero())
    prod = inv = unit = 0.0
    for i in range(G.order):
        for j in range(G.order):
            k = G.add_table[i, j]
            for p, u in enumerate(b.fibers[i]):
                for q, v in enumerate(b.fibers[j]):
                    r = b.residual(k, u @ v)
                    if i == e and j == e:
                        unit = max(unit, r)
                    prod = max(prod, r)
                    if r > tol:
                        raise GradingViolation(
                            f"product of basis {p} of B_{G.elements[i]} and basis {q} of B_{G.elements[j]} "
                            f"leaves B_{G.elements[k]}",
                            where=(G.elements[i], G.elements[j], p, q), residual=r)
        for p, u in enumerate(b.fibers[i]):
            r = b.residual(G.neg_index[i], u.conj().T)
            if i == e:
                unit = max(unit, r)
            inv = max(inv, r)
            if r > tol:
                raise GradingViolation(
                    f"adjoint of basis {p} of B_{G.elements[i]} leaves B_{G.elements[G.neg_index[i]]}",
                    where=(G.elements[i], p), residual=r)
    return BundleReport(prod, inv, unit)


class Section:
    """A map ``t -> f(t) in B_t``."""

    __slots__ = ("bundle", "values")

    def __init__(self, bundle: FellBundle, values, check: bool = True):
        v = np.asarray(values, dtype=complex)
        G, d = bundle.group, bundle.ambient_dim
        if v.shape != (G.order, d, d):
            raise ValueError(f"section values must have shape {(G.order, d, d)}, got {v.shape}")
        self.bundle = bundle
        self.values = v
        if check:
            for i in range(G.order):
                r = bundle.residual(i, v[i])
                if r > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(v[i]))):
                    raise FiberViolation(f"value at {G.elements[i]} is off its fiber by {r:.3g}")

    def __call__(self, t) -> np.ndarray:
        return self.values[self.bundle.group.index(t)]

    @classmethod
    def zero(cls, bundle: FellBundle) -> "Section":
        d = bundle.ambient_dim
        return cls(bundle, np.zeros((bundle.group.order, d, d)), check=False)

    @classmethod
    def delta(cls, bundle: FellBundle, t, M) -> "Section":
        s = cls.zero(bundle)
        vals = s.values.copy()
        vals[bundle.group.index(t)] = M
        return cls(bundle, vals)

    def _same(self, other: "Section"):
        if not self.bundle.same_as(other.bundle):
            raise BundleMismatch("sections live on different bundles")

    def __add__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.bundle, self.values + other.values, check=False)

    def __sub__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.bundle, self.values - other.values, check=False)

    def __mul__(self, c) -> "Section":
        return Section(self.bundle, self.values * complex(c), check=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Section(bundle={self.bundle.name or '?'}, norm={np.linalg.norm(self.values):.4g})"


@dataclass(frozen=True)
class BundleMultiplier:
    """The multiplier ``F(t)`` determined by a coefficient in ``B_t``."""

    bundle: FellBundle
    anchor: tuple
    coefficient: np.ndarray

    def __post_init__(self):
        G = self.bundle.group
        object.__setattr__(self, "anchor", G.coerce(self.anchor))
        c = np.asarray(self.coefficient, dtype=complex)
        object.__setattr__(self, "coefficient", c)
        r = self.bundle.residual(G.index(self.anchor), c)
        if r > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(c))):
            raise FiberViolation(f"coefficient is off the fiber at {self.anchor} by {r:.3g}")


def _diff_index(G: FiniteAbelianGroup) -> np.ndarray:
    """``idx[t, s]`` is the index of ``t - s``."""
    return G.add_table[:, G.neg_index]


def convolve(f: Section, g: Section) -> Section:
    """``(f * g)(t) = sum_s f(s) g(t - s)``."""
    f._same(g)
    idx = _diff_index(f.bundle.group)
    vals = np.einsum("sij,tsjk->tik", f.values, g.values[idx]) * f.bundle.group.mass
    return Section(f.bundle, vals)


def involve(f: Section) -> Section:
    """``f*(t) = f(-t)^*``."""
    G = f.bundle.group
    return Section(f.bundle, f.values[G.neg_index].conj().transpose(0, 2, 1), check=False)


def regular_representation(f: Section) -> np.ndarray:
    G, d = f.bundle.group, f.bundle.ambient_dim
    n = G.order
    blocks = f.values[_diff_index(G)]  # (t, s, d, d)
    return blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def cstar_norm(f: Section) -> float:
    return float(np.linalg.norm(regular_representation(f), 2))


def multiplier_apply(m: BundleMultiplier, g: Section, side: str) -> Section:
    """Left: ``s -> c g(s - t)``; right: ``s -> g(s - t) c``."""
    if not m.bundle.same_as(g.bundle):
        raise BundleMismatch("multiplier and section live on different bundles")
    G = g.bundle.group
    t = G.index(m.anchor)
    shifted = g.values[G.add_table[:, G.neg_index[t]]]  # g(s - t)
    if side == "left":
        vals = np.einsum("ij,sjk->sik", m.coefficient, shifted)
    elif side == "right":
        vals = np.einsum("sij,jk->sik", shifted, m.coefficient)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return Section(g.bundle, vals)


def dual_action(x, f: Section) -> Section:
    """``alpha_x(f)(t) = (t, x) f(t)``."""
    G = f.bundle.group
    col = G.character_table[:, G.index(x)]
    return Section(f.bundle, f.values * col[:, None, None], check=False)


def point_multiplier(p: Section, t) -> BundleMultiplier:
    """``P(t)``: the multiplier with coefficient ``p(t)`` at anchor ``t``."""
    return BundleMultiplier(p.bundle, t, p(t))


def hat_equals_action_check(f: Section, x, probes: list[Section] | None = None) -> float:
    """``sum_s (s, x) F(s) g`` against ``alpha_x(f) * g`` (and the right-hand analogue)."""
    b = f.bundle
    G = b.group
    probes = b.basis_sections() if probes is None else probes
    ax = dual_action(x, f)
    mults = [BundleMultiplier(b, s, f(s)) for s in G.elements]
    chi = [pairing(G, s, x) for s in G.elements]
    worst = 0.0
    for g in probes:
        for side in ("left", "right"):
            acc = np.zeros_like(g.values)
            for c, m in zip(chi, mults):
                acc = acc + c * multiplier_apply(m, g, side).values * G.mass
            direct = convolve(ax, g) if side == "left" else convolve(g, ax)
            worst = max(worst, float(np.max(np.abs(acc - direct.values), initial=0.0)))
    return worst


def multiplier_operator(p: Section, t) -> np.ndarray:
    """``P(t)`` acting on the regular representation: ``Lambda(delta_t p(t))``."""
    return regular_representation(Section.delta(p.bundle, t, p(t)))


def section_positive_type_check(f: Section) -> PositiveTypeVerdict:
    """Positive-type test of ``t -> P(t)`` for ``p = f* * f``."""
    p = convolve(involve(f), f)
    G = p.bundle.group
    ops = np.stack([multiplier_operator(p, t) for t in G.elements])
    return check_positive_type(OperatorField(G, ops))


def fourier_collapse(p: Section, t) -> tuple[Section, float]:
    """``(1/|G|) sum_x conj((t, x)) alpha_x(p)`` and its distance to ``delta_t p(t)``."""
    G = p.bundle.group
    acc = np.zeros_like(p.values)
    for x in G.elements:
        acc = acc + np.conj(pairing(G, t, x)) * dual_action(x, p).values * G.dual_mass
    target = np.zeros_like(p.values)
    target[G.index(t)] = p(t)
    return Section(p.bundle, acc, check=False), float(np.max(np.abs(acc - target), initial=0.0))


@dataclass(frozen=True)
class MainTheoremResult:
    lhs_left: np.ndarray
    lhs_right: np.ndarray
    rhs_left: np.ndarray
    rhs_right: np.ndarray
    abs_err: float
    collapse_err: float
    certificates: tuple[UIntegralCertificate, UIntegralCertificate]


def main_theorem_check(f: Section, a: Section, t) -> MainTheoremResult:
    """Integrate ``x -> conj((t,x)) a alpha_x(p)`` and ``x -> conj((t,x)) alpha_x(p) a`` over the dual.

    With ``p = f* * f`` the two integrals equal ``a P(t)`` and ``P(t) a``.
    Integrands are whole sections, measured in the Frobenius norm.
    """
    f._same(a)
    b = f.bundle
    G = b.group
    t = G.coerce(t)
    p = convolve(involve(f), f)
    space = finite_space(G.elements, mass=G.dual_mass)
    shape = p.values.shape

    def integrand(order):
        def value(x):
            ax = dual_action(x, p)
            prod = convolve(a, ax) if order == "left" else convolve(ax, a)
            return np.conj(pairing(G, t, x)) * prod.values

        return make_field(space, value, shape=shape, norm_kind="frobenius")

    cert_l = u_integrate(integrand("left"), 0.0)
    cert_r = u_integrate(integrand("right"), 0.0)
    Pt = point_multiplier(p, t)
    rhs_l = multiplier_apply(Pt, a, "right").values  # a P(t)
    rhs_r = multiplier_apply(Pt, a, "left").values  # P(t) a
    err = max(float(np.max(np.abs(cert_l.value - rhs_l))), float(np.max(np.abs(cert_r.value - rhs_r))))
    _, collapse = fourier_collapse(p, t)
    return MainTheoremResult(cert_l.value, cert_r.value, rhs_l, rhs_r, err, collapse, (cert_l, cert_r))


def random_section(b: FellBundle, rng: np.random.Generator) -> Section:
    G, d = b.group, b.ambient_dim
    vals = np.zeros((G.order, d, d), dtype=complex)
    for i, B in enumerate(b.fibers):
        k = B.shape[0]
        if k:
            c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            vals[i] = np.tensordot(c, B, axes=1)
    return Section(b, vals, check=False)


# ---------------------------------------------------------------------------
# constructions and fixtures
# ---------------------------------------------------------------------------


def _matrix_units(k: int, which: str) -> list[np.ndarray]:
    units = []
    for i in range(k):
        for j in range(k):
            if which == "full" or i == j:
                E = np.zeros((k, k), dtype=complex)
                E[i, j] = 1
                units.append(E)
    return units


def build_semidirect_bundle(G: FiniteAbelianGroup, action, algebra="full", name: str = "") -> FellBundle:
    """The semidirect product bundle of ``A`` by ``tau_t = Ad(U_t)``.

    ``action`` is an array ``(|G|, k, k)`` of unitaries or a callable on
    elements; ``algebra`` is ``"full"`` (``M_k``), ``"diagonal"`` or a list of
    matrices spanning a ``tau``-invariant *-subalgebra. The fiber over ``t``
    is ``{lambda_t (x) a U_t : a in A}`` inside ``M_{k|G|}``, where
    ``lambda`` is the left regular representation of G.
    """
    if callable(action):
        U = np.stack([np.atleast_2d(np.asarray(action(t), dtype=complex)) for t in G.elements])
    else:
        U = np.asarray(action, dtype=complex)
    n, k = G.order, U.shape[1]
    if U.shape != (n, k, k):
        raise ValueError(f"action must give {n} matrices of size {k}x{k}")
    eye = np.eye(k)
    for i, u in enumerate(U):
        r = float(np.max(np.abs(u.conj().T @ u - eye)))
        if r > 1e-10:
            raise NotUnitary(f"action at {G.elements[i]} is not unitary (residual {r:.3g})")
    prods = np.einsum("sij,tjk->stik", U, U)
    r = float(np.max(np.abs(prods - U[G.add_table])))
    if r > 1e-10:
        raise NotHomomorphism(f"action is not a homomorphism (residual {r:.3g})")
    A = _matrix_units(k, algebra) if isinstance(algebra, str) else [np.asarray(m, dtype=complex) for m in algebra]
    lam = np.zeros((n, n, n))
    for i in range(n):
        for s in range(n):
            lam[i, G.add_table[i, s], s] = 1.0
    spans = [[np.kron(lam[i], a @ U[i]) for a in A] for i in range(n)]
    return FellBundle.from_spans(G, k * n, spans, name)


def m2z2_bundle() -> FellBundle:
    G = FiniteAbelianGroup((2,))
    E = _matrix_units(2, "full")  # E11, E12, E21, E22
    return FellBundle.from_spans(G, 2, {(0,): [E[0], E[3]], (1,): [E[1], E[2]]}, "m2z2")


def z3_shift_bundle() -> FellBundle:
    G = FiniteAbelianGroup((3,))
    S = np.roll(np.eye(3), 1, axis=0)
    U = np.stack([np.linalg.matrix_power(S, i) for i in range(3)])
    return build_semidirect_bundle(G, U, "diagonal", "z3-shift")


BUILTIN_BUNDLES = {"m2z2": m2z2_bundle, "z3-shift": z3_shift_bundle}

FIXTURE_SCHEMA = {
    "type": "object",
    "required": ["group", "ambient_dim", "fibers"],
    "properties": {
        "name": {"type": "string"},
        "group": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "ambient_dim": {"type": "integer", "minimum": 1},
        "fibers": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                                     "minItems": 2, "maxItems": 2}},
            },
        },
    },
}


def load_bundle_file(path: str | Path) -> FellBundle:
    """Load, schema-check and validate a bundle fixture file."""
    import jsonschema

    data = json.loads(Path(path).read_text())
    jsonschema.validate(data, FIXTURE_SCHEMA)
    b = FellBundle.from_json(data)
    if not b.name:
        b = FellBundle(b.group, b.ambient_dim, b.fibers, Path(path).stem)
    validate_bundle(b)
    return b


def get_bundle(name: str, fixture_dir: str | Path | None = None) -> FellBundle:
    if name in BUILTIN_BUNDLES:
        return BUILTIN_BUNDLES[name]()
    if fixture_dir is not None:
        path = Path(fixture_dir) / f"{name}.json"
        if path.exists():
            return load_bundle_file(path)
    raise KeyError(f"unknown bundle fixture {name!r}")
