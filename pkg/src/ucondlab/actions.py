"""Integrability of elements under a group action, in two worlds.

``finite``
    A finite abelian group acting on ``M_D`` by ``alpha_x(b) = U_x b U_x*``,
    Haar mass ``1/|G|`` per group point (the group plays the dual role).
``zshift``
    The integers acting on finitely supported bi-infinite matrices by
    conjugation with powers of the bilateral shift,
    ``alpha_n(E_ij) = E_{i+n, j+n}``, counting measure. The Fourier
    transform of ``b`` at ``t`` is the twisted Laurent operator with entries
    ``exp(-i j t) gamma_m`` on the diagonal ``(j, j - m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .bundles import FellBundle
from .errors import NotDominated, NotPositive, WorldMismatch
from .groups import FiniteAbelianGroup, pairing
from .ucond import (
    LocalIntegrationSpace,
    TailOracle,
    UIntegralCertificate,
    VectorField,
    finite_space,
    integers,
    make_field,
    norm_of,
    u_integrate,
)

PSD_TOL = 1e-12


def unit_power(t: float, j: int) -> complex:
    """``exp(i j t)`` as an integer power of ``exp(i t)``, so phases of nearby ``j`` stay consistent."""
    w = complex(math.cos(t), math.sin(t))
    if j < 0:
        w, j = w.conjugate(), -j
    out = 1.0 + 0.0j
    while j:
        if j & 1:
            out *= w
        w *= w
        j >>= 1
    return out


# ---------------------------------------------------------------------------
# sparse bi-infinite matrices
# ---------------------------------------------------------------------------


class SparseZOperator:
    """A finitely supported matrix indexed by ``Z x Z``."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        ent = {}
        for (i, j), v in (entries or {}).items():
            v = complex(v)
            if v != 0:
                ent[(int(i), int(j))] = v
        self.entries = ent

    @classmethod
    def unit(cls, i: int, j: int, c: complex = 1.0) -> "SparseZOperator":
        return cls({(i, j): c})

    @classmethod
    def identity_window(cls, radius: int) -> "SparseZOperator":
        return cls({(j, j): 1.0 for j in range(-radius, radius + 1)})

    @classmethod
    def from_dense(cls, M, rows, cols) -> "SparseZOperator":
        M = np.asarray(M)
        return cls({(r, c): M[a, b] for a, r in enumerate(rows) for b, c in enumerate(cols) if M[a, b] != 0})

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, SparseZOperator):
            return NotImplemented
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SparseZOperator(out)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if not isinstance(other, SparseZOperator):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (SparseZOperator, np.ndarray)):
            return NotImplemented
        c = complex(c)
        return SparseZOperator({k: v * c for k, v in self.entries.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, SparseZOperator):
            return NotImplemented
        by_row: dict[int, list] = {}
        for (l, k), v in other.entries.items():
            by_row.setdefault(l, []).append((k, v))
        out: dict = {}
        for (i, l), u in self.entries.items():
            for k, v in by_row.get(l, ()):
                out[(i, k)] = out.get((i, k), 0) + u * v
        return SparseZOperator(out)

    def adjoint(self) -> "SparseZOperator":
        return SparseZOperator({(j, i): v.conjugate() for (i, j), v in self.entries.items()})

    def shift(self, n: int) -> "SparseZOperator":
        return SparseZOperator({(i + n, j + n): v for (i, j), v in self.entries.items()})

    # -- inspection -------------------------------------------------------
    def __getitem__(self, key) -> complex:
        return self.entries.get((int(key[0]), int(key[1])), 0j)

    @property
    def rows(self) -> list[int]:
        return sorted({i for i, _ in self.entries})

    @property
    def cols(self) -> list[int]:
        return sorted({j for _, j in self.entries})

    @property
    def radius(self) -> int:
        return max((max(abs(i), abs(j)) for i, j in self.entries), default=0)

    def is_zero(self) -> bool:
        return not self.entries

    def to_dense(self, rows=None, cols=None) -> np.ndarray:
        rows = self.rows if rows is None else list(rows)
        cols = self.cols if cols is None else list(cols)
        ri = {r: a for a, r in enumerate(rows)}
        ci = {c: b for b, c in enumerate(cols)}
        M = np.zeros((len(rows), len(cols)), dtype=complex)
        for (i, j), v in self.entries.items():
            if i in ri and j in ci:
                M[ri[i], ci[j]] = v
        return M

    def hermitian_block(self) -> tuple[np.ndarray, list[int]]:
        idx = sorted(set(self.rows) | set(self.cols))
        return self.to_dense(idx, idx), idx

    def norm(self, kind: str = "operator") -> float:
        if not self.entries:
            return 0.0
        vals = np.fromiter(self.entries.values(), dtype=complex)
        if kind == "sup":
            return float(np.abs(vals).max())
        if kind in ("frobenius", "euclidean"):
            return float(np.linalg.norm(vals))
        if kind == "operator":
            return float(np.linalg.norm(self.to_dense(), 2))
        raise ValueError(f"unknown norm kind {kind!r}")

    def trace(self) -> complex:
        return complex(sum(v for (i, j), v in self.entries.items() if i == j))

    def allclose(self, other: "SparseZOperator", atol: float = 1e-12) -> bool:
        return (self - other).norm("sup") <= atol

    def to_json(self) -> list:
        return [[i, j, v.real, v.imag] for (i, j), v in sorted(self.entries.items())]

    @classmethod
    def from_json(cls, data) -> "SparseZOperator":
        return cls({(int(i), int(j)): complex(re, im) for i, j, re, im in data})

    def __repr__(self) -> str:
        return f"SparseZOperator({len(self.entries)} entries)"


@dataclass(frozen=True)
class TwistedLaurentOperator:
    """The bi-infinite matrix with entry ``exp(-i j t) gamma_m`` at ``(j, j - m)``."""

    t: float
    coeffs: dict

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {int(m): complex(g) for m, g in self.coeffs.items() if g != 0})

    def entry(self, j: int, k: int) -> complex:
        g = self.coeffs.get(j - k)
        return 0j if g is None else unit_power(self.t, -j) * g

    def window(self, N: int) -> np.ndarray:
        idx = range(-N, N + 1)
        return np.array([[self.entry(j, k) for k in idx] for j in idx], dtype=complex)

    def left_mul(self, a: SparseZOperator) -> SparseZOperator:
        """``b^(t) a``."""
        out: dict = {}
        for (l, k), v in a.entries.items():
            for m, g in self.coeffs.items():
                j = l + m
                out[(j, k)] = out.get((j, k), 0) + unit_power(self.t, -j) * g * v
        return SparseZOperator(out)

    def right_mul(self, a: SparseZOperator) -> SparseZOperator:
        """``a b^(t)``."""
        out: dict = {}
        for (j, l), v in a.entries.items():
            ph = unit_power(self.t, -l)
            for m, g in self.coeffs.items():
                k = l - m
                out[(j, k)] = out.get((j, k), 0) + v * ph * g
        return SparseZOperator(out)

    def wiener_bound(self) -> float:
        """``sum_m |gamma_m|``, an upper bound on the operator norm."""
        return float(sum(abs(g) for g in self.coeffs.values()))

    def is_toeplitz_form(self) -> bool:
        return self.t % (2 * math.pi) == 0

    def to_json(self) -> dict:
        return {"t": self.t, "coeffs": [[m, g.real, g.imag] for m, g in sorted(self.coeffs.items())]}

    @classmethod
    def from_json(cls, data) -> "TwistedLaurentOperator":
        return cls(float(data["t"]), {int(m): complex(re, im) for m, re, im in data["coeffs"]})


@dataclass(frozen=True)
class MultiplierPair:
    """A multiplier observed by its left and right actions on algebra elements.

    ``left(a) = m a`` and ``right(a) = a m``; ``element`` holds the concrete
    object when one exists (a matrix, or a twisted Laurent operator).
    """

    left_action: Callable[[Any], Any]
    right_action: Callable[[Any], Any]
    element: Any = None
    certificate: UIntegralCertificate | None = None

    def compatibility_residual(self, a, b) -> float:
        """``||a L(b) - R(a) b||``, zero for a genuine multiplier."""
        return norm_of(a @ self.left_action(b) - self.right_action(a) @ b, "sup")


# ---------------------------------------------------------------------------
# action systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ActionSystem:
    world: str
    group: FiniteAbelianGroup | None = None
    unitaries: np.ndarray | None = None  # (|G|, D, D), indexed by group elements
    name: str = ""

    def __post_init__(self):
        if self.world not in ("finite", "zshift"):
            raise ValueError(f"unknown world {self.world!r}")
        if self.world == "finite":
            U = np.asarray(self.unitaries, dtype=complex)
            if self.group is None or U.ndim != 3 or U.shape[0] != self.group.order:
                raise ValueError("finite world needs one unitary per group element")
            object.__setattr__(self, "unitaries", U)

    @classmethod
    def zshift(cls) -> "ActionSystem":
        return cls("zshift", name="zshift")

    @classmethod
    def from_bundle(cls, bundle: FellBundle) -> "ActionSystem":
        """The dual action seen through the regular representation: ``U_x = sum_t (t, x) e_tt (x) I``."""
        G, d = bundle.group, bundle.ambient_dim
        U = np.stack([np.kron(np.diag(G.character_table[:, i]), np.eye(d)) for i in range(G.order)])
        return cls("finite", G, U, f"dual action on {bundle.name or 'bundle'}")

    @classmethod
    def random_finite(cls, G: FiniteAbelianGroup, D: int, rng: np.random.Generator) -> "ActionSystem":
        """``U_x = Q diag((w_i, x)) Q*`` for random labels ``w_i`` and a random unitary Q."""
        from .positive import random_unitary

        Q = random_unitary(D, rng)
        labels = rng.integers(0, G.order, size=D)
        U = np.stack([Q @ np.diag(G.character_table[labels, i]) @ Q.conj().T for i in range(G.order)])
        return cls("finite", G, U, f"random action of Z({G}) on M_{D}")

    @property
    def dim(self) -> int | None:
        return None if self.world == "zshift" else self.unitaries.shape[1]

    @property
    def space(self) -> LocalIntegrationSpace:
        if self.world == "finite":
            return finite_space(self.group.elements, mass=self.group.dual_mass)
        return integers(mass=1.0)

    def pair(self, t, x) -> complex:
        """``(t, x)``: the group pairing, or ``exp(i n t)`` in the shift world."""
        if self.world == "finite":
            return pairing(self.group, t, x)
        return unit_power(float(t), int(x))

    def points(self):
        return self.group.elements if self.world == "finite" else None

    def neg(self, x):
        return self.group.neg(x) if self.world == "finite" else -int(x)

    def add(self, x, y):
        return self.group.add(x, y) if self.world == "finite" else int(x) + int(y)

    def zero_element(self):
        return np.zeros((self.dim, self.dim), dtype=complex) if self.world == "finite" else SparseZOperator()

    def check_element(self, b):
        if self.world == "finite":
            if not isinstance(b, np.ndarray) or b.shape != (self.dim, self.dim):
                raise WorldMismatch(f"finite world expects {self.dim}x{self.dim} arrays, got {type(b).__name__}")
        elif not isinstance(b, SparseZOperator):
            raise WorldMismatch(f"shift world expects SparseZOperator, got {type(b).__name__}")

    def action_residual(self) -> float:
        """Unitarity and homomorphism residual of ``x -> U_x`` (zero in the shift world)."""
        if self.world == "zshift":
            return 0.0
        U, G = self.unitaries, self.group
        eye = np.eye(self.dim)
        uni = max(float(np.max(np.abs(u.conj().T @ u - eye))) for u in U)
        hom = float(np.max(np.abs(np.einsum("xij,yjk->xyik", U, U) - U[G.add_table])))
        return max(uni, hom)


def alpha_apply(sys: ActionSystem, x, b):
    sys.check_element(b)
    if sys.world == "finite":
        U = sys.unitaries[sys.group.index(x)]
        return U @ b @ U.conj().T
    if not isinstance(x, (int, np.integer)):
        raise WorldMismatch("shift world acts by integers")
    return b.shift(int(x))


def integrand_support(sys: ActionSystem, b, a, side: str):
    """Points where ``alpha_x(b) a`` (side ``"right"``) or ``a alpha_x(b)`` (``"left"``) can be nonzero."""
    if sys.world == "finite":
        return sys.group.elements
    if side == "right":
        cand = {r - c for r in a.rows for c in b.cols}
    else:
        cand = {c - r for c in a.cols for r in b.rows}
    return tuple(sorted(cand, key=sys.space.position))


def _product(sys, b, a, side):
    return b @ a if side == "right" else a @ b


def alpha_field(sys: ActionSystem, b, a, side: str, phi: Callable | None = None) -> VectorField:
    """The field ``x -> phi(x) alpha_x(b) a`` (side ``"right"``) or ``x -> phi(x) a alpha_x(b)``."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sys.check_element(b)
    sys.check_element(a)

    def value(x):
        v = _product(sys, alpha_apply(sys, x, b), a, side)
        return v if phi is None else v * phi(x)

    if sys.world == "finite":
        return make_field(sys.space, value, shape=(sys.dim, sys.dim), norm_kind="operator")
    supp = integrand_support(sys, b, a, side)
    return VectorField(sys.space, value, SparseZOperator(), "operator",
                       oracles=(TailOracle("finite-support", support=supp),))


def alpha_integral(sys: ActionSystem, b, a, side: str = "right", phi: Callable | None = None, eps: float = 0.0):
    """Unconditional integral of ``alpha_x(b) a`` (or ``a alpha_x(b)``) over the acting group.

    Returns ``(value, certificate)``; finitely supported integrands give
    exact certificates.
    """
    cert = u_integrate(alpha_field(sys, b, a, side, phi), eps)
    return cert.value, cert


def fourier_of_element(sys: ActionSystem, b, t) -> MultiplierPair:
    """``b^(t) = integral of conj((t, x)) alpha_x(b)`` as a multiplier."""
    sys.check_element(b)
    if sys.world == "finite":
        eye = np.eye(sys.dim, dtype=complex)
        t = sys.group.coerce(t)
        phi = lambda x: np.conj(pairing(sys.group, t, x))  # noqa: E731
        M, cert = alpha_integral(sys, b, eye, "right", phi)
        return MultiplierPair(lambda a: M @ a, lambda a: a @ M, M, cert)
    t = float(t)
    coeffs: dict = {}
    for (r, c), v in b.entries.items():
        m = r - c
        coeffs[m] = coeffs.get(m, 0) + unit_power(t, r) * v
    op = TwistedLaurentOperator(t, coeffs)
    return MultiplierPair(op.left_mul, op.right_mul, op)


def spectral_subspace_check(sys: ActionSystem, m, t, probes=None, window: int = 20, shifts: int = 5) -> float:
    """How far ``alpha_x(m)`` is from ``(t, x) m``.

    Finite world: ``alpha_x(m) a = alpha_x(m alpha_{-x}(a))`` against
    ``(t, x) m a`` on probe elements (the identity and three seeded random
    elements by default). Shift world:
    the entry identity ``m[j - n, k - n] = exp(i n t) m[j, k]`` on the window
    ``[-window, window]^2`` for ``|n| <= shifts``.
    """
    if isinstance(m, MultiplierPair) and m.element is not None:
        m = m.element
    if sys.world == "zshift":
        if not isinstance(m, TwistedLaurentOperator):
            raise WorldMismatch("shift world spectral check needs a TwistedLaurentOperator")
        worst = 0.0
        idx = range(-window, window + 1)
        for n in range(-shifts, shifts + 1):
            ph = unit_power(float(t), n)
            for j in idx:
                for k in idx:
                    worst = max(worst, abs(m.entry(j - n, k - n) - ph * m.entry(j, k)))
        return worst
    left = m.left_action if isinstance(m, MultiplierPair) else (lambda a: m @ a)
    D = sys.dim
    if probes is None:
        # the identity alone pins down an element; random probes also exercise the action on a
        rng = np.random.default_rng(0)
        P = np.concatenate([np.eye(D, dtype=complex)[None],
                            rng.standard_normal((3, D, D)) + 1j * rng.standard_normal((3, D, D))])
    else:
        P = np.stack([np.asarray(a, dtype=complex) for a in probes])
    base = left(P)
    worst = 0.0
    for x in sys.group.elements:
        U = sys.unitaries[sys.group.index(x)]
        Uh = U.conj().T
        lhs = U @ left(Uh @ P @ U) @ Uh  # alpha_x(m alpha_{-x}(a))
        worst = max(worst, float(np.max(np.abs(lhs - sys.pair(t, x) * base))))
    return worst


def weak_integral_check(sys: ActionSystem, b, functionals) -> float:
    """``sum_x g(a alpha_x(b)) mass`` against ``g(a b0)`` with ``a b0`` the integral.

    ``functionals`` is a list of pairs ``(g, a)``: a linear functional ``g``
    and the element ``a`` it is factored through.
    """
    worst = 0.0
    space = sys.space
    for g, a in functionals:
        ab0, _ = alpha_integral(sys, b, a, "left")
        rhs = complex(g(ab0))
        if sys.world == "finite":
            pts = sys.group.elements
        else:
            R = (a.radius + b.radius) if not (a.is_zero() or b.is_zero()) else 0
            pts = range(-2 * R - 1, 2 * R + 2)
        lhs = sum(complex(g(a @ alpha_apply(sys, x, b))) * space.mass_of(x) for x in pts)
        worst = max(worst, abs(lhs - rhs))
    return worst


def _integral_over(sys, L, fn):
    L = sys.space.check_local(L)
    total = sys.zero_element()
    for x in L:
        total = total + fn(x) * sys.space.mass_of(x)
    return total


def _identity_like(sys, m, support_of):
    if m is not None:
        return m
    if sys.world == "finite":
        return np.eye(sys.dim, dtype=complex)
    idx = sorted(set(support_of.rows) | set(support_of.cols))
    return SparseZOperator({(j, j): 1.0 for j in idx})


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs_sqrt_form: float
    ok: bool
    rhs_product_form: float
    product_form_ok: bool


def main_inequality_check(sys: ActionSystem, a, b, m, n, L, tol: float = 1e-10) -> InequalityResult:
    """``||int_L m* alpha_x(a* b) n||`` against the square roots of the two diagonal integrals.

    ``m`` or ``n`` may be None for the identity. In the shift world the
    identity is replaced by the projection onto the support of ``a`` or
    ``b``, which acts identically on the integrands.
    """
    sys.check_element(a)
    sys.check_element(b)
    adj = (lambda z: z.conj().T) if sys.world == "finite" else (lambda z: z.adjoint())
    ab, aa, bb = adj(a) @ b, adj(a) @ a, adj(b) @ b
    if sys.world == "zshift":
        L = sys.space.check_local(L)
        pm = SparseZOperator({(j + x, j + x): 1.0 for x in L for j in sorted(set(a.rows) | set(a.cols))})
        pn = SparseZOperator({(j + x, j + x): 1.0 for x in L for j in sorted(set(b.rows) | set(b.cols))})
        m = pm if m is None else m
        n = pn if n is None else n
    else:
        m = _identity_like(sys, m, a)
        n = _identity_like(sys, n, b)
    lhs = norm_of(_integral_over(sys, L, lambda x: adj(m) @ alpha_apply(sys, x, ab) @ n), "operator")
    A = norm_of(_integral_over(sys, L, lambda x: adj(m) @ alpha_apply(sys, x, aa) @ m), "operator")
    B = norm_of(_integral_over(sys, L, lambda x: adj(n) @ alpha_apply(sys, x, bb) @ n), "operator")
    rhs = math.sqrt(A) * math.sqrt(B)
    return InequalityResult(lhs, rhs, lhs <= rhs + tol, A * B, lhs <= A * B + tol)


# ---------------------------------------------------------------------------
# hereditary cone
# ---------------------------------------------------------------------------


def _min_eig(sys, x) -> tuple[float, float]:
    if sys.world == "finite":
        H = np.asarray(x)
    else:
        H, _ = x.hermitian_block()
    if H.size == 0:
        return 0.0, 0.0
    asym = float(np.max(np.abs(H - H.conj().T)))
    lam = np.linalg.eigvalsh((H + H.conj().T) / 2)
    return float(lam[0]) - asym, float(np.abs(lam).max())


def _require_psd(sys, x, what: str, err):
    lam, scale = _min_eig(sys, x)
    if lam < -PSD_TOL * max(1.0, scale):
        raise err(f"{what} has eigenvalue {lam:.3g}")


@dataclass(frozen=True)
class ConeStep:
    size: int
    lhs: float
    via_h: float
    via_k: float
    eps_k: float
    eps_h: float
    measured_h: float
    dominated: bool
    within_factor_2: bool


@dataclass(frozen=True)
class ConeReport:
    steps: tuple
    sup_bound: float
    sup_bound_kind: str
    k_certificate: UIntegralCertificate
    h_certificate: UIntegralCertificate
    ok: bool


def _dense_stack(sys, vals) -> np.ndarray:
    """Stack values as dense arrays on a common index window (shift world) or as they are."""
    if sys.world == "finite":
        return np.stack(vals) if vals else np.zeros((0, sys.dim, sys.dim), dtype=complex)
    idx = sorted({i for v in vals for key in v.entries for i in key})
    return np.stack([v.to_dense(idx, idx) for v in vals]) if vals else np.zeros((0, 0, 0), dtype=complex)


def _points_of(sys, h, k, c):
    if sys.world == "finite":
        return tuple(sys.group.elements)
    pts = set(integrand_support(sys, k, c, "right")) | set(integrand_support(sys, h, c, "right"))
    pts |= {r - q for r in c.rows for q in k.rows}
    return tuple(sorted(pts, key=sys.space.position))


def hereditary_cone_check(sys: ActionSystem, h, k, c, exhaustion=None, eps: float | None = None,
                          seed: int = 0, probes: int = 8, singletons: int = 4) -> ConeReport:
    """Derive an integrability certificate for ``h`` from a dominating ``k``.

    For a local set L the domination chain is
    ``||int_L alpha(h) c|| <= ||int_L alpha(h)||^1/2 ||int_L c* alpha(h) c||^1/2
    <= ||int_L alpha(k)||^1/2 ||int_L c* alpha(k) c||^1/2``.
    Beyond an exhaustion step ``L_j`` the tail of ``alpha(h) c`` is then
    bounded by ``eps_h = sqrt(M eps_k)`` where ``M`` bounds every
    ``||int_D alpha(k)||`` and ``eps_k`` is the full tail of the positive
    integrand ``c* alpha(k) c``. Each step also measures the actual tail of
    ``alpha(h) c`` on the whole complement, on singletons and on random
    subsets of it.
    """
    for z in (h, k, c):
        sys.check_element(z)
    _require_psd(sys, h, "h", NotPositive)
    _require_psd(sys, k, "k", NotPositive)
    _require_psd(sys, k - h, "k - h", NotDominated)
    adj = (lambda z: z.conj().T) if sys.world == "finite" else (lambda z: z.adjoint())
    space = sys.space
    pts = _points_of(sys, h, k, c)
    if exhaustion is None:
        exhaustion = [pts[:j] for j in range(len(pts) + 1)]

    if sys.world == "finite":
        total_k = sum(alpha_apply(sys, x, k) for x in pts) * sys.group.dual_mass
        M, kind = norm_of(total_k, "operator"), "exact"
    else:
        M, kind = fourier_of_element(sys, k, 0.0).element.wiener_bound(), "wiener"

    mass = {x: space.mass_of(x) for x in pts}
    terms = {
        "hc": [alpha_apply(sys, x, h) @ c * mass[x] for x in pts],
        "ck": [adj(c) @ alpha_apply(sys, x, k) @ c * mass[x] for x in pts],
        "kk": [alpha_apply(sys, x, k) * mass[x] for x in pts],
        "ch": [adj(c) @ alpha_apply(sys, x, h) @ c * mass[x] for x in pts],
        "hh": [alpha_apply(sys, x, h) * mass[x] for x in pts],
    }
    stacks = {name: _dense_stack(sys, vals) for name, vals in terms.items()}
    pos = {x: i for i, x in enumerate(pts)}

    def tnorm(name, L):
        ix = [pos[x] for x in L]
        if not ix:
            return 0.0
        return float(np.linalg.norm(stacks[name][ix].sum(axis=0), 2))

    rng = np.random.default_rng(seed)
    steps = []
    derived = []
    for L in exhaustion:
        L = tuple(space.check_local(L))
        Ls = set(L)
        rest = [x for x in pts if x not in Ls]
        lhs = tnorm("hc", L)
        via_h = math.sqrt(tnorm("hh", L) * tnorm("ch", L))
        via_k = math.sqrt(tnorm("kk", L) * tnorm("ck", L))
        eps_k = tnorm("ck", rest)
        eps_h = math.sqrt(M * eps_k)
        subsets = [rest] + [[x] for x in rest[:singletons]]
        for _ in range(probes if rest else 0):
            subsets.append([x for x in rest if rng.random() < 0.5])
        measured = max((tnorm("hc", D) for D in subsets), default=0.0)
        slack = 1e-10 * max(1.0, via_k)
        dominated = lhs <= via_h + slack and via_h <= via_k + slack
        within = measured <= 2 * eps_h + 1e-12
        steps.append(ConeStep(len(L), lhs, via_h, via_k, eps_k, eps_h, measured, dominated, within))
        derived.append((L, eps_h, eps_k))

    _, k_cert = alpha_integral(sys, k, c, "right")
    h_value = sum(terms["hc"][1:], terms["hc"][0]) if pts else sys.zero_element()
    chosen = derived[-1]
    if eps is not None:
        chosen = next((d for d in derived if d[1] <= eps), derived[-1])
    L0, eps_h, eps_k = chosen
    k_bound = math.sqrt(M * eps_k)
    k_derived = UIntegralCertificate(k_cert.value, L0, k_bound, "proof", "derived from positive tail of c* alpha(k) c",
                                     k_cert.trace, k_cert.probes, k_bound)
    h_cert = UIntegralCertificate(h_value, L0, eps_h, "proof", "dominated by k: sqrt(M * tail of c* alpha(k) c)",
                                  (), (), eps_h)
    ok = all(s.dominated and s.within_factor_2 for s in steps)
    return ConeReport(tuple(steps), M, kind, k_derived, h_cert, ok)


# ---------------------------------------------------------------------------
# Laurent operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentResult:
    operator: TwistedLaurentOperator
    max_err: float
    toeplitz_defect: float
    direct: np.ndarray
    closed: np.ndarray
    interior: int


def laurent_recovery(b: SparseZOperator, t: float, window: int) -> LaurentResult:
    """Compare ``sum_n exp(-i n t) alpha_n(b)`` on ``[-N, N]^2`` with the closed form.

    The direct sum adds every shifted copy of ``b`` that reaches the window.
    ``max_err`` is taken on the interior ``[-N + w, N - w]^2`` with ``w`` the
    support radius of ``b``; ``toeplitz_defect`` is the largest change along
    a diagonal of the direct window.
    """
    N = int(window)
    size = 2 * N + 1
    direct = np.zeros((size, size), dtype=complex)
    R = b.radius
    for n in range(-N - 2 * R - 1, N + 2 * R + 2):
        ph = unit_power(float(t), -n)
        for (i, j), v in b.entries.items():
            r, c = i + n, j + n
            if -N <= r <= N and -N <= c <= N:
                direct[r + N, c + N] += ph * v
    op = fourier_of_element(ActionSystem.zshift(), b, t).element
    closed = op.window(N)
    w = R
    lo, hi = w, size - w
    if hi > lo:
        err = float(np.max(np.abs(direct[lo:hi, lo:hi] - closed[lo:hi, lo:hi])))
    else:
        err = 0.0
    defect = float(np.max(np.abs(direct[1:, 1:] - direct[:-1, :-1]), initial=0.0))
    return LaurentResult(op, err, defect, direct, closed, max(0, N - w))


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_sparse(rng: np.random.Generator, box: int = 3, density: float = 0.3) -> SparseZOperator:
    idx = range(-box, box + 1)
    ent = {}
    for i in idx:
        for j in idx:
            if rng.random() < density:
                ent[(i, j)] = complex(rng.standard_normal(), rng.standard_normal())
    if not ent:
        ent[(0, 0)] = 1.0
    return SparseZOperator(ent)


def random_element(sys: ActionSystem, rng: np.random.Generator):
    if sys.world == "zshift":
        return random_sparse(rng)
    D = sys.dim
    return rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))


def random_dominated_pair(sys: ActionSystem, rng: np.random.Generator):
    """``(h, k)`` with ``0 <= h <= k``: ``k = B* B`` and ``h = B* C B`` for a random contraction ``0 <= C <= I``."""
    B = random_element(sys, rng)
    if sys.world == "finite":
        Bd, rows = B, None
    else:
        rows = B.rows
        Bd = B.to_dense(rows, rows + [r for r in B.cols if r not in rows])
    r = Bd.shape[0]
    Z = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    S = Z @ Z.conj().T
    C = S / (np.linalg.norm(S, 2) * (1 + rng.random()))
    if sys.world == "finite":
        return B.conj().T @ C @ B, B.conj().T @ B
    Cs = SparseZOperator.from_dense(C, rows, rows)
    return B.adjoint() @ Cs @ B, B.adjoint() @ B
