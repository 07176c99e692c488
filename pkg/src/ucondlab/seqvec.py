"""Finitely supported vectors of a sequence space.

A :class:`SeqVector` is a formal sum of *parts*. An explicit part stores
index/value arrays; a block part stores a ``range`` of indices together with a
vectorized coefficient function, so partial sums over ranges with 10**8 terms
never have to be materialized. Norms are computed by walking the covered index
ranges in fixed-size chunks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

CHUNK = 1 << 20

Coefficients = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class _Explicit:
    idx: np.ndarray
    val: np.ndarray
    unique: bool = False


@dataclass(frozen=True)
class _Block:
    span: range
    fn: Coefficients
    scale: complex = 1.0

    def values(self, idx: np.ndarray) -> np.ndarray:
        v = np.asarray(self.fn(idx))
        s = self.scale
        if s == 1:
            return v
        return (s.real if s.imag == 0 else s) * v


def _normalize_range(r: range) -> range:
    if r.step < 0:
        r = r[::-1]
    return r


def _subrange(r: range, lo: int, hi: int) -> range:
    """Elements of ``r`` lying in ``[lo, hi)``."""
    if len(r) == 0:
        return r
    i0 = max(0, -(-(lo - r.start) // r.step))
    i1 = min(len(r), -(-(hi - r.start) // r.step))
    return r[i0:i1] if i1 > i0 else range(0)


def _merge_equal_spans(blocks: list[_Block]) -> list[_Block]:
    """Combine blocks over the same index range into one block."""
    groups: dict[tuple, list[_Block]] = {}
    for b in blocks:
        groups.setdefault((b.span.start, b.span.stop, b.span.step), []).append(b)
    out = []
    for same in groups.values():
        if len(same) == 1:
            out.append(same[0])
        else:
            out.append(_Block(same[0].span, lambda ix, same=same: sum(b.values(ix) for b in same)))
    return out


def _pairwise_disjoint(spans: list[range]) -> bool:
    ivs = sorted((r.start, r[-1]) for r in spans)
    return all(a[1] < b[0] for a, b in zip(ivs, ivs[1:]))


def _disjoint_blocks_norm(blocks: list[_Block], sup: bool) -> float:
    best = 0.0
    sums: list[float] = []
    for blk in blocks:
        r, s = blk.span, abs(blk.scale)
        for i in range(0, len(r), CHUNK):
            sub = r[i : i + CHUNK]
            ix = np.arange(sub.start, sub.stop, sub.step, dtype=np.int64)
            mag = np.abs(np.asarray(blk.fn(ix)))
            if sup:
                best = max(best, s * float(mag.max(initial=0.0)))
            else:
                sums.append(s * s * float(np.dot(mag, mag)))
    return best if sup else math.sqrt(math.fsum(sums))


class SeqVector:
    """Element of l^2 or l^inf with finite (possibly huge) support."""

    __slots__ = ("_parts",)

    def __init__(self, parts=()):
        self._parts = tuple(parts)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "SeqVector":
        return cls()

    @classmethod
    def basis(cls, index: int, coeff: complex = 1.0) -> "SeqVector":
        return cls.from_entries([index], [coeff])

    @classmethod
    def from_entries(cls, idx, val, unique: bool = False) -> "SeqVector":
        idx = np.asarray(idx, dtype=np.int64).ravel()
        val = np.asarray(val, dtype=complex).ravel()
        if idx.shape != val.shape:
            raise ValueError("index and value arrays differ in length")
        if idx.size == 0:
            return cls()
        return cls([_Explicit(idx, val, unique or idx.size == 1)])

    @classmethod
    def block(cls, span: range, fn: Coefficients, scale: complex = 1.0) -> "SeqVector":
        span = _normalize_range(span)
        if len(span) == 0:
            return cls()
        return cls([_Block(span, fn, complex(scale))])

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return SeqVector(self._parts + other._parts)

    def __mul__(self, c):
        if isinstance(c, SeqVector) or np.ndim(c) != 0:
            return NotImplemented
        c = complex(c)
        parts = []
        for p in self._parts:
            if isinstance(p, _Explicit):
                parts.append(_Explicit(p.idx, p.val * c, p.unique))
            else:
                parts.append(_Block(p.span, p.fn, p.scale * c))
        return SeqVector(parts)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return self + (-other)

    # -- inspection -------------------------------------------------------
    @property
    def n_stored(self) -> int:
        """Upper bound on the support size."""
        return sum(p.idx.size if isinstance(p, _Explicit) else len(p.span) for p in self._parts)

    def entries(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros(idx.shape, dtype=complex)
        for p in self._parts:
            if isinstance(p, _Explicit):
                order = np.argsort(p.idx, kind="stable")
                sidx, sval = p.idx[order], p.val[order]
                lo = np.searchsorted(sidx, idx, side="left")
                hi = np.searchsorted(sidx, idx, side="right")
                csum = np.concatenate([[0.0], np.cumsum(sval)])
                out += csum[hi] - csum[lo]
            else:
                r = p.span
                off = idx - r.start
                inside = (off >= 0) & (idx < r.stop) & (off % r.step == 0)
                if inside.any():
                    out[inside] += p.values(idx[inside])
        return out

    def to_dict(self, limit: int = 100_000) -> dict[int, complex]:
        if self.n_stored > limit:
            raise ValueError("support too large to materialize")
        idx, val = self._collapsed_explicit(include_blocks=True)
        return {int(i): complex(v) for i, v in zip(idx, val) if v != 0}

    def _collapsed_explicit(self, include_blocks: bool = False):
        idxs, vals = [], []
        for p in self._parts:
            if isinstance(p, _Explicit):
                idxs.append(p.idx)
                vals.append(p.val)
            elif include_blocks:
                ix = np.arange(p.span.start, p.span.stop, p.span.step, dtype=np.int64)
                idxs.append(ix)
                vals.append(p.values(ix))
        if not idxs:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex)
        idx = np.concatenate(idxs)
        val = np.concatenate(vals)
        uniq, inv = np.unique(idx, return_inverse=True)
        acc = np.zeros(uniq.size, dtype=complex)
        np.add.at(acc, inv, val)
        return uniq, acc

    # -- norms ------------------------------------------------------------
    def norm(self, kind: str = "euclidean") -> float:
        if kind not in ("euclidean", "sup"):
            raise ValueError(f"sequence vectors support 'euclidean' and 'sup' norms, not {kind!r}")
        sup = kind == "sup"
        parts = self._parts
        if not parts:
            return 0.0
        if len(parts) == 1 and isinstance(parts[0], _Explicit) and parts[0].unique:
            a = np.abs(parts[0].val)
            return float(a.max()) if sup else float(np.sqrt(np.sum(a * a)))

        blocks = _merge_equal_spans([p for p in parts if isinstance(p, _Block)])
        explicit = [p for p in parts if isinstance(p, _Explicit)]
        if not explicit and _pairwise_disjoint([b.span for b in blocks]):
            return _disjoint_blocks_norm(blocks, sup)
        if explicit:
            eidx = np.concatenate([p.idx for p in explicit])
            eval_ = np.concatenate([p.val for p in explicit])
            order = np.argsort(eidx, kind="stable")
            eidx, eval_ = eidx[order], eval_[order]
        else:
            eidx = np.zeros(0, dtype=np.int64)
            eval_ = np.zeros(0, dtype=complex)

        intervals = sorted((b.span.start, b.span[-1] + 1) for b in blocks)
        merged: list[list[int]] = []
        for lo, hi in intervals:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])

        best = 0.0
        partial_sums: list[float] = []
        covered = np.zeros(eidx.size, dtype=bool)
        for lo, hi in merged:
            for a in range(lo, hi, CHUNK):
                b = min(hi, a + CHUNK)
                dense = np.zeros(b - a, dtype=complex)
                for blk in blocks:
                    sub = _subrange(blk.span, a, b)
                    if len(sub):
                        ix = np.arange(sub.start, sub.stop, sub.step, dtype=np.int64)
                        dense[ix - a] += blk.values(ix)
                i0 = np.searchsorted(eidx, a, side="left")
                i1 = np.searchsorted(eidx, b, side="left")
                if i1 > i0:
                    np.add.at(dense, eidx[i0:i1] - a, eval_[i0:i1])
                    covered[i0:i1] = True
                mag = np.abs(dense)
                if sup:
                    best = max(best, float(mag.max(initial=0.0)))
                else:
                    partial_sums.append(float(np.sum(mag * mag)))

        if eidx.size and not covered.all():
            rest_idx, rest_val = eidx[~covered], eval_[~covered]
            uniq, inv = np.unique(rest_idx, return_inverse=True)
            acc = np.zeros(uniq.size, dtype=complex)
            np.add.at(acc, inv, rest_val)
            mag = np.abs(acc)
            if sup:
                best = max(best, float(mag.max(initial=0.0)))
            else:
                partial_sums.append(float(np.sum(mag * mag)))
        return best if sup else math.sqrt(math.fsum(partial_sums))

    def __repr__(self) -> str:
        return f"SeqVector(parts={len(self._parts)}, stored={self.n_stored})"
