"""Axis-aligned intervals, hyperrectangles and partitions of R^d.

Every interval is half-open ``(lower, upper]``. Unbounded ends are the IEEE
infinities ``-inf``/``+inf``; no arithmetic is ever done on an infinite end,
so side lengths and volumes of unbounded boxes come out as ``+inf`` rather
than ``nan``. An upper end of ``+inf`` is read as open, i.e. ``(b, inf)``.

A :class:`Partition` produced by the recursive splitter keeps its split tree
(``split_values``) so that point location is ``O(d * m0)`` per point and fully
vectorised over sample matrices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, ParseError

INF = math.inf


@dataclass(frozen=True)
class Interval:
    lower: float = -INF
    upper: float = INF

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval ends must not be nan")
        if lo == INF or hi == -INF or not lo < hi:
            raise ValueError(f"invalid interval ({lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def is_real_line(self) -> bool:
        return self.lower == -INF and self.upper == INF

    @property
    def is_infinitely_large(self) -> bool:
        return self.lower == -INF or self.upper == INF

    @property
    def length(self) -> float:
        if self.is_infinitely_large:
            return INF
        return self.upper - self.lower

    def __contains__(self, x: float) -> bool:
        return self.lower < x <= self.upper

    def to_json(self) -> list:
        return [_encode(self.lower), _encode(self.upper)]

    @classmethod
    def from_json(cls, pair) -> "Interval":
        return cls(_decode(pair[0]), _decode(pair[1]))


REAL_LINE = Interval(-INF, INF)


@dataclass(frozen=True)
class HyperRectangle:
    sides: tuple

    def __post_init__(self):
        sides = tuple(self.sides)
        if not sides:
            raise ValueError("a hyperrectangle needs at least one side")
        if not all(isinstance(s, Interval) for s in sides):
            raise TypeError("sides must be Interval instances")
        object.__setattr__(self, "sides", sides)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "HyperRectangle":
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @classmethod
    def real_space(cls, d: int) -> "HyperRectangle":
        return cls((REAL_LINE,) * d)

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def level(self) -> int:
        """Number of leading sides that are proper intervals (not all of R)."""
        k = 0
        for side in self.sides:
            if side.is_real_line:
                break
            k += 1
        return k

    @property
    def is_infinitely_large(self) -> bool:
        return any(s.is_infinitely_large for s in self.sides)

    @property
    def is_bounded(self) -> bool:
        return not self.is_infinitely_large

    @property
    def lowers(self) -> np.ndarray:
        return np.array([s.lower for s in self.sides])

    @property
    def uppers(self) -> np.ndarray:
        return np.array([s.upper for s in self.sides])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.d:
            raise DimensionMismatch(f"point has dimension {x.shape[0]}, box has {self.d}")
        return all(xi in s for xi, s in zip(x, self.sides))

    def to_json(self) -> list:
        return [s.to_json() for s in self.sides]

    @classmethod
    def from_json(cls, sides) -> "HyperRectangle":
        return cls(tuple(Interval.from_json(s) for s in sides))


def volume(box: HyperRectangle) -> float:
    if box.is_infinitely_large:
        return INF
    return math.prod(s.length for s in box.sides)


def max_edge_length(box: HyperRectangle) -> float:
    return max(s.length for s in box.sides)


def _encode(v: float):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return v


def _decode(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return INF
        if v == "-inf":
            return -INF
        raise ParseError(f"unknown interval end {v!r}")
    return float(v)


@dataclass(frozen=True)
class Partition:
    """Ordered cells of an ``m0**d`` recursive split of R^d.

    ``split_values[k]`` has shape ``(m0**k, m0 - 1)``: row ``g`` holds the
    increasing cut points along axis ``k`` of the ``g``-th ``k``-level cell.
    Cell ``i`` is the leaf whose base-``m0`` digits (most significant first)
    are the slab indices chosen on axes ``0..d-1``.
    """

    cells: tuple
    m0: int
    d: int
    split_values: tuple = field(repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        frozen = []
        for arr in self.split_values:
            a = np.array(arr, dtype=float)
            a.setflags(write=False)
            frozen.append(a)
        object.__setattr__(self, "split_values", tuple(frozen))

    @property
    def m(self) -> int:
        return len(self.cells)

    @classmethod
    def from_splits(cls, split_values: Sequence[np.ndarray], m0: int, d: int) -> "Partition":
        cells = []
        for i in range(m0**d):
            digits = _digits(i, m0, d)
            sides = []
            for k in range(d):
                node = _prefix(digits, k, m0)
                cuts = split_values[k][node]
                j = digits[k]
                lo = -INF if j == 0 else cuts[j - 1]
                hi = INF if j == m0 - 1 else cuts[j]
                sides.append(Interval(lo, hi))
            cells.append(HyperRectangle(tuple(sides)))
        return cls(tuple(cells), m0, d, tuple(split_values))

    def locate_many(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if self.d == 1 else x.reshape(1, -1)
        if x.shape[1] != self.d:
            raise DimensionMismatch(f"samples have dimension {x.shape[1]}, partition has {self.d}")
        node = np.zeros(x.shape[0], dtype=np.int64)
        for k in range(self.d):
            cuts = self.split_values[k][node]
            # (a, b] convention: a point equal to a cut stays in the lower slab
            slab = np.count_nonzero(cuts < x[:, k : k + 1], axis=1)
            node = node * self.m0 + slab
        return node

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m0": self.m0,
            "cells": [c.to_json() for c in self.cells],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Partition":
        try:
            d, m0 = int(obj["d"]), int(obj["m0"])
            cells = [HyperRectangle.from_json(c) for c in obj["cells"]]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed partition JSON: {exc}") from exc
        if len(cells) != m0**d:
            raise ParseError(f"expected {m0**d} cells, found {len(cells)}")
        splits = []
        for k in range(d):
            rows = np.empty((m0**k, m0 - 1))
            for node in range(m0**k):
                for j in range(m0 - 1):
                    # first leaf below (node, j): remaining digits all zero
                    i = (node * m0 + j) * m0 ** (d - k - 1)
                    rows[node, j] = cells[i].sides[k].upper
            splits.append(rows)
        part = cls.from_splits(splits, m0, d)
        if part.cells != tuple(cells):
            raise ParseError("cells are not a recursive axis-ordered split")
        return part

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def locate(partition: Partition, x) -> int:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return int(partition.locate_many(x)[0])


def _digits(i: int, base: int, width: int) -> list:
    out = [0] * width
    for k in range(width - 1, -1, -1):
        i, out[k] = divmod(i, base)
    return out


def _prefix(digits, k: int, base: int) -> int:
    node = 0
    for j in digits[:k]:
        node = node * base + j
    return node
