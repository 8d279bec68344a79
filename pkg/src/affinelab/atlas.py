"""Manifolds as finite atlases of charts over R^n.

A chart is a named coordinate patch with a membership test (supporting a
fractional interior safety margin used for integration hand-off) and
transition maps to overlapping charts.  Points and tangent vectors are
always expressed relative to a chart; re-charting pushes coordinates
through the transition map and vectors through its Jacobian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numdiff
from .errors import NoCommonChart, NotInOverlap

Coords = np.ndarray


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, float))


@dataclass(frozen=True, eq=False)
class Point:
    chart: str
    coords: Coords

    def __post_init__(self):
        object.__setattr__(self, "coords", _vec(self.coords))

    def __repr__(self):
        return f"Point({self.chart!r}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class Tangent:
    base: Point
    vec: Coords

    def __post_init__(self):
        object.__setattr__(self, "vec", _vec(self.vec))

    def __repr__(self):
        return f"Tangent({self.base!r}, {np.array2string(self.vec, precision=6)})"


@dataclass(eq=False)
class Transition:
    """Map between two chart coordinate systems with optional derivatives.

    `d` returns the (n, n) Jacobian, `d2` the (n, n, n) symmetric tensor
    T[i, j, k] = d^2 h_i / dx_j dx_k.  Missing derivatives fall back to
    central differences at the atlas level.
    """

    map: Callable[[Coords], Coords]
    d: Callable[[Coords], np.ndarray] | None = None
    d2: Callable[[Coords], np.ndarray] | None = None


@dataclass(eq=False)
class Chart:
    """A coordinate patch V of the model space.

    `contains_fn(x, margin)` implements the membership test; `margin` in
    [0, 1) shrinks the domain toward its interior (0.1 keeps integration
    states one tenth away from the boundary so FD stencils stay inside).
    """

    id: str
    dim: int
    contains_fn: Callable[[Coords, float], bool]
    sample_lo: Coords
    sample_hi: Coords
    priority: int = 0
    transitions: dict[str, Transition] = field(default_factory=dict)

    def __post_init__(self):
        self.sample_lo = _vec(self.sample_lo)
        self.sample_hi = _vec(self.sample_hi)

    def contains(self, x, margin: float = 0.0) -> bool:
        return bool(self.contains_fn(_vec(x), float(margin)))

    def add_transition(self, target: str, tr: Transition) -> None:
        self.transitions[target] = tr


class Atlas:
    """Finite, explicit collection of charts with declared transitions."""

    def __init__(self, name: str, dim: int, charts):
        self.name = name
        self.dim = int(dim)
        self.charts: dict[str, Chart] = {c.id: c for c in charts}
        self._order = sorted(self.charts, key=lambda cid: (self.charts[cid].priority, cid))

    def chart(self, cid: str) -> Chart:
        try:
            return self.charts[cid]
        except KeyError:
            raise KeyError(f"atlas {self.name!r} has no chart {cid!r}") from None

    def chart_order(self):
        """Chart ids, lowest priority index first, ties broken by id."""
        return list(self._order)

    # -- transitions -----------------------------------------------------

    def transition(self, point: Point, target: str) -> Point:
        """Express `point` in `target` coordinates (NotInOverlap if impossible)."""
        src = self.chart(point.chart)
        if point.chart == target:
            return Point(target, point.coords.copy())
        if target not in src.transitions:
            raise NotInOverlap(f"no transition {point.chart!r} -> {target!r}")
        if not src.contains(point.coords):
            raise NotInOverlap(f"{point!r} outside source chart domain")
        y = _vec(src.transitions[target].map(point.coords))
        if not self.chart(target).contains(y):
            raise NotInOverlap(f"image {y} outside target chart {target!r}")
        return Point(target, y)

    def d_transition(self, point: Point, target: str) -> np.ndarray:
        """Jacobian dh of the transition at `point` (analytic if declared)."""
        src = self.chart(point.chart)
        if point.chart == target:
            return np.eye(self.dim)
        self.transition(point, target)  # overlap check
        tr = src.transitions[target]
        if tr.d is not None:
            return np.asarray(tr.d(point.coords), float)
        return numdiff.jacobian(tr.map, point.coords, inside=lambda p: src.contains(p))

    def d2_transition(self, point: Point, target: str) -> np.ndarray:
        """Symmetric second derivative tensor of the transition at `point`."""
        src = self.chart(point.chart)
        if point.chart == target:
            return np.zeros((self.dim,) * 3)
        self.transition(point, target)
        tr = src.transitions[target]
        if tr.d2 is not None:
            return np.asarray(tr.d2(point.coords), float)
        return numdiff.second_derivative(tr.map, point.coords, inside=lambda p: src.contains(p))

    def rechart_tangent(self, t: Tangent, target: str) -> Tangent:
        """Push a tangent vector through the transition Jacobian."""
        p = self.transition(t.base, target)
        J = self.d_transition(t.base, target)
        return Tangent(p, J @ t.vec)

    # Raw variants skip the domain policing: transition formulas are smooth
    # on a neighbourhood of the nominal domain, and integrator hand-off may
    # evaluate them a step past the boundary.

    def _raw_transition(self, cid: str, x: Coords, target: str) -> Coords:
        if cid == target:
            return _vec(x).copy()
        return _vec(self.chart(cid).transitions[target].map(x))

    def _raw_d_transition(self, cid: str, x: Coords, target: str) -> np.ndarray:
        if cid == target:
            return np.eye(self.dim)
        tr = self.chart(cid).transitions[target]
        if tr.d is not None:
            return np.asarray(tr.d(x), float)
        return numdiff.jacobian(tr.map, _vec(x))

    def _raw_d2_transition(self, cid: str, x: Coords, target: str) -> np.ndarray:
        if cid == target:
            return np.zeros((self.dim,) * 3)
        tr = self.chart(cid).transitions[target]
        if tr.d2 is not None:
            return np.asarray(tr.d2(x), float)
        return numdiff.second_derivative(tr.map, _vec(x))

    # -- chart selection and comparison ----------------------------------

    def hop_target(self, cid: str, x: Coords, margin: float) -> tuple[str, Coords] | None:
        """Best chart (priority order) reachable from `cid` that contains x.

        Returns (chart_id, new_coords) or None when no declared neighbour
        holds the state inside its margin-shrunk domain.
        """
        src = self.chart(cid)
        best = None
        for tid, tr in src.transitions.items():
            tgt = self.chart(tid)
            try:
                y = _vec(tr.map(x))
            except (FloatingPointError, ZeroDivisionError, ValueError):
                continue
            if not np.all(np.isfinite(y)):
                continue
            if tgt.contains(y, margin):
                key = (tgt.priority, tid)
                if best is None or key < best[0]:
                    best = (key, tid, y)
        if best is None:
            return None
        return best[1], best[2]

    def gap(self, p: Point, q: Point) -> float:
        """Distance between two points measured in a shared chart."""
        if p.chart == q.chart:
            return float(np.linalg.norm(p.coords - q.coords))
        for a, b in ((p, q), (q, p)):
            try:
                return float(np.linalg.norm(self.transition(b, a.chart).coords - a.coords))
            except NotInOverlap:
                continue
        for cid in self._order:
            try:
                pa = self.transition(p, cid)
                qa = self.transition(q, cid)
            except NotInOverlap:
                continue
            return float(np.linalg.norm(pa.coords - qa.coords))
        raise NoCommonChart(f"{p!r} and {q!r} share no chart")

    # -- sampling ---------------------------------------------------------

    def sample_points(self, cid: str, count: int, rng: np.random.Generator, margin: float = 0.1):
        """Draw points uniformly from the chart's sample box (margin-checked)."""
        c = self.chart(cid)
        out, attempts = [], 0
        while len(out) < count:
            x = rng.uniform(c.sample_lo, c.sample_hi)
            attempts += 1
            if c.contains(x, margin):
                out.append(Point(cid, x))
            if attempts > 1000 * max(count, 1):
                raise RuntimeError(f"sampling chart {cid!r} rejected too often")
        return out

    def overlap_samples(self, cid1: str, cid2: str, count: int, rng: np.random.Generator, margin: float = 0.0):
        """Points of chart `cid1` whose transition lands inside chart `cid2`."""
        c1 = self.chart(cid1)
        if cid2 not in c1.transitions:
            raise NotInOverlap(f"no transition {cid1!r} -> {cid2!r}")
        tr = c1.transitions[cid2]
        c2 = self.chart(cid2)
        out, attempts = [], 0
        while len(out) < count:
            x = rng.uniform(c1.sample_lo, c1.sample_hi)
            attempts += 1
            if c1.contains(x, margin):
                y = _vec(tr.map(x))
                if np.all(np.isfinite(y)) and c2.contains(y, margin):
                    out.append(Point(cid1, x))
            if attempts > 5000 * max(count, 1):
                raise RuntimeError(f"overlap sampling {cid1!r}/{cid2!r} rejected too often")
        return out

    def overlap_pairs(self):
        """All declared (source, target) transition pairs."""
        return [(cid, tid) for cid, c in self.charts.items() for tid in c.transitions]


# -- common domain shapes -------------------------------------------------

def all_space(x, margin=0.0):
    return True


def disk_domain(radius: float):
    def contains(x, margin=0.0):
        return float(np.linalg.norm(x)) < radius * (1.0 - margin)

    return contains


def box_domain(lo, hi):
    lo = _vec(lo)
    hi = _vec(hi)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    def contains(x, margin=0.0):
        return bool(np.all(np.abs(x - center) < half * (1.0 - margin)))

    return contains
