"""Derived atlases whose fiber transforms by the base transition Jacobian.

A bundle point is stored flat: the first n entries are base coordinates,
the remaining n*k entries an (n, k) fiber matrix in row-major order.
k = 1 gives the tangent bundle (velocity column), k = n the frame bundle
(frame matrix).  Transitions act as (x, G) -> (h(x), dh(x) G); their
Jacobians use d2h of the base chart when available.
"""
from __future__ import annotations

import numpy as np

from .atlas import Atlas, Chart, Transition, _vec


def pack(x: np.ndarray, G: np.ndarray) -> np.ndarray:
    return np.concatenate([_vec(x), np.asarray(G, float).ravel()])


def unpack(z: np.ndarray, n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    z = _vec(z)
    return z[:n], z[n:].reshape(n, k)


def _bundle_transition(base: Atlas, src_id: str, tid: str, n: int, k: int) -> Transition:
    tr = base.chart(src_id).transitions[tid]

    def bmap(z):
        x, G = unpack(z, n, k)
        J = base._raw_d_transition(src_id, x, tid)
        return pack(_vec(tr.map(x)), J @ G)

    def bd(z):
        x, G = unpack(z, n, k)
        J = base._raw_d_transition(src_id, x, tid)
        T2 = base._raw_d2_transition(src_id, x, tid)
        N = n + n * k
        out = np.zeros((N, N))
        out[:n, :n] = J
        # fiber rows vs base columns: d(dh(x) G) along e_j = d2h(e_j, .) G
        for j in range(n):
            out[n:, j] = (T2[:, j, :] @ G).ravel()
        # fiber rows vs fiber columns: dh acts column-wise
        out[n:, n:] = np.kron(J, np.eye(k))
        return out

    return Transition(map=bmap, d=bd)


def bundle_atlas(base: Atlas, k: int, kind: str, det_guard: float = 0.0,
                 fiber_lo: np.ndarray | None = None, fiber_hi: np.ndarray | None = None) -> Atlas:
    """Atlas of the rank-k column bundle over `base`.

    `det_guard` > 0 additionally requires |det G| above the guard (frame
    bundle).  Sample boxes extend the base box by the fiber box.
    """
    n = base.dim
    if fiber_lo is None:
        fiber_lo = (np.eye(n)[:, :k] - 0.3).ravel() if det_guard > 0 else -np.ones(n * k)
    if fiber_hi is None:
        fiber_hi = (np.eye(n)[:, :k] + 0.3).ravel() if det_guard > 0 else np.ones(n * k)

    charts = []
    for cid, c in base.charts.items():
        def contains(z, margin=0.0, c=c):
            x, G = unpack(z, n, k)
            if not c.contains(x, margin):
                return False
            if det_guard > 0.0 and abs(np.linalg.det(G)) <= det_guard:
                return False
            return True

        bc = Chart(
            id=cid,
            dim=n + n * k,
            contains_fn=contains,
            sample_lo=np.concatenate([c.sample_lo, fiber_lo]),
            sample_hi=np.concatenate([c.sample_hi, fiber_hi]),
            priority=c.priority,
        )
        charts.append(bc)

    out = Atlas(f"{kind}({base.name})", n + n * k, charts)
    out.base = base
    out.base_dim = n
    out.fiber_cols = k
    out.kind = kind
    for cid, c in base.charts.items():
        for tid in c.transitions:
            out.chart(cid).add_transition(tid, _bundle_transition(base, cid, tid, n, k))
    return out


def tangent_atlas(base: Atlas) -> Atlas:
    cached = getattr(base, "_tangent_atlas", None)
    if cached is None:
        cached = bundle_atlas(base, 1, "T")
        base._tangent_atlas = cached
    return cached


def frame_atlas(base: Atlas, det_guard: float = 1e-12) -> Atlas:
    cached = getattr(base, "_frame_atlas", None)
    if cached is None:
        cached = bundle_atlas(base, base.dim, "Fr", det_guard=det_guard)
        base._frame_atlas = cached
    return cached
