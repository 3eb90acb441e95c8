"""Hot inner loops with two interchangeable implementations.

Every kernel exists as a numba ``@njit`` function and as a pure-numpy
function.  The active backend is picked once at import time from the
environment:

    FEASREGION_BACKEND=numba|numpy   (default: numba when importable)
    FEASREGION_DISABLE_NUMBA=1       (shorthand for the numpy backend)

and may be switched at runtime with :func:`set_backend` (used by the
benchmark to compare the two paths in one process).
"""
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

# simplex status codes
OPTIMAL = 0
UNBOUNDED = 1
ITERATION_CAP = 2

_TIE = 1e-12


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _simplex_np(T, basis, allowed, max_iter, tol, bland_after):
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    it = 0
    degen = 0
    bland = False
    cols = np.flatnonzero(allowed)
    while it < max_iter:
        red = T[m, cols]
        if bland:
            cand = np.flatnonzero(red < -tol)
            if cand.size == 0:
                return OPTIMAL, it
            col = cols[cand[0]]
        else:
            k = int(np.argmin(red))
            if red[k] >= -tol:
                return OPTIMAL, it
            col = cols[k]
        colvec = T[:m, col]
        mask = colvec > tol
        if not mask.any():
            return UNBOUNDED, it
        rows = np.flatnonzero(mask)
        ratios = np.maximum(T[rows, n], 0.0) / colvec[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _TIE * (1.0 + best)]
        row = ties[np.argmin(basis[ties])] if ties.size > 1 else ties[0]
        step = best
        piv = T[row, col]
        T[row] /= piv
        f = T[:, col].copy()
        f[row] = 0.0
        T -= np.outer(f, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
        if step <= _TIE:
            degen += 1
            if degen > bland_after:
                bland = True
        else:
            degen = 0
        it += 1
    return ITERATION_CAP, it


def _clip_np(poly, a0, a1, b):
    k = poly.shape[0]
    if k == 0:
        return poly
    s = poly[:, 0] * a0 + poly[:, 1] * a1 - b
    if np.all(s <= 0.0):
        return poly
    if np.all(s > 0.0):
        return poly[:0]
    out = []
    for i in range(k):
        j = (i + 1) % k
        si, sj = s[i], s[j]
        if si <= 0.0:
            out.append(poly[i])
        if (si <= 0.0) != (sj <= 0.0):
            t = si / (si - sj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out)


def _shoelace_np(poly):
    if poly.shape[0] < 3:
        return 0.0
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _cut_areas_np(outer, inner):
    n = inner.shape[0]
    out = np.zeros(n)
    for e in range(n):
        p = inner[e]
        q = inner[(e + 1) % n]
        a0 = q[1] - p[1]
        a1 = p[0] - q[0]
        # keep the part of outer beyond the edge: a.x >= a.p
        piece = _clip_np(outer, -a0, -a1, -(a0 * p[0] + a1 * p[1]))
        out[e] = _shoelace_np(piece)
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _simplex_nb(T, basis, allowed, max_iter, tol, bland_after):
        m = T.shape[0] - 1
        n = T.shape[1] - 1
        it = 0
        degen = 0
        bland = False
        while it < max_iter:
            col = -1
            best = -tol
            for j in range(n):
                if allowed[j]:
                    r = T[m, j]
                    if bland:
                        if r < -tol:
                            col = j
                            break
                    elif r < best:
                        best = r
                        col = j
            if col < 0:
                return OPTIMAL, it
            best_ratio = np.inf
            for i in range(m):
                a = T[i, col]
                if a > tol:
                    rhs = T[i, n]
                    if rhs < 0.0:
                        rhs = 0.0
                    ratio = rhs / a
                    if ratio < best_ratio:
                        best_ratio = ratio
            if best_ratio == np.inf:
                return UNBOUNDED, it
            # Bland-style tie break: smallest basic index among near-minimal ratios
            row = -1
            limit = best_ratio + _TIE * (1.0 + best_ratio)
            for i in range(m):
                a = T[i, col]
                if a > tol:
                    rhs = T[i, n]
                    if rhs < 0.0:
                        rhs = 0.0
                    if rhs / a <= limit:
                        if row < 0 or basis[i] < basis[row]:
                            row = i
            piv = T[row, col]
            for k in range(n + 1):
                T[row, k] /= piv
            for i in range(m + 1):
                if i != row:
                    f = T[i, col]
                    if f != 0.0:
                        for k in range(n + 1):
                            T[i, k] -= f * T[row, k]
                        T[i, col] = 0.0
            T[row, col] = 1.0
            basis[row] = col
            if best_ratio <= _TIE:
                degen += 1
                if degen > bland_after:
                    bland = True
            else:
                degen = 0
            it += 1
        return ITERATION_CAP, it

    @njit(cache=True, nogil=True)
    def _clip_nb(poly, a0, a1, b):
        k = poly.shape[0]
        out = np.empty((k + 1, 2))
        if k == 0:
            return out[:0]
        cnt = 0
        for i in range(k):
            j = (i + 1) % k
            si = poly[i, 0] * a0 + poly[i, 1] * a1 - b
            sj = poly[j, 0] * a0 + poly[j, 1] * a1 - b
            if si <= 0.0:
                out[cnt, 0] = poly[i, 0]
                out[cnt, 1] = poly[i, 1]
                cnt += 1
            if (si <= 0.0) != (sj <= 0.0):
                t = si / (si - sj)
                out[cnt, 0] = poly[i, 0] + t * (poly[j, 0] - poly[i, 0])
                out[cnt, 1] = poly[i, 1] + t * (poly[j, 1] - poly[i, 1])
                cnt += 1
        return out[:cnt]

    @njit(cache=True, nogil=True)
    def _shoelace_nb(poly):
        k = poly.shape[0]
        if k < 3:
            return 0.0
        s = 0.0
        for i in range(k):
            j = (i + 1) % k
            s += poly[i, 0] * poly[j, 1] - poly[j, 0] * poly[i, 1]
        return 0.5 * s

    @njit(cache=True, nogil=True)
    def _cut_areas_nb(outer, inner):
        n = inner.shape[0]
        out = np.zeros(n)
        for e in range(n):
            px = inner[e, 0]
            py = inner[e, 1]
            qx = inner[(e + 1) % n, 0]
            qy = inner[(e + 1) % n, 1]
            a0 = qy - py
            a1 = px - qx
            piece = _clip_nb(outer, -a0, -a1, -(a0 * px + a1 * py))
            out[e] = _shoelace_nb(piece)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_IMPLS = {
    "numpy": {
        "simplex": _simplex_np,
        "clip": _clip_np,
        "cut_areas": _cut_areas_np,
        "shoelace": _shoelace_np,
    },
}
if HAS_NUMBA:
    _IMPLS["numba"] = {
        "simplex": _simplex_nb,
        "clip": _clip_nb,
        "cut_areas": _cut_areas_nb,
        "shoelace": _shoelace_nb,
    }


def _default_backend():
    if os.environ.get("FEASREGION_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("FEASREGION_BACKEND", "").strip().lower()
    if name in _IMPLS:
        return name
    return "numba" if HAS_NUMBA else "numpy"


_active = {"name": _default_backend()}


def available_backends():
    return sorted(_IMPLS)


def get_backend():
    return _active["name"]


def set_backend(name):
    """Select the kernel implementation ('numba' or 'numpy'); returns the previous one."""
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    prev = _active["name"]
    _active["name"] = name
    return prev


def simplex_iterate(T, basis, allowed, max_iter, tol=1e-9, bland_after=50):
    """Run primal simplex pivots in place on a dense tableau.

    ``T`` is (m+1, n+1): constraint rows, then the reduced-cost row; the last
    column holds the right-hand side.  Columns with ``allowed[j]`` False never
    enter the basis.  Dantzig's rule is used until more than ``bland_after``
    consecutive degenerate pivots, then Bland's rule.

    Returns ``(status, iterations)`` with status OPTIMAL, UNBOUNDED or
    ITERATION_CAP.
    """
    fn = _IMPLS[_active["name"]]["simplex"]
    status, it = fn(T, basis, allowed, int(max_iter), float(tol), int(bland_after))
    return int(status), int(it)


def clip_halfspace(poly, a, b):
    """Clip a convex polygon (k, 2) to {x : a.x <= b}."""
    poly = np.ascontiguousarray(poly, dtype=float)
    return _IMPLS[_active["name"]]["clip"](poly, float(a[0]), float(a[1]), float(b))


def cut_areas(outer, inner):
    """Area of ``outer`` lying beyond each CCW edge of ``inner``."""
    outer = np.ascontiguousarray(outer, dtype=float)
    inner = np.ascontiguousarray(inner, dtype=float)
    return _IMPLS[_active["name"]]["cut_areas"](outer, inner)


def shoelace(poly):
    return float(_IMPLS[_active["name"]]["shoelace"](np.ascontiguousarray(poly, dtype=float)))
