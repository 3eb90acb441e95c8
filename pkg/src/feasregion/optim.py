"""Dense two-phase simplex LP solver plus the small 2D routines the planners use.

Tolerances are absolute: feasibility 1e-7 (N for force rows, m for position
rows), optimality 1e-9.  Rows are equilibrated internally, so pivot
tolerances act on unit-scale coefficients.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, Empty, EmptyPolygon, NumericalBreakdown
from .geometry import Polygon2, contains, _segment_distance

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
BLAND_AFTER = 50


@dataclass
class LinearProgram:
    """maximize objective . x  s.t.  A x = b,  C x <= d,  lo <= x <= hi.

    ``bounds`` is a list of (lo, hi) pairs with None meaning infinite; when
    omitted every variable is free.
    """

    objective: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    C: np.ndarray = None
    d: np.ndarray = None
    bounds: list = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.shape[0]
        self.A, self.b = _rows(self.A, self.b, n, "A/b")
        self.C, self.d = _rows(self.C, self.d, n, "C/d")
        if self.bounds is None:
            self.bounds = [(None, None)] * n
        if len(self.bounds) != n:
            raise DimensionMismatch(f"{len(self.bounds)} bounds for {n} variables")
        for arr in (self.objective, self.A, self.b, self.C, self.d):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def n(self):
        return self.objective.shape[0]


def _rows(M, v, n, name):
    if M is None:
        return np.zeros((0, n)), np.zeros(0)
    M = np.asarray(M, dtype=float).reshape(-1, n)
    v = np.asarray(v, dtype=float).reshape(-1)
    if M.shape[0] != v.shape[0]:
        raise DimensionMismatch(f"{name}: {M.shape[0]} rows vs {v.shape[0]} entries")
    return M, v


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray = None
    objective_value: float = float("nan")
    iterations: int = 0
    duals_eq: np.ndarray = None
    duals_ineq: np.ndarray = None
    # when infeasible: (y, z) with A^T y + C^T z = 0 on free variables,
    # z >= 0 and b.y + d.z < 0
    certificate: tuple = None

    @property
    def optimal(self):
        return self.status == "optimal"


@dataclass
class _Standard:
    T: np.ndarray  # tableau (m+1, ncols+1)
    basis: np.ndarray
    allowed: np.ndarray  # columns that may enter in phase 2
    M: np.ndarray  # x = offset + M @ y[:n_struct]
    offset: np.ndarray
    n_struct: int
    init_col: np.ndarray  # column that formed the initial identity, per row
    row_factor: np.ndarray  # original-row dual = tableau dual * row_factor
    m_eq: int
    m_ub: int
    iterations: int = 0
    feasible: bool = True
    max_iter: int = 0
    art_start: int = 0
    extra: dict = field(default_factory=dict)


def _standardize(lp):
    n = lp.n
    cols = []  # (var index, coefficient) per structural column
    offset = np.zeros(n)
    upper_rows = []  # (struct column, bound)
    for j, (lo, hi) in enumerate(lp.bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            cols = None
            break
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                upper_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    if cols is None:
        return None
    N = len(cols)
    M = np.zeros((n, N))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s

    A_eq = lp.A @ M
    r_eq = lp.b - lp.A @ offset
    A_ub = np.vstack([lp.C @ M, np.zeros((len(upper_rows), N))])
    r_ub = np.concatenate([lp.d - lp.C @ offset, np.array([u for _, u in upper_rows])])
    for i, (k, _) in enumerate(upper_rows):
        A_ub[lp.C.shape[0] + i, k] = 1.0

    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub
    rows = np.vstack([A_eq, A_ub])
    rhs = np.concatenate([r_eq, r_ub])
    scale = np.abs(rows).max(axis=1) if N else np.zeros(m)
    scale[scale == 0.0] = 1.0
    rows = rows / scale[:, None]
    rhs = rhs / scale
    sign = np.where(rhs < 0.0, -1.0, 1.0)
    rows *= sign[:, None]
    rhs *= sign

    needs_art = np.ones(m, dtype=bool)
    needs_art[m_eq:] = sign[m_eq:] < 0.0
    n_art = int(needs_art.sum())
    ncols = N + m_ub + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :N] = rows
    T[:m, -1] = rhs
    basis = np.empty(m, dtype=np.int64)
    init_col = np.empty(m, dtype=np.int64)
    art = N + m_ub
    for i in range(m):
        if i >= m_eq:
            s_col = N + (i - m_eq)
            T[i, s_col] = sign[i]
        if needs_art[i]:
            T[i, art] = 1.0
            basis[i] = art
            init_col[i] = art
            art += 1
        else:
            basis[i] = N + (i - m_eq)
            init_col[i] = basis[i]
    allowed = np.ones(ncols, dtype=np.bool_)
    allowed[N + m_ub:] = False
    return _Standard(
        T=T,
        basis=basis,
        allowed=allowed,
        M=M,
        offset=offset,
        n_struct=N,
        init_col=init_col,
        row_factor=sign / scale,
        m_eq=m_eq,
        m_ub=lp.C.shape[0],
        max_iter=max(100, 10 * (ncols + m)),
        art_start=N + m_ub,
    )


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    f = T[:, col].copy()
    f[row] = 0.0
    T -= np.outer(f, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _phase_one(st):
    T, basis = st.T, st.basis
    m = T.shape[0] - 1
    art_rows = basis >= st.art_start
    if not art_rows.any():
        return True
    T[m, :] = -T[:m][art_rows].sum(axis=0)
    T[m, st.art_start:-1] = 0.0
    allowed = np.ones(T.shape[1] - 1, dtype=np.bool_)
    status, it = kernels.simplex_iterate(T, basis, allowed, st.max_iter, PIVOT_TOL, BLAND_AFTER)
    st.iterations += it
    if status == kernels.ITERATION_CAP:
        raise NumericalBreakdown(f"phase 1 hit the iteration cap ({st.max_iter})")
    tol = 1e-9 * max(1.0, float(np.abs(T[:m, -1]).max()))
    if -T[m, -1] > tol:
        return False
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= st.art_start:
            row = np.abs(T[i, : st.art_start])
            j = int(np.argmax(row)) if row.size else -1
            if j >= 0 and row[j] > PIVOT_TOL:
                _pivot(T, basis, i, j)
                st.iterations += 1
            else:
                T[i, -1] = 0.0  # redundant row
    return True


def _set_objective(st, c_struct):
    T, basis = st.T, st.basis
    m = T.shape[0] - 1
    c_full = np.zeros(T.shape[1] - 1)
    c_full[: st.n_struct] = c_struct
    cb = c_full[basis]
    T[m, :-1] = cb @ T[:m, :-1] - c_full
    T[m, -1] = cb @ T[:m, -1]


def _extract(st, lp, status, it):
    T, basis = st.T, st.basis
    m = T.shape[0] - 1
    y = np.zeros(T.shape[1] - 1)
    y[basis] = T[:m, -1]
    x = st.offset + st.M @ y[: st.n_struct]
    duals = T[m, st.init_col] * st.row_factor
    return LPSolution(
        status=status,
        x=x,
        objective_value=float(lp.objective @ x),
        iterations=it,
        duals_eq=duals[: st.m_eq],
        duals_ineq=duals[st.m_eq: st.m_eq + st.m_ub],
    )


def _phase_two(st, lp):
    c_struct = st.M.T @ lp.objective
    _set_objective(st, c_struct)
    status, it = kernels.simplex_iterate(
        st.T, st.basis, st.allowed, st.max_iter, OPT_TOL, BLAND_AFTER
    )
    st.iterations += it
    if status == kernels.ITERATION_CAP:
        raise NumericalBreakdown(f"phase 2 hit the iteration cap ({st.max_iter})")
    if status == kernels.UNBOUNDED:
        return LPSolution(status="unbounded", iterations=st.iterations)
    return _extract(st, lp, "optimal", st.iterations)


def solve_lp(lp):
    """Solve with a cold-started two-phase dense simplex.

    Deterministic: pivot choices depend only on the data (Dantzig's rule,
    Bland's rule after 50 consecutive degenerate pivots, lowest basic index
    on ratio ties).
    """
    st = _standardize(lp)
    if st is None:
        return LPSolution(status="infeasible")
    if not _phase_one(st):
        # phase-1 duals; an artificial column costs -1, so its reduced cost is pi_i + 1
        pi = st.T[-1, st.init_col] - (st.init_col >= st.art_start)
        y = pi * st.row_factor
        cert = (y[: st.m_eq], y[st.m_eq: st.m_eq + st.m_ub])
        return LPSolution(status="infeasible", iterations=st.iterations, certificate=cert)
    return _phase_two(st, lp)


class SimplexSession:
    """Fixed constraint set, many objectives; each solve warm-starts from the last basis."""

    def __init__(self, lp):
        self.lp = lp
        self._st = _standardize(lp)
        self.feasible = self._st is not None and _phase_one(self._st)
        self.calls = 0

    def maximize(self, objective):
        if not self.feasible:
            return LPSolution(status="infeasible")
        self.calls += 1
        self.lp.objective = np.asarray(objective, dtype=float).reshape(-1)
        start = self._st.iterations
        sol = _phase_two(self._st, self.lp)
        sol.iterations = self._st.iterations - start
        return sol


# ---------------------------------------------------------------------------
# plain-text dump
# ---------------------------------------------------------------------------

def _fmt_row(values):
    return " ".join(repr(float(v)) for v in values)


def dump_lp(lp):
    lines = ["max " + _fmt_row(lp.objective), "A|b"]
    lines += [_fmt_row(r) + " | " + repr(float(v)) for r, v in zip(lp.A, lp.b)]
    lines.append("C|d")
    lines += [_fmt_row(r) + " | " + repr(float(v)) for r, v in zip(lp.C, lp.d)]
    lines.append("bounds")
    for lo, hi in lp.bounds:
        lines.append(f"{'-inf' if lo is None else repr(float(lo))} {'inf' if hi is None else repr(float(hi))}")
    return "\n".join(lines) + "\n"


def load_lp(text):
    section = None
    c = None
    A, b, C, d, bounds = [], [], [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("max"):
            c = [float(t) for t in line[3:].split()]
        elif line in ("A|b", "C|d", "bounds"):
            section = line
        elif section in ("A|b", "C|d"):
            lhs, _, rhs = line.partition("|")
            row = [float(t) for t in lhs.split()]
            (A if section == "A|b" else C).append(row)
            (b if section == "A|b" else d).append(float(rhs))
        elif section == "bounds":
            lo, hi = line.split()
            lo = None if lo == "-inf" else float(lo)
            hi = None if hi == "inf" else float(hi)
            bounds.append((lo, hi))
    n = len(c)
    return LinearProgram(
        objective=c,
        A=np.array(A).reshape(-1, n),
        b=np.array(b),
        C=np.array(C).reshape(-1, n),
        d=np.array(d),
        bounds=bounds or None,
    )


# ---------------------------------------------------------------------------
# 2D helpers
# ---------------------------------------------------------------------------

def _halfspaces(p):
    try:
        return p.A, p.b
    except Empty as exc:
        raise EmptyPolygon(str(exc)) from exc


def chebyshev_margin(p, c):
    """Radius [m] of the largest ball centred at c inside p; negative when c is outside."""
    A, b = _halfspaces(p)
    c = np.asarray(c, dtype=float)
    return float(np.min((b - A @ c) / np.linalg.norm(A, axis=1)))


def chebyshev_margin_lp(p, c):
    """Same quantity as :func:`chebyshev_margin`, obtained by solving the margin LP."""
    A, b = _halfspaces(p)
    c = np.asarray(c, dtype=float)
    norms = np.linalg.norm(A, axis=1)
    lp = LinearProgram(objective=[1.0], C=norms[:, None], d=b - A @ c)
    sol = solve_lp(lp)
    return float(sol.x[0])


def chebyshev_center(p):
    """Center and radius of the largest inscribed ball (LP)."""
    A, b = _halfspaces(p)
    norms = np.linalg.norm(A, axis=1)
    lp = LinearProgram(objective=[0.0, 0.0, 1.0], C=np.column_stack([A, norms]), d=b)
    sol = solve_lp(lp)
    return sol.x[:2], float(sol.x[2])


def closest_point_in_polygon(p, c):
    """Euclidean projection of c onto p by enumerating edges and vertices."""
    if p is None:
        raise EmptyPolygon("no polygon")
    try:
        verts = p.vertices
    except Empty as exc:
        raise EmptyPolygon(str(exc)) from exc
    c = np.asarray(c, dtype=float)
    if contains(p, c, 0.0):
        return c.copy()
    best, best_d = None, np.inf
    k = len(verts)
    for i in range(k):
        a, q = verts[i], verts[(i + 1) % k]
        d = q - a
        t = min(1.0, max(0.0, float((c - a) @ d) / float(d @ d)))
        x = a + t * d
        dist = _segment_distance(c, a, q)
        if dist < best_d:
            best, best_d = x, dist
    return best
