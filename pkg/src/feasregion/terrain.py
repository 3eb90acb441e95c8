"""Gridded height maps: text I/O, bilinear sampling with normals, generators.

Node (r, c) sits at (origin_x + c * cell, origin_y + r * cell); rows run
along +y.  File format:

    heightmap v1 <rows> <cols> <cell_m> <origin_x> <origin_y>
    z00 z01 ... z0(cols-1)
    ...
"""
from dataclasses import dataclass

import numpy as np

from .errors import OutOfBounds, ParseError

JUMP = 0.02  # [m] height step between neighbouring nodes treated as a discontinuity


@dataclass(frozen=True)
class HeightMap:
    z: np.ndarray  # (rows, cols) [m]
    cell: float  # [m]
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 2 or z.shape[0] < 2 or z.shape[1] < 2:
            raise ValueError("height map needs at least 2x2 nodes")
        if not self.cell > 0:
            raise ValueError("cell size must be positive")
        if not np.all(np.isfinite(z)):
            raise ValueError("elevations must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        gx, gy = _node_gradients(z, self.cell)
        object.__setattr__(self, "_gx", gx)
        object.__setattr__(self, "_gy", gy)

    @property
    def shape(self):
        return self.z.shape

    @property
    def extent(self):
        """(xmin, xmax, ymin, ymax) [m]."""
        x0, y0 = self.origin
        r, c = self.z.shape
        return x0, x0 + (c - 1) * self.cell, y0, y0 + (r - 1) * self.cell

    def contains(self, x, y):
        x0, x1, y0, y1 = self.extent
        return x0 <= x <= x1 and y0 <= y <= y1

    def _locate(self, x, y):
        if not self.contains(x, y):
            x0, x1, y0, y1 = self.extent
            raise OutOfBounds(f"({x:.6g}, {y:.6g}) outside [{x0:g}, {x1:g}] x [{y0:g}, {y1:g}]")
        u = (x - self.origin[0]) / self.cell
        v = (y - self.origin[1]) / self.cell
        r, c = self.z.shape
        j = min(int(np.floor(u)), c - 2)
        i = min(int(np.floor(v)), r - 2)
        return i, j, u - j, v - i

    @staticmethod
    def _bilinear(F, i, j, s, t):
        return (
            (1 - s) * (1 - t) * F[i, j]
            + s * (1 - t) * F[i, j + 1]
            + (1 - s) * t * F[i + 1, j]
            + s * t * F[i + 1, j + 1]
        )

    def height(self, x, y):
        i, j, s, t = self._locate(x, y)
        return float(self._bilinear(self.z, i, j, s, t))

    def normal(self, x, y):
        i, j, s, t = self._locate(x, y)
        gx = self._bilinear(self._gx, i, j, s, t)
        gy = self._bilinear(self._gy, i, j, s, t)
        n = np.array([-gx, -gy, 1.0])
        return n / np.linalg.norm(n)

    def sample(self, x, y):
        """(z [m], unit normal) at a horizontal position."""
        return self.height(x, y), self.normal(x, y)

    def slope_deg(self, x, y):
        return float(np.degrees(np.arccos(np.clip(self.normal(x, y)[2], -1.0, 1.0))))

    def nearest_jump(self, x, y, threshold=0.05, radius=0.5):
        """Distance [m] to the closest neighbour-pair step higher than threshold (inf if none)."""
        x0, y0 = self.origin
        h = self.cell
        r, c = self.z.shape
        jlo = max(int(np.floor((x - radius - x0) / h)), 0)
        jhi = min(int(np.ceil((x + radius - x0) / h)), c - 1)
        ilo = max(int(np.floor((y - radius - y0) / h)), 0)
        ihi = min(int(np.ceil((y + radius - y0) / h)), r - 1)
        Z = self.z[ilo:ihi + 1, jlo:jhi + 1]
        best = np.inf
        # steps between x-neighbours sit at the midpoint of the pair
        dx = np.abs(np.diff(Z, axis=1)) > threshold
        if dx.any():
            ii, jj = np.nonzero(dx)
            px = x0 + (jlo + jj + 0.5) * h
            py = y0 + (ilo + ii) * h
            best = min(best, float(np.hypot(px - x, py - y).min()))
        dy = np.abs(np.diff(Z, axis=0)) > threshold
        if dy.any():
            ii, jj = np.nonzero(dy)
            px = x0 + (jlo + jj) * h
            py = y0 + (ilo + ii + 0.5) * h
            best = min(best, float(np.hypot(px - x, py - y).min()))
        return best


def _node_gradients(z, h):
    """Central differences; where the two one-sided slopes disagree by a step, keep the steeper."""

    def axis_grad(Z):
        fwd = np.empty_like(Z)
        bwd = np.empty_like(Z)
        fwd[:, :-1] = (Z[:, 1:] - Z[:, :-1]) / h
        fwd[:, -1] = fwd[:, -2]
        bwd[:, 1:] = fwd[:, :-1]
        bwd[:, 0] = fwd[:, 0]
        g = 0.5 * (fwd + bwd)
        step = np.abs(fwd - bwd) * h > JUMP
        steeper = np.where(np.abs(fwd) >= np.abs(bwd), fwd, bwd)
        return np.where(step, steeper, g)

    gx = axis_grad(z)
    gy = axis_grad(z.T).T
    return gx, gy


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def dumps_heightmap(hm):
    r, c = hm.z.shape
    lines = [f"heightmap v1 {r} {c} {hm.cell!r} {hm.origin[0]!r} {hm.origin[1]!r}"]
    for row in hm.z:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_heightmap(path, hm):
    with open(path, "w") as fh:
        fh.write(dumps_heightmap(hm))


def loads_heightmap(text):
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1, column=1)
    head = lines[0].split()
    if len(head) != 7 or head[0] != "heightmap" or head[1] != "v1":
        raise ParseError("expected 'heightmap v1 <rows> <cols> <cell_m> <origin_x> <origin_y>'", line=1, column=1)
    try:
        rows, cols = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError("rows and cols must be integers", line=1, column=len(" ".join(head[:2])) + 2)
    vals = []
    col = len(" ".join(head[:4])) + 2
    for tok in head[4:]:
        try:
            vals.append(float(tok))
        except ValueError:
            raise ParseError(f"bad number {tok!r}", line=1, column=col)
        col += len(tok) + 1
    cell, ox, oy = vals
    if rows < 2 or cols < 2:
        raise ParseError("need at least 2 rows and 2 columns", line=1, column=1)
    if not cell > 0:
        raise ParseError("cell size must be positive", line=1, column=1)
    body = [(k + 2, ln) for k, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != rows:
        at = body[rows][0] if len(body) > rows else len(lines) + 1
        raise ParseError(f"expected {rows} elevation rows, found {len(body)}", line=at, column=1)
    z = np.empty((rows, cols))
    for r, (lineno, ln) in enumerate(body):
        toks = ln.split()
        if len(toks) != cols:
            raise ParseError(f"expected {cols} values, found {len(toks)}", line=lineno, column=1)
        pos = 0
        for c, tok in enumerate(toks):
            pos = ln.index(tok, pos)
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"bad number {tok!r}", line=lineno, column=pos + 1)
            if not np.isfinite(v):
                raise ParseError("elevation must be finite", line=lineno, column=pos + 1)
            z[r, c] = v
            pos += len(tok)
    return HeightMap(z, cell, (ox, oy))


def load_heightmap(path):
    with open(path) as fh:
        return loads_heightmap(fh.read())


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _grid(size, cell, origin):
    nx = int(round(size[0] / cell)) + 1
    ny = int(round(size[1] / cell)) + 1
    xs = origin[0] + cell * np.arange(nx)
    ys = origin[1] + cell * np.arange(ny)
    return np.meshgrid(xs, ys)


def flat(z=0.0, size=(4.0, 2.0), cell=0.02, origin=(-1.0, -1.0)):
    X, _ = _grid(size, cell, origin)
    return HeightMap(np.full(X.shape, float(z)), cell, origin)


def pallet(height=0.15, x_range=(0.5, 1.7), y_range=(0.0, 1.0), size=(4.0, 2.0), cell=0.02, origin=(-1.0, -1.0)):
    """Flat ground with one rectangular block of the given height."""
    X, Y = _grid(size, cell, origin)
    tol = 1e-9
    on = (
        (X >= x_range[0] - tol) & (X <= x_range[1] + tol)
        & (Y >= y_range[0] - tol) & (Y <= y_range[1] + tol)
    )
    return HeightMap(np.where(on, float(height), 0.0), cell, origin)


def brick_field(max_height=0.1, brick=0.2, size=(4.0, 2.0), cell=0.02, origin=(-1.0, -1.0), seed=0):
    """Square bricks of random height in [0, max_height], laid on a regular grid."""
    rng = np.random.default_rng(seed)
    X, Y = _grid(size, cell, origin)
    bi = np.floor((X - origin[0]) / brick + 1e-9).astype(int)
    bj = np.floor((Y - origin[1]) / brick + 1e-9).astype(int)
    heights = rng.uniform(0.0, max_height, size=(bj.max() + 1, bi.max() + 1))
    return HeightMap(heights[bj, bi], cell, origin)


def from_function(fn, size=(2.0, 2.0), cell=0.02, origin=(-1.0, -1.0)):
    X, Y = _grid(size, cell, origin)
    return HeightMap(fn(X, Y), cell, origin)
