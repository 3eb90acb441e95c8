"""Static SVG output: contacts, friction region (dashed), feasible region (solid)."""
import numpy as np

_W = 480
_PAD = 30


def _fmt(v):
    return f"{v:.3f}"


class _Frame:
    def __init__(self, points, width=_W, pad=_PAD):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-3)
        self.scale = (width - 2 * pad) / span.max()
        self.lo = lo
        self.pad = pad
        self.w = width
        self.h = int(np.ceil(span[1] * self.scale + 2 * pad))

    def __call__(self, p):
        x = self.pad + (p[0] - self.lo[0]) * self.scale
        y = self.h - self.pad - (p[1] - self.lo[1]) * self.scale
        return x, y


def _poly(frame, verts, style):
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (frame(v) for v in verts))
    return f'<polygon points="{pts}" {style}/>'


def region_svg(contacts_xy, friction=None, feasible=None, com=None, title="", extra=None):
    """SVG text; polygons are Polygon2 or vertex arrays, contacts an (n, 2) array."""
    contacts_xy = np.asarray(contacts_xy, dtype=float).reshape(-1, 2)
    polys = []
    for p in (friction, feasible, extra):
        if p is not None:
            polys.append(p.vertices if hasattr(p, "vertices") else np.asarray(p))
    pts = [contacts_xy] + polys
    if com is not None:
        pts.append(np.asarray(com, dtype=float).reshape(1, 2))
    fr = _Frame(np.vstack(pts))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.w}" height="{fr.h}" viewBox="0 0 {fr.w} {fr.h}">',
        f'<rect width="{fr.w}" height="{fr.h}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="8" y="16" font-family="sans-serif" font-size="12">{title}</text>')
    if friction is not None:
        v = friction.vertices if hasattr(friction, "vertices") else friction
        out.append(_poly(fr, v, 'fill="none" stroke="#1f77b4" stroke-width="1.5" stroke-dasharray="6,4" class="friction"'))
    if feasible is not None:
        v = feasible.vertices if hasattr(feasible, "vertices") else feasible
        out.append(_poly(fr, v, 'fill="#2ca02c" fill-opacity="0.15" stroke="#2ca02c" stroke-width="2" class="feasible"'))
    if extra is not None:
        v = extra.vertices if hasattr(extra, "vertices") else extra
        out.append(_poly(fr, v, 'fill="none" stroke="#ff7f0e" stroke-width="1" stroke-dasharray="2,2" class="scaled"'))
    for c in contacts_xy:
        x, y = fr(c)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="black" class="contact"/>')
    if com is not None:
        x, y = fr(np.asarray(com, dtype=float))
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="red" class="com"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
