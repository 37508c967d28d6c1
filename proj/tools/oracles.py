"""Independent reference values frozen into the C++ tests.

Nothing here shares code with the library: the icosphere is built from the
golden-ratio vertex set (areas are rotation invariant), triangle areas use
L'Huilier's theorem, and cube cells are integrated numerically.
"""

import itertools
import math

import numpy as np
from scipy import integrate


def icosahedron():
    p = (1 + 5 ** 0.5) / 2
    v = []
    for a, b in itertools.product((-1, 1), repeat=2):
        v += [(0, a, b * p), (a, b * p, 0), (b * p, 0, a)]
    v = np.array(v, float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    edge = min(np.linalg.norm(v[0] - v[j]) for j in range(1, 12))
    faces = []
    for i, j, k in itertools.combinations(range(12), 3):
        if all(abs(np.linalg.norm(v[a] - v[b]) - edge) < 1e-9 for a, b in ((i, j), (j, k), (i, k))):
            faces.append((i, j, k))
    assert len(faces) == 20
    return v, faces


def subdivide(v, faces):
    verts = [tuple(x) for x in v]
    cache = {}

    def mid(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            m = np.array(verts[a]) + np.array(verts[b])
            m /= np.linalg.norm(m)
            cache[key] = len(verts)
            verts.append(tuple(m))
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(verts), out


def lhuilier(a, b, c):
    def ang(x, y):
        return math.acos(max(-1.0, min(1.0, float(np.dot(x, y)))))

    sa, sb, sc = ang(b, c), ang(c, a), ang(a, b)
    s = (sa + sb + sc) / 2
    t = math.tan(s / 2) * math.tan((s - sa) / 2) * math.tan((s - sb) / 2) * math.tan((s - sc) / 2)
    return 4 * math.atan(math.sqrt(max(t, 0.0)))


def score(areas):
    d = np.log(np.asarray(areas))
    d -= d.mean()
    return float(np.sqrt(np.mean(d * d)))


def sphd_areas(n):
    v, f = icosahedron()
    for _ in range(n):
        v, f = subdivide(v, f)
    return [lhuilier(v[a], v[b], v[c]) for a, b, c in f], len(v)


def cube_cell(u0, u1, v0, v1):
    val, _ = integrate.dblquad(lambda y, x: (1 + x * x + y * y) ** -1.5, u0, u1, v0, v1, epsabs=1e-14, epsrel=1e-13)
    return val


def cube_areas(F):
    edges = np.linspace(-1, 1, F + 1)
    face = [cube_cell(edges[c], edges[c + 1], edges[r], edges[r + 1]) for r in range(F) for c in range(F)]
    return face * 6, face


def erp_areas(H, W):
    out = []
    for r in range(H):
        top = math.pi / 2 - math.pi * r / H
        bot = math.pi / 2 - math.pi * (r + 1) / H
        # integral of cos(lat) over the row, times the column width
        val, _ = integrate.quad(math.cos, bot, top, epsabs=1e-15)
        out += [val * 2 * math.pi / W] * W
    return out


if __name__ == "__main__":
    for n in (0, 1, 2, 3, 4, 5):
        a, nv = sphd_areas(n)
        print(f"sphd n={n}: F={len(a)} V={nv} sum={sum(a):.15f} score={score(a):.15f} min={min(a):.15e} max={max(a):.15e}")
    all20, face20 = cube_areas(20)
    print(f"cube F=20: sum={sum(all20):.15f} score={score(all20):.15f}")
    center = face20[9 * 20 + 9]
    corner = face20[0]
    print(f"cube F=20: center cell={center:.15e} corner cell={corner:.15e} ratio={center / corner:.15f}")
    e = erp_areas(40, 80)
    print(f"erp 40x80: sum={sum(e):.15f} score={score(e):.15f}")
