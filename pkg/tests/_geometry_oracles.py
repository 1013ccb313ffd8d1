"""Independent geometry oracles for the contour tools.

Deliberately written against different algorithms than the implementation:
the hull oracle does an all-subsets membership test per point, the area
oracle rasterizes with vertical scanlines.  Slow and obvious beats fast
and clever here.
"""

from __future__ import annotations

import math


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _strictly_between(a, b, p) -> bool:
    if cross(a, b, p) != 0:
        return False
    dot = (p[0] - a[0]) * (p[0] - b[0]) + (p[1] - a[1]) * (p[1] - b[1])
    return dot < 0


def _inside_or_on_triangle(a, b, c, p) -> bool:
    s1 = cross(a, b, p)
    s2 = cross(b, c, p)
    s3 = cross(c, a, p)
    if cross(a, b, c) == 0:
        return False
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def brute_force_hull_vertices(points) -> set:
    """Hull vertex set by elimination, exact for integer coordinates.

    A point is not a hull vertex when it lies inside or on a triangle of
    three other points, or strictly between two other points.  Whatever
    survives is a vertex.
    """
    pts = sorted(set((x, y) for x, y in points))
    vertices = set()
    for p in pts:
        others = [q for q in pts if q != p]
        eliminated = False
        for i in range(len(others)):
            for j in range(i + 1, len(others)):
                if _strictly_between(others[i], others[j], p):
                    eliminated = True
                    break
            if eliminated:
                break
        if not eliminated:
            for i in range(len(others)):
                for j in range(i + 1, len(others)):
                    for k in range(j + 1, len(others)):
                        if _inside_or_on_triangle(others[i], others[j], others[k], p):
                            eliminated = True
                            break
                    if eliminated:
                        break
                if eliminated:
                    break
        if not eliminated:
            vertices.add(p)
    return vertices


def scanline_area(points, columns: int = 2000) -> float:
    """Even-odd rasterized polygon area via vertical strips.

    Midpoint sampling per column; error shrinks with strip width, so for
    smooth-ish polygons a 2000-column pass lands well inside 1%.
    """
    xs = [p[0] for p in points]
    lo, hi = min(xs), max(xs)
    if hi <= lo:
        return 0.0
    width = (hi - lo) / columns
    n = len(points)
    total = 0.0
    for c in range(columns):
        xm = lo + (c + 0.5) * width
        crossings = []
        for i in range(n):
            x1, y1 = points[i]
            x2, y2 = points[(i + 1) % n]
            if x1 == x2:
                continue
            # half-open rule so a vertex on the scanline counts once
            if (x1 <= xm < x2) or (x2 <= xm < x1):
                t = (xm - x1) / (x2 - x1)
                crossings.append(y1 + t * (y2 - y1))
        crossings.sort()
        for k in range(0, len(crossings) - 1, 2):
            total += crossings[k + 1] - crossings[k]
    return total * width


def pairwise_perimeter(points) -> float:
    total = 0.0
    n = len(points)
    for i in range(n):
        total += math.dist(points[i], points[(i + 1) % n])
    return total


def star_polygon(rng, n_min: int = 8, n_max: int = 16):
    """Random simple polygon: sorted angles around the origin, random radii."""
    n = rng.randint(n_min, n_max)
    angles = sorted(rng.uniform(0.0, 2.0 * math.pi) for _ in range(n))
    # keep angular gaps sane so no two vertices collapse
    for i in range(1, n):
        if angles[i] - angles[i - 1] < 1e-3:
            angles[i] = angles[i - 1] + 1e-3
    return [
        (r * math.cos(a), r * math.sin(a))
        for a, r in ((a, rng.uniform(2.0, 10.0)) for a in angles)
    ]
