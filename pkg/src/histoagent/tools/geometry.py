"""Real geometric measurements over nuclei contours.

Contours are lists of [x, y] points describing a closed polygon; the closing
edge from the last point back to the first is implied.  These three tools do
actual computation instead of fixture playback: shoelace area, closed-path
perimeter, and a monotone-chain convex hull.
"""

from __future__ import annotations

from typing import Any

from .registry import ArgumentError, DegenerateContour, ToolDescriptor, ToolParam


def _as_points(contour: Any, minimum: int, tool: str) -> list[tuple[float, float]]:
    if not isinstance(contour, (list, tuple)):
        raise ArgumentError(f"{tool} requires a list of [x, y] points")
    points: list[tuple[float, float]] = []
    for entry in contour:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ArgumentError(f"{tool} requires [x, y] pairs, got {entry!r}")
        x, y = entry
        ok_x = isinstance(x, (int, float)) and not isinstance(x, bool)
        ok_y = isinstance(y, (int, float)) and not isinstance(y, bool)
        if not (ok_x and ok_y):
            raise ArgumentError(f"{tool} requires numeric coordinates, got {entry!r}")
        points.append((x, y))
    if len(points) < minimum:
        raise DegenerateContour(
            f"{tool} needs at least {minimum} points, got {len(points)}"
        )
    return points


def shoelace_area(points: list[tuple[float, float]]) -> float:
    acc = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def closed_perimeter(points: list[tuple[float, float]]) -> float:
    total = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        total += ((x2 - x1) ** 2 + (y2 - y1) ** 2) ** 0.5
    return total


def convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone chain; counterclockwise from the lexicographically smallest
    point, collinear boundary points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o: tuple, a: tuple, b: tuple) -> float:
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def get_contour_area(contour: Any) -> dict[str, Any]:
    points = _as_points(contour, 3, "get_contour_area")
    return {"contour_area": shoelace_area(points)}


def get_contour_perimeter(contour: Any) -> dict[str, Any]:
    points = _as_points(contour, 3, "get_contour_perimeter")
    return {"contour_perimeter": closed_perimeter(points)}


def get_contour_convex_hull(contour: Any) -> dict[str, Any]:
    # degenerate inputs (one point, all collinear) come back as the extremes
    points = _as_points(contour, 1, "get_contour_convex_hull")
    hull = convex_hull(points)
    return {"contour_convex_hull": [[x, y] for x, y in hull]}


AREA_DESCRIPTOR = ToolDescriptor(
    name="get_contour_area",
    category="nuclei_contour",
    description=(
        "Compute the enclosed area of a closed contour in squared pixel units "
        "using the shoelace formula. The contour is treated as a closed "
        "polygon; the edge from the last point back to the first is implied."
    ),
    notes=(
        "Self-intersecting contours are not detected; the shoelace value is "
        "returned as-is and can undercount such shapes.",
    ),
    params=(
        ToolParam("contour", "list", "Closed contour as a list of [x, y] pixel coordinates."),
    ),
    returns=(("contour_area", "Enclosed area in px^2."),),
)

PERIMETER_DESCRIPTOR = ToolDescriptor(
    name="get_contour_perimeter",
    category="nuclei_contour",
    description=(
        "Compute the perimeter of a closed contour in pixel units, including "
        "the implied closing edge from the last point back to the first."
    ),
    params=(
        ToolParam("contour", "list", "Closed contour as a list of [x, y] pixel coordinates."),
    ),
    returns=(("contour_perimeter", "Perimeter length in px."),),
)

HULL_DESCRIPTOR = ToolDescriptor(
    name="get_contour_convex_hull",
    category="nuclei_contour",
    description=(
        "Compute the convex hull of a contour's points. The hull is returned "
        "in counterclockwise order starting from the lexicographically "
        "smallest point; collinear boundary points are excluded. Degenerate "
        "inputs (a single point, or all points on one line) return just the "
        "extreme points."
    ),
    params=(
        ToolParam("contour", "list", "Contour as a list of [x, y] pixel coordinates."),
    ),
    returns=(
        ("contour_convex_hull", "Hull vertices as [x, y] pairs in counterclockwise order."),
    ),
)
