"""Sliver-robust circle recovery from a perturbed point set.

Circumcircles of the Delaunay triangles of the input points are clustered
by single linkage; each cluster yields one circle with an area-weighted
center and a least-squares radius over the union of the member triangles'
vertices.  Near-degenerate triangles (tiny area or ill-conditioned
circumcenter) are excluded before clustering, so they contribute nothing.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import Delaunay, QhullError

from . import geom
from .errors import AllCollinear, CollinearPoints, TooFewPoints
from .geom import Ball, Point2


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


def _single_linkage(points: list[Point2], eps: float) -> list[list[int]]:
    """Connected components of the graph joining points closer than eps."""
    uf = UnionFind(len(points))
    for i in range(len(points)):
        xi, yi = points[i]
        for j in range(i + 1, len(points)):
            if math.hypot(points[j][0] - xi, points[j][1] - yi) <= eps:
                uf.union(i, j)
    return uf.groups()


def _bbox_diag(points) -> float:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    d = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    return d if d > 0 else 1.0


def vertex_cluster_merge(points: list[Point2], vertex_eps: float) -> list[Point2]:
    """Glue clusters of nearly coincident points into their centroids."""
    merged = []
    for group in _single_linkage(points, vertex_eps):
        merged.append(
            (
                sum(points[i][0] for i in group) / len(group),
                sum(points[i][1] for i in group) / len(group),
            )
        )
    return merged


def recover_spheres(
    points: list[Point2],
    cluster_eps: float | None = None,
    area_tol: float = 1e-12,
    shape_tol: float = 1e-7,
) -> list[Ball]:
    """Recover approximate Delaunay circles of a perturbed point set."""
    if len(points) < 3:
        raise TooFewPoints(f"need >= 3 points, got {len(points)}")
    diag = _bbox_diag(points)
    if cluster_eps is None:
        cluster_eps = 1e-6 * diag
    pts = np.asarray(points, dtype=float)
    try:
        tri = Delaunay(pts, qhull_options="Qbb Qc Qz")
    except QhullError as e:
        raise AllCollinear("input points are (nearly) collinear") from e
    if len(tri.simplices) == 0:
        raise AllCollinear("input points are (nearly) collinear")

    centers: list[Point2] = []
    areas: list[float] = []
    members: list[tuple[int, int, int]] = []
    for s in tri.simplices:
        p1, p2, p3 = (tuple(pts[k]) for k in s)
        area = abs(geom.triangle_area(p1, p2, p3))
        if area < area_tol * diag * diag:
            continue
        # shape guard: area relative to the squared longest edge bounds the
        # circumcenter's conditioning, so near-collinear slivers (whose
        # circumcenters fly off to infinity) are rejected here
        lmax2 = max(
            (p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2,
            (p2[0] - p3[0]) ** 2 + (p2[1] - p3[1]) ** 2,
            (p3[0] - p1[0]) ** 2 + (p3[1] - p1[1]) ** 2,
        )
        if area < shape_tol * lmax2:
            continue
        try:
            centers.append(geom.circumcenter(p1, p2, p3))
        except CollinearPoints:
            continue  # unstable circumcircle: ignore the sliver
        areas.append(area)
        members.append(tuple(int(k) for k in s))
    if not centers:
        raise AllCollinear("no stable triangle survived filtering")

    balls = []
    for group in _single_linkage(centers, cluster_eps):
        wsum = sum(areas[i] for i in group)
        cx = sum(centers[i][0] * areas[i] for i in group) / wsum
        cy = sum(centers[i][1] * areas[i] for i in group) / wsum
        verts = sorted({k for i in group for k in members[i]})
        r = math.sqrt(
            sum((pts[k][0] - cx) ** 2 + (pts[k][1] - cy) ** 2 for k in verts)
            / len(verts)
        )
        balls.append(Ball((cx, cy), r))
    balls.sort(key=lambda b: (b.center[0], b.center[1]))
    return balls
