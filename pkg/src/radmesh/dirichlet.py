"""Discrete Dirichlet functional on power diagrams and the ball-relaxation loop.

Each bounded cell is triangulated by the Delaunay triangulation of its own
vertex set (the projection of its dual face onto the paraboloid).  The
functional sums, per cell, the squared distance from the ball center to the
circumcenters of these auxiliary triangles, weighted by triangle area.  It
vanishes exactly when every cell is cyclic about its own ball center, i.e.
when the radical partition is a Delaunay partition.

The iteration alternates diagram rebuilds with either the heuristic
area-weighted center / least-squares radius update (with relaxation) or a
finite-difference gradient descent step with Armijo backtracking.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import geom
from .diagram import PowerCell, PowerDiagram, default_merge_eps, extract_diagram
from .errors import (
    DegenerateCell,
    DegenerateScene,
    Diverged,
    TooFewBalls,
    AllCollinear,
    TopologyFlip,
    UnboundedCell,
    ZeroArea,
)
from .geom import Ball, Point2
from .triangulation import build_regular


@dataclass
class AuxTriangle:
    cell_index: int
    vertex_positions: tuple[Point2, Point2, Point2]
    circumcenter: Point2
    area: float


@dataclass
class OptimizerConfig:
    theta: float = 0.5
    max_iters: int = 2000
    tau_tol: float | None = None  # None: 1e-10 * bbox_diag^2
    fi_tol: float = 0.0  # 0 disables the F_I stopping test
    mode: str = "heuristic"  # heuristic | fd_gradient | hybrid
    fd_step: float | None = None  # None: 1e-6 * bbox_diag
    eliminate_redundant: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError("theta must be in (0, 1]")
        if self.mode not in ("heuristic", "fd_gradient", "hybrid"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tau_tol is not None and self.tau_tol <= 0:
            raise ValueError("tau_tol must be > 0")


@dataclass
class HistoryRecord:
    iteration: int
    fi: float
    max_abs_tau: float
    moved: int
    eliminated: int


@dataclass
class OptimizerState:
    balls: list[Ball]
    diagram: PowerDiagram
    fi: float
    max_abs_tau: float
    iteration: int
    history: list[HistoryRecord] = field(default_factory=list)
    converged: bool = False


def _incircle(a, b, c, d) -> float:
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    return (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )


def _delaunay_convex(points: list[Point2]) -> list[tuple[int, int, int]]:
    """Delaunay triangulation of a CCW convex polygon's vertex set.

    Fan triangulation followed by Lawson flips; the float in-circle test is
    sufficient here because ties leave the circumcenters unchanged.
    """
    m = len(points)
    tris = [[0, k, k + 1] for k in range(1, m - 1)]
    for _ in range(4 * m * m):
        edges: dict[frozenset, list[tuple[int, int]]] = {}
        for ti, t in enumerate(tris):
            for k in range(3):
                e = frozenset((t[(k + 1) % 3], t[(k + 2) % 3]))
                edges.setdefault(e, []).append((ti, t[k]))
        done = True
        for e, owners in edges.items():
            if len(owners) != 2:
                continue
            (t1, p), (t2, q) = owners
            u, v = tuple(e)
            a, b, c = points[tris[t1][0]], points[tris[t1][1]], points[tris[t1][2]]
            s = _incircle(a, b, c, points[q])
            scale = max(abs(x) for pt in (a, b, c, points[q]) for x in pt) or 1.0
            if s <= 1e-12 * scale**4:
                continue
            if (
                geom.triangle_area(points[p], points[u], points[q]) <= 0
                or geom.triangle_area(points[p], points[q], points[v]) <= 0
            ):
                u, v = v, u
                if (
                    geom.triangle_area(points[p], points[u], points[q]) <= 0
                    or geom.triangle_area(points[p], points[q], points[v]) <= 0
                ):
                    continue
            tris[t1] = [p, u, q]
            tris[t2] = [p, q, v]
            done = False
            break
        if done:
            break
    return [tuple(t) for t in tris]


def aux_triangulate_cell(cell: PowerCell, domain=None) -> list[AuxTriangle]:
    """Delaunay triangulation of a bounded convex cell's vertex set.

    With a convex ``domain`` polygon the cell is clipped to it first, which
    also gives unbounded cells a finite auxiliary triangulation.
    """
    if domain is not None:
        from .diagram import clip_cell

        pts = clip_cell(cell, domain)
        # clipping can emit the same corner twice (intersections computed on
        # both adjacent edges); drop near-duplicate consecutive vertices
        if pts:
            span = max(
                math.hypot(p[0] - q[0], p[1] - q[1]) for p in domain for q in domain
            )
            eps = 1e-9 * span
            dedup = []
            for p in pts:
                if not dedup or math.hypot(
                    p[0] - dedup[-1][0], p[1] - dedup[-1][1]
                ) > eps:
                    dedup.append(p)
            if len(dedup) > 1 and math.hypot(
                dedup[0][0] - dedup[-1][0], dedup[0][1] - dedup[-1][1]
            ) <= eps:
                dedup.pop()
            pts = dedup
    else:
        if not cell.bounded:
            raise UnboundedCell(f"cell of ball {cell.ball_index} is unbounded")
        pts = cell.vertex_positions()
    if len(pts) < 3:
        raise DegenerateCell(f"cell of ball {cell.ball_index} has < 3 vertices")
    span = max(
        max(abs(p[0] - pts[0][0]), abs(p[1] - pts[0][1])) for p in pts
    )
    if span == 0.0:
        raise DegenerateCell(f"cell of ball {cell.ball_index} has collapsed")
    if geom.polygon_area(pts) < 0:
        pts = pts[::-1]
    out = []
    for i, j, k in _delaunay_convex(pts) if len(pts) > 3 else [(0, 1, 2)]:
        tri = (pts[i], pts[j], pts[k])
        area = geom.triangle_area(*tri)
        if abs(area) <= 1e-14 * span * span:
            continue
        out.append(AuxTriangle(cell.ball_index, tri, geom.circumcenter(*tri), abs(area)))
    if not out:
        raise DegenerateCell(f"cell of ball {cell.ball_index} is degenerate")
    return out


def heuristic_center(cell: PowerCell, aux: list[AuxTriangle]) -> Point2:
    """Area-weighted mean of the auxiliary circumcenters."""
    total = sum(t.area for t in aux)
    if total <= 0:
        raise ZeroArea(f"cell of ball {cell.ball_index} has zero aux area")
    x = sum(t.circumcenter[0] * t.area for t in aux) / total
    y = sum(t.circumcenter[1] * t.area for t in aux) / total
    return (x, y)


def heuristic_radius(c_new: Point2, cell_vertices: list[Point2]) -> float:
    """Least-squares radius: root mean square distance to the cell vertices."""
    m = len(cell_vertices)
    ssum = sum(
        (v[0] - c_new[0]) ** 2 + (v[1] - c_new[1]) ** 2 for v in cell_vertices
    )
    return math.sqrt(ssum / m)


def cell_fi(center: Point2, aux: list[AuxTriangle]) -> float:
    """Cell contribution to the functional for a fixed auxiliary triangulation."""
    return 0.5 * sum(
        ((center[0] - t.circumcenter[0]) ** 2 + (center[1] - t.circumcenter[1]) ** 2)
        * t.area
        for t in aux
    )


def frozen_center_gradient(center: Point2, aux: list[AuxTriangle]) -> Point2:
    """d(cell_fi)/d(center) with the diagram combinatorics held fixed."""
    gx = sum((center[0] - t.circumcenter[0]) * t.area for t in aux)
    gy = sum((center[1] - t.circumcenter[1]) * t.area for t in aux)
    return (gx, gy)


def _is_free(ball: Ball) -> bool:
    return not (ball.fix_center and ball.fix_radius)


def _cell_aux(balls, diagram: PowerDiagram):
    """Auxiliary triangulations of the bounded cells of free alive balls."""
    aux_by_ball = {}
    for cell in diagram.cells:
        if cell is None or (not cell.bounded and diagram.domain is None):
            continue
        ball = balls[cell.ball_index]
        if not ball.alive or not _is_free(ball):
            continue
        try:
            aux_by_ball[cell.ball_index] = aux_triangulate_cell(cell, diagram.domain)
        except DegenerateCell:
            continue
    return aux_by_ball


def evaluate_FI(balls: list[Ball], diagram: PowerDiagram) -> float:
    """Dirichlet functional: bounded cells of free balls only."""
    total = 0.0
    for i, aux in _cell_aux(balls, diagram).items():
        total += cell_fi(balls[i].center, aux)
    return total


def bbox_diag(balls) -> float:
    xs = [b.center[0] for b in balls if b.alive]
    ys = [b.center[1] for b in balls if b.alive]
    d = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    return d if d > 0 else 1.0


def _rebuild(balls, merge_eps=None):
    t = build_regular(balls)
    return t, extract_diagram(t, balls, merge_eps)


def _proposals(balls, diagram):
    """Jacobi-style update targets (c_new, R_new) per free ball."""
    proposals = {}
    for i, aux in _cell_aux(balls, diagram).items():
        cell = diagram.cells[i]
        try:
            c_new = heuristic_center(cell, aux)
        except ZeroArea:
            continue
        r_new = heuristic_radius(c_new, cell.vertex_positions())
        proposals[i] = (c_new, r_new)
    # fixed-center balls with unbounded cells (boundary protectors) still
    # adapt their free radii to the finite dual vertices of their fan
    for cell in diagram.cells:
        if cell is None or cell.bounded or not cell.vertices:
            continue
        b = balls[cell.ball_index]
        if b.alive and b.fix_center and not b.fix_radius:
            proposals[cell.ball_index] = (
                b.center,
                heuristic_radius(b.center, cell.vertex_positions()),
            )
    return proposals


def relax_step(state: OptimizerState, config: OptimizerConfig) -> list[Ball]:
    """One relaxed heuristic update of all free balls (simultaneous commit)."""
    balls = state.balls
    proposals = _proposals(balls, state.diagram)
    theta = config.theta
    new_balls = []
    for i, b in enumerate(balls):
        if i not in proposals or not b.alive:
            new_balls.append(copy.copy(b))
            continue
        c_new, r_new = proposals[i]
        cx, cy = b.center
        r = b.radius
        if not b.fix_center:
            cx = cx * (1 - theta) + c_new[0] * theta
            cy = cy * (1 - theta) + c_new[1] * theta
        if not b.fix_radius:
            r = r * (1 - theta) + r_new * theta
        new_balls.append(
            Ball((cx, cy), r, b.fix_center, b.fix_radius, b.alive)
        )
    return new_balls


def fd_gradient(balls: list[Ball], diagram: PowerDiagram, h: float, on_flip="raise"):
    """Central-difference gradient of F_I with full diagram rebuilds.

    Returns one (dF/dcx, dF/dcy, dF/dR) triple per ball; entries for fixed
    coordinates are zero.  With ``on_flip="raise"`` a probe that changes the
    triangulation combinatorics raises TopologyFlip (shrink h).  Near a
    Delaunay partition every multi-vertex cell is an exact cocircularity, so
    probes flip its tie diagonals for any h; ``on_flip="ignore"`` accepts
    those probes, which is sound because F_I is continuous across tie flips.
    """
    if h <= 0:
        raise ValueError("fd step must be > 0")
    if on_flip not in ("raise", "ignore"):
        raise ValueError("on_flip must be 'raise' or 'ignore'")
    base_t = build_regular(balls)
    base_edges = base_t.edge_set()

    def probe(i, attr, delta):
        probed = [copy.copy(b) for b in balls]
        b = probed[i]
        if attr == "x":
            b.center = (b.center[0] + delta, b.center[1])
        elif attr == "y":
            b.center = (b.center[0], b.center[1] + delta)
        else:
            b.radius = b.radius + delta
        t, d = _rebuild(probed)
        if on_flip == "raise" and t.edge_set() != base_edges:
            raise TopologyFlip(
                f"triangulation changed while probing ball {i} ({attr}{delta:+g})"
            )
        return evaluate_FI(probed, d)

    grads = []
    for i, b in enumerate(balls):
        gx = gy = gr = 0.0
        if b.alive and not b.fix_center:
            gx = (probe(i, "x", h) - probe(i, "x", -h)) / (2 * h)
            gy = (probe(i, "y", h) - probe(i, "y", -h)) / (2 * h)
        if b.alive and not b.fix_radius:
            if b.radius >= h:
                gr = (probe(i, "r", h) - probe(i, "r", -h)) / (2 * h)
            else:
                f0 = evaluate_FI(balls, diagram)
                gr = (probe(i, "r", h) - f0) / h
        grads.append((gx, gy, gr))
    return grads


def _free_coord_index(balls):
    """Map free ball coordinates to positions in the unknown vector."""
    cols = {}
    k = 0
    for i, b in enumerate(balls):
        if not b.alive:
            continue
        if not b.fix_center:
            cols[(i, "x")] = k
            cols[(i, "y")] = k + 1
            k += 2
        if not b.fix_radius:
            cols[(i, "r")] = k
            k += 1
    return cols, k


def _tau_system(balls, triangulation, active):
    """Power residuals tau(v_k) and their Jacobian w.r.t. the free coordinates.

    v_k solves the 2x2 dual-vertex system of its triangle; differentiating
    that system gives closed-form rows, so no diagram rebuilds are needed.
    """
    cols, ncols = _free_coord_index(balls)
    r = np.zeros(len(active))
    J = np.zeros((len(active), ncols))
    for row, ti in enumerate(active):
        tri = triangulation.triangles[ti]
        i, j, l = tri.ball_indices
        ci = np.array(balls[i].center)
        cj = np.array(balls[j].center)
        cl = np.array(balls[l].center)
        v = np.array(tri.orthocenter)
        A = np.array([cj - ci, cl - ci])
        w = np.linalg.solve(A.T, v - ci)  # A^{-T} (v - c_i)
        r[row] = tri.tau
        d_i = 2.0 * (ci - v) * (1.0 - (w[0] + w[1]))
        d_j = 2.0 * w[0] * (cj - v)
        d_l = 2.0 * w[1] * (cl - v)
        for bi, dc, wk in ((i, d_i, 1.0 - (w[0] + w[1])), (j, d_j, w[0]), (l, d_l, w[1])):
            if (bi, "x") in cols:
                J[row, cols[(bi, "x")]] += dc[0]
                J[row, cols[(bi, "y")]] += dc[1]
            if (bi, "r") in cols:
                J[row, cols[(bi, "r")]] += -2.0 * balls[bi].radius * wk
    return r, J, cols


def _apply_delta(balls, cols, dx):
    out = []
    for i, b in enumerate(balls):
        nb = copy.copy(b)
        if (i, "x") in cols:
            nb.center = (
                b.center[0] + dx[cols[(i, "x")]],
                b.center[1] + dx[cols[(i, "y")]],
            )
        if (i, "r") in cols:
            nb.radius = max(0.0, b.radius + dx[cols[(i, "r")]])
        out.append(nb)
    return out


def _active_triangles(triangulation, diagram):
    """Triangles whose dual vertex belongs to a bounded cell of a free ball."""
    active = set()
    for cell in diagram.bounded_cells():
        if not cell.free:
            continue
        for v in cell.vertices:
            active.update(v.source_triangles)
    return sorted(active)


def _gauss_newton_step(balls, triangulation, diagram, merge_eps):
    """Damped Gauss-Newton step driving all active tau(v_k) to zero.

    Returns (new_balls, moved) or (balls, 0) when no damping level helps.
    """
    active = _active_triangles(triangulation, diagram)
    if not active:
        return balls, 0
    r, J, cols = _tau_system(balls, triangulation, active)
    if not cols:
        return balls, 0
    base = float(r @ r)
    scale = float(np.abs(J).max()) or 1.0
    lam = 1e-10 * scale * scale
    for _ in range(8):
        lhs = np.vstack([J, math.sqrt(lam) * np.eye(J.shape[1])])
        rhs = np.concatenate([-r, np.zeros(J.shape[1])])
        dx, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        alpha = 1.0
        for _ in range(6):
            trial = _apply_delta(balls, cols, alpha * dx)
            try:
                t2, d2 = _rebuild(trial, merge_eps)
            except (TooFewBalls, AllCollinear):
                alpha *= 0.5
                continue
            a2 = _active_triangles(t2, d2)
            r2 = np.array([t2.triangles[ti].tau for ti in a2])
            if a2 and float(r2 @ r2) / len(a2) < base / len(active):
                return trial, len({i for i, _ in cols})
            alpha *= 0.5
        lam *= 100.0
    return balls, 0


def _apply_descent(balls, grads, alpha):
    out = []
    for b, (gx, gy, gr) in zip(balls, grads):
        nb = copy.copy(b)
        if b.alive and not b.fix_center:
            nb.center = (b.center[0] - alpha * gx, b.center[1] - alpha * gy)
        if b.alive and not b.fix_radius:
            nb.radius = max(0.0, b.radius - alpha * gr)
        out.append(nb)
    return out


def _gradient_step(balls, diagram, fi, h, scale):
    """One Armijo-backtracking descent step; returns (new_balls, moved)."""
    for _ in range(4):
        try:
            grads = fd_gradient(balls, diagram, h)
            break
        except TopologyFlip:
            h *= 0.25
    else:
        return balls, 0
    gmax = max(max(abs(gx), abs(gy), abs(gr)) for gx, gy, gr in grads)
    if gmax == 0.0:
        return balls, 0
    gnorm2 = sum(gx * gx + gy * gy + gr * gr for gx, gy, gr in grads)
    alpha = scale / gmax
    for _ in range(40):
        trial = _apply_descent(balls, grads, alpha)
        try:
            _, d = _rebuild(trial)
            fi_trial = evaluate_FI(trial, d)
        except (TooFewBalls, AllCollinear):
            alpha *= 0.5
            continue
        if fi_trial <= fi - 1e-4 * alpha * gnorm2:
            moved = sum(
                1
                for g in grads
                if abs(g[0]) + abs(g[1]) + abs(g[2]) > 0
            )
            return trial, moved
        alpha *= 0.5
    return balls, 0


def run(
    initial_balls: list[Ball],
    config: OptimizerConfig,
    on_iteration=None,
) -> OptimizerState:
    """Drive the four-step iteration until convergence or exhaustion.

    ``on_iteration`` is called with the state after each diagram rebuild.
    """
    balls = [copy.copy(b) for b in initial_balls]
    scale = bbox_diag(balls)
    tau_tol = config.tau_tol if config.tau_tol is not None else 1e-10 * scale * scale
    fd_h = config.fd_step if config.fd_step is not None else 1e-6 * scale
    merge_eps = default_merge_eps(balls)

    state = OptimizerState(balls, None, math.inf, math.inf, 0)
    skip_count = [0] * len(balls)
    use_gradient = config.mode == "fd_gradient"
    eliminated_total = 0

    for it in range(config.max_iters + 1):
        try:
            tri, diagram = _rebuild(balls, merge_eps)
        except (TooFewBalls, AllCollinear) as e:
            if it == 0:
                raise  # the input scene itself is unusable
            raise DegenerateScene(str(e)) from e
        fi = evaluate_FI(balls, diagram)
        max_tau = diagram.max_abs_tau()
        state.balls = balls
        state.diagram = diagram
        state.fi = fi
        state.max_abs_tau = max_tau
        state.iteration = it
        if on_iteration is not None:
            on_iteration(state)

        if max_tau <= tau_tol or (config.fi_tol > 0 and fi <= config.fi_tol):
            state.history.append(HistoryRecord(it, fi, max_tau, 0, eliminated_total))
            state.converged = True
            return state
        if it == config.max_iters:
            state.history.append(HistoryRecord(it, fi, max_tau, 0, eliminated_total))
            return state

        hist = state.history
        # the residual polish minimizes sum tau^2, under which F_I may rise
        # transiently, so the F_I divergence guard only applies before it
        if not use_gradient and len(hist) >= 20:
            window = [h.fi for h in hist[-20:]] + [fi]
            if fi > 10 * window[0] and all(
                b >= a for a, b in zip(window, window[1:])
            ):
                raise Diverged(
                    f"F_I grew from {window[0]:.3e} to {fi:.3e} over 20 iterations"
                )
        if config.mode == "hybrid" and not use_gradient and len(hist) >= 10:
            # switch to the polishing phase once the relaxation has truly
            # plateaued (< 5% progress over 10 iterations), or after a long
            # preconditioning run when it is still creeping along a slow
            # geometric tail; from there the polish is locally quadratic and
            # falls back to relaxation whenever a step fails
            r10 = hist[-10].fi
            if r10 > 0 and (
                fi / r10 > 0.95 or (len(hist) >= 100 and fi / r10 > 0.6)
            ):
                use_gradient = True

        # track balls without a usable cell this iteration
        eliminated = 0
        proposals = _proposals(balls, diagram)
        for i, b in enumerate(balls):
            if not b.alive or not _is_free(b):
                continue
            if i in proposals:
                skip_count[i] = 0
            else:
                skip_count[i] += 1
                if config.eliminate_redundant and skip_count[i] >= 3:
                    b.alive = False
                    eliminated += 1
        eliminated_total += eliminated

        if use_gradient:
            if config.mode == "hybrid":
                # once the local relaxation stalls, polish with damped
                # Gauss-Newton on the dual-vertex power residuals; their zero
                # set coincides with F_I = 0 and the local convergence is
                # quadratic where the relaxation rate approaches 1
                new_balls, moved = _gauss_newton_step(balls, tri, diagram, merge_eps)
            else:
                new_balls, moved = _gradient_step(balls, diagram, fi, fd_h, scale)
            if moved == 0:
                new_balls = relax_step(state, config)
                moved = len(proposals)
        else:
            new_balls = relax_step(state, config)
            moved = len(proposals)

        state.history.append(HistoryRecord(it, fi, max_tau, moved, eliminated_total))
        balls = new_balls
    return state


def write_history_csv(history: list[HistoryRecord], path) -> None:
    """Convergence log: one row per iteration, 17 significant digits."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("iter,F_I,max_abs_tau,moved,eliminated\n")
        for rec in history:
            f.write(
                f"{rec.iteration},{rec.fi:.17g},{rec.max_abs_tau:.17g},"
                f"{rec.moved},{rec.eliminated}\n"
            )
