"""Constructive generation of globally rigid frameworks.

Growth operations append vertices to a framework under attribute patterns
that preserve global rigidity: four kinds of single-vertex additions (A1,
D1, A2, D2), the two-vertex addition (one new quadrilateral with exactly
three A-vertices), and two merge operations (adding edges between two rigid
frameworks, contracting coincident vertex pairs).  Recipe generators
compose these into reproducible seeded constructions whose connectivity
signatures drive the localization solvers:

- ``quad2v``: quadrilateralized by 2-vertex additions on existing edges;
  SA-connected; minimal edge count (3n-4)/2 for even n.
- ``bilat-D1A1``: bilateration alternating D1/A1 additions; a Laman graph
  (m = 2n-3); RoD-connected.
- ``mix-D2A1``: D2/A1 additions from a globally rigid kite quadrilateral;
  RoD-connected.
- ``type2D1``: alternating 2-vertex and D1 additions; neither SA- nor
  RoD-connected.
- ``minimal``: 2-vertex additions (+ one D1 when n is odd) hitting the edge
  lower bound exactly.

All randomness flows from the explicit seed; positions are drawn from the
unit box and resampled until collinearity/collocation guards pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Framework
from .graph import Bipartition, Graph

__all__ = [
    "Construction",
    "ConstructionError",
    "apply_vertex_addition",
    "apply_two_vertex_addition",
    "generate_quadrilateralized",
    "generate_bilateration",
    "generate_mixed",
    "generate_two_step",
    "generate_minimal_rigid",
    "generate",
    "merge_add_edges",
    "merge_contract",
    "RECIPES",
]

COLLINEARITY_TOL = 1e-6
PLACEMENT_RETRIES = 100
UNIT_BOX = ((0.0, 0.0), (1.0, 1.0))


class ConstructionError(ValueError):
    """Raised when an addition's attribute or geometry precondition fails."""


@dataclass
class Construction:
    """A generated framework together with its reproducible build log."""

    framework: Framework
    steps: list = field(default_factory=list)
    recipe: str = ""
    seed: int = 0


def _noncollinear(a, b, c, tol: float = COLLINEARITY_TOL) -> bool:
    u = b - a
    v = c - a
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return False
    return abs(u[0] * v[1] - u[1] * v[0]) / (nu * nv) > tol

def _separated(p: np.ndarray, q: np.ndarray, tol: float = 1e-6) -> bool:
    if p.shape[0] == 0:
        return True
    return bool(np.min(np.linalg.norm(p - q, axis=1)) > tol)


def _draw_point(rng, box, existing, require_noncollinear_with=None):
    (x0, y0), (x1, y1) = box
    for _ in range(PLACEMENT_RETRIES):
        q = np.array([rng.uniform(x0, x1), rng.uniform(y0, y1)])
        if not _separated(existing, q):
            continue
        if require_noncollinear_with is not None:
            a, b = require_noncollinear_with
            if not _noncollinear(a, b, q):
                continue
        return q
    raise ConstructionError("placement failed after retries (collinearity guard)")


def _grown(fw: Framework, new_points, new_attrs, new_edges) -> Framework:
    points = np.vstack([fw.points, np.atleast_2d(new_points)])
    attrs = fw.bipartition.attrs + tuple(new_attrs)
    edges = fw.graph.edges + tuple((min(a, b), max(a, b)) for a, b in new_edges)
    return Framework(Graph(fw.n + len(new_attrs), edges), Bipartition(attrs), points)


def apply_vertex_addition(fw: Framework, kind: str, attach, rng, box=UNIT_BOX, third: int | None = None):
    """One-vertex addition of the given kind at attachments (i, j).

    Kind A1 adds an A-vertex and needs a D-attachment; D1 is the mirror.
    A2 adds an A-vertex on two A-attachments and resamples until the three
    A-positions are non-collinear.  D2 adds a D-vertex on two D-attachments
    plus a third edge to an existing D-vertex ``third`` with the three
    attachment positions non-collinear.  Returns (framework, step record).
    """
    i, j = attach
    if i == j or not (1 <= i <= fw.n and 1 <= j <= fw.n):
        raise ConstructionError(f"bad attachments {attach}")
    attr = fw.bipartition.attr
    new_id = fw.n + 1
    guard = None
    if kind == "A1":
        if attr(i) != "D" and attr(j) != "D":
            raise ConstructionError("Type A1 needs i in V_D or j in V_D")
        new_attr = "A"
    elif kind == "D1":
        if attr(i) != "A" and attr(j) != "A":
            raise ConstructionError("Type D1 needs i in V_A or j in V_A")
        new_attr = "D"
    elif kind == "A2":
        if attr(i) != "A" or attr(j) != "A":
            raise ConstructionError("Type A2 needs both attachments in V_A")
        new_attr = "A"
        guard = (fw.point(i), fw.point(j))
    elif kind == "D2":
        if attr(i) != "D" or attr(j) != "D":
            raise ConstructionError("Type D2 needs both attachments in V_D")
        if third is None or not (1 <= third <= fw.n) or third in (i, j):
            raise ConstructionError("Type D2 needs a distinct third vertex")
        if attr(third) != "D":
            raise ConstructionError("Type D2 third vertex must be in V_D")
        if not _noncollinear(fw.point(i), fw.point(j), fw.point(third)):
            raise ConstructionError("Type D2 attachment positions are collinear")
        new_attr = "D"
    else:
        raise ConstructionError(f"unknown addition kind {kind!r}")

    q = _draw_point(rng, box, fw.points, require_noncollinear_with=guard)
    edges = [(new_id, i), (new_id, j)]
    if kind == "D2":
        edges.append((new_id, third))
    fw2 = _grown(fw, q, [new_attr], edges)
    step = {"kind": kind, "attach": [int(i), int(j)], "new": [new_id], "pos": [q.tolist()]}
    if third is not None:
        step["third"] = int(third)
    return fw2, step


def apply_two_vertex_addition(fw: Framework, attach, new_attrs, rng, box=UNIT_BOX):
    """Two-vertex addition: vertices n+1, n+2 and edges (j,n+1), (n+1,n+2), (n+2,i).

    Exactly three of {i, j, n+1, n+2} must be A-vertices, and the three
    A-positions are resampled until non-collinear.
    """
    i, j = attach
    if i == j or not (1 <= i <= fw.n and 1 <= j <= fw.n):
        raise ConstructionError(f"bad attachments {attach}")
    a1, a2 = new_attrs
    quad_attrs = [fw.bipartition.attr(i), fw.bipartition.attr(j), a1, a2]
    if sum(1 for a in quad_attrs if a == "A") != 3:
        raise ConstructionError("2-vertex addition needs exactly three A-vertices among i, j, n+1, n+2")
    v1, v2 = fw.n + 1, fw.n + 2
    for _ in range(PLACEMENT_RETRIES):
        q1 = _draw_point(rng, box, fw.points)
        q2 = _draw_point(rng, box, np.vstack([fw.points, q1]))
        pos = {i: fw.point(i), j: fw.point(j), v1: q1, v2: q2}
        a_pts = [pos[v] for v, a in zip((i, j, v1, v2), quad_attrs) if a == "A"]
        if _noncollinear(*a_pts):
            fw2 = _grown(fw, np.vstack([q1, q2]), [a1, a2], [(j, v1), (v1, v2), (v2, i)])
            step = {
                "kind": "two_vertex",
                "attach": [int(i), int(j)],
                "new": [v1, v2],
                "attrs": [a1, a2],
                "pos": [q1.tolist(), q2.tolist()],
            }
            return fw2, step
    raise ConstructionError("placement failed after retries (collinearity guard)")


def _seed_framework(rng, box=UNIT_BOX, attrs=("D", "A")) -> Framework:
    p1 = _draw_point(rng, box, np.empty((0, 2)))
    p2 = _draw_point(rng, box, p1[None, :])
    return Framework(Graph(2, ((1, 2),)), Bipartition(tuple(attrs)), np.vstack([p1, p2]))


def generate_quadrilateralized(n: int, seed: int = 0, defect_quads: int = 0, box=UNIT_BOX) -> Construction:
    """Quadrilateralized framework by 2-vertex additions on existing edges.

    With ``defect_quads`` > 0, that many trailing additions place both new
    vertices in V_A on an A-A base edge.  Such quadrilaterals violate the
    exactly-three-A rule, so the result is no longer a valid 2-vertex
    ordering (it stays SA-connected but loses rigidity: each defect drops
    the distance-system rank by one).
    """
    if n < 4 or n % 2:
        raise ConstructionError("quadrilateralized recipe needs even n >= 4")
    rng = np.random.default_rng(seed)
    fw = _seed_framework(rng, box)
    steps = []
    total = (n - 2) // 2
    for step_no in range(total):
        defective = step_no >= total - defect_quads
        candidates = list(fw.graph.edges)
        if defective:
            candidates = [
                (u, v) for (u, v) in candidates
                if fw.bipartition.attr(u) == "A" and fw.bipartition.attr(v) == "A"
            ]
            if not candidates:
                raise ConstructionError("no A-A edge available for a defective quadrilateral")
        u, v = candidates[rng.integers(len(candidates))]
        i, j = (u, v) if rng.integers(2) else (v, u)
        n_a = sum(1 for w in (i, j) if fw.bipartition.attr(w) == "A")
        if defective:
            new_attrs = ("A", "A")
        elif n_a == 1:
            new_attrs = ("A", "A")
        else:
            new_attrs = ("A", "D") if rng.integers(2) else ("D", "A")
        if defective:
            # Bypass the exactly-three-A validation on purpose.
            v1, v2 = fw.n + 1, fw.n + 2
            q1 = _draw_point(rng, box, fw.points)
            q2 = _draw_point(rng, box, np.vstack([fw.points, q1]))
            fw = _grown(fw, np.vstack([q1, q2]), new_attrs, [(j, v1), (v1, v2), (v2, i)])
            steps.append({"kind": "two_vertex_defect", "attach": [i, j], "new": [v1, v2],
                          "attrs": list(new_attrs), "pos": [q1.tolist(), q2.tolist()]})
        else:
            fw, step = apply_two_vertex_addition(fw, (i, j), new_attrs, rng, box)
            steps.append(step)
    return Construction(fw, steps, "quad2v", seed)


def generate_bilateration(n: int, seed: int = 0, box=UNIT_BOX) -> Construction:
    """Type (D1, A1) bilateration: odd vertices are D, even are A; m = 2n-3.

    Each new D-vertex attaches to one A- and one D-vertex; each new
    A-vertex to two D-vertices.  These are the patterns under which the
    bearing system has full column rank with anchors {1, 2}.
    """
    if n < 3:
        raise ConstructionError("bilateration recipe needs n >= 3")
    rng = np.random.default_rng(seed)
    fw = _seed_framework(rng, box)
    steps = []
    for k in range(3, n + 1):
        a_set = list(fw.bipartition.a_vertices())
        d_set = list(fw.bipartition.d_vertices())
        if k % 2:  # new D-vertex
            i = a_set[rng.integers(len(a_set))]
            j = d_set[rng.integers(len(d_set))]
            fw, step = apply_vertex_addition(fw, "D1", (i, j), rng, box)
        else:  # new A-vertex
            picks = rng.choice(len(d_set), size=2, replace=False)
            fw, step = apply_vertex_addition(fw, "A1", (d_set[picks[0]], d_set[picks[1]]), rng, box)
        steps.append(step)
    return Construction(fw, steps, "bilat-D1A1", seed)


def _pure_d_quadrilateral(rng, box=UNIT_BOX) -> Framework:
    """Generic 4-cycle with all vertices in V_D (flexible on its own)."""
    pts = np.empty((0, 2))
    for _ in range(4):
        pts = np.vstack([pts, _draw_point(rng, box, pts)])
    if not (_noncollinear(pts[0], pts[1], pts[2]) and _noncollinear(pts[1], pts[2], pts[3])):
        return _pure_d_quadrilateral(rng, box)
    return Framework(
        Graph(4, ((1, 2), (2, 3), (3, 4), (1, 4))),
        Bipartition(("D", "D", "D", "D")),
        pts,
    )


def generate_mixed(n: int, seed: int = 0, box=UNIT_BOX) -> Construction:
    """Alternating A1 and three-edge D additions from a pure-D quadrilateral.

    Each A1 vertex attaches to two D-vertices other than the quadrilateral
    corners 3 and 4; each three-edge D-vertex attaches to two D-vertices
    plus a third edge to an A-vertex (so its bearing row block is pinned by
    a rotation constraint).  Every edge keeps a D-endpoint, so the RoD
    index graph stays connected, while corners 3 and 4 remain the only
    vertices whose edges carry no rotation constraint: the bearing system
    keeps a null space of dimension exactly 4.  The first D-addition
    attaches to (3, 4) so that the unit-norm constraints pin those corners
    uniquely.  For n = 4 + 2k the framework has m = 4 + 5k edges; at
    n = 70 this is 33 additions of each kind and m = 169.
    """
    if n < 6:
        raise ConstructionError("mixed recipe needs n >= 6")
    rng = np.random.default_rng(seed)
    fw = _pure_d_quadrilateral(rng, box)
    steps = [{"kind": "pure_d_quadrilateral", "new": [1, 2, 3, 4], "pos": fw.points.tolist()}]
    next_a1 = True
    first_d = True
    while fw.n < n:
        if next_a1:
            pool = [v for v in fw.bipartition.d_vertices() if v not in (3, 4)]
            picks = rng.choice(len(pool), size=2, replace=False)
            fw, step = apply_vertex_addition(fw, "A1", (pool[picks[0]], pool[picks[1]]), rng, box)
        else:
            d_set = list(fw.bipartition.d_vertices())
            a_set = list(fw.bipartition.a_vertices())
            if first_d:
                i, j = 3, 4
                first_d = False
            else:
                picks = rng.choice(len(d_set), size=2, replace=False)
                i, j = d_set[picks[0]], d_set[picks[1]]
            k = a_set[rng.integers(len(a_set))]
            new_id = fw.n + 1
            q = _draw_point(rng, box, fw.points)
            fw = _grown(fw, q, ["D"], [(new_id, i), (new_id, j), (new_id, k)])
            step = {"kind": "D_three_edge", "attach": [int(i), int(j)], "third": int(k),
                    "new": [new_id], "pos": [q.tolist()]}
        steps.append(step)
        next_a1 = not next_a1
    return Construction(fw, steps, "mix-D2A1", seed)


def generate_two_step(n: int, seed: int = 0, box=UNIT_BOX) -> Construction:
    """Alternating two-vertex and D1 additions; neither SA- nor RoD-connected.

    Two-vertex additions place both new vertices in V_A and attach to one
    D-vertex i and one A-vertex j (edges (j, n+1), (n+1, n+2), (n+2, i));
    D1 additions attach to one A- and one D-vertex, leaving one isolated
    D-D edge per step in the SA index graph and two isolated A-A edges per
    two-vertex step in the RoD index graph.
    """
    if n < 4:
        raise ConstructionError("two-step recipe needs n >= 4")
    rng = np.random.default_rng(seed)
    fw = _seed_framework(rng, box)
    steps = []
    next_two = True
    while fw.n < n:
        a_set = list(fw.bipartition.a_vertices())
        d_set = list(fw.bipartition.d_vertices())
        if next_two and fw.n + 2 <= n:
            i = d_set[rng.integers(len(d_set))]
            j = a_set[rng.integers(len(a_set))]
            fw, step = apply_two_vertex_addition(fw, (i, j), ("A", "A"), rng, box)
        else:
            i = a_set[rng.integers(len(a_set))]
            j = d_set[rng.integers(len(d_set))]
            fw, step = apply_vertex_addition(fw, "D1", (i, j), rng, box)
        steps.append(step)
        next_two = not next_two
    return Construction(fw, steps, "type2D1", seed)


def generate_minimal_rigid(n: int, seed: int = 0, box=UNIT_BOX) -> Construction:
    """Framework hitting the rigidity edge lower bound.

    Even n: (n-2)/2 two-vertex additions, m = (3n-4)/2.  Odd n: two-vertex
    additions to n-1 followed by one D1 addition, m = (3n-3)/2.  Deleting
    any single edge breaks the rank condition.
    """
    if n < 4:
        raise ConstructionError("minimal recipe needs n >= 4")
    if n % 2 == 0:
        con = generate_quadrilateralized(n, seed, box=box)
        con.recipe = "minimal"
        return con
    con = generate_quadrilateralized(n - 1, seed, box=box)
    rng = np.random.default_rng([seed, n])
    fw = con.framework
    a_set = fw.bipartition.a_vertices()
    d_set = fw.bipartition.d_vertices()
    i = a_set[rng.integers(len(a_set))]
    j = d_set[rng.integers(len(d_set))]
    fw, step = apply_vertex_addition(fw, "D1", (i, j), rng, box)
    con.framework = fw
    con.steps.append(step)
    con.recipe = "minimal"
    return con


RECIPES = {
    "quad2v": generate_quadrilateralized,
    "bilat-D1A1": generate_bilateration,
    "mix-D2A1": generate_mixed,
    "type2D1": generate_two_step,
    "minimal": generate_minimal_rigid,
}


def generate(recipe: str, n: int, seed: int = 0) -> Construction:
    if recipe not in RECIPES:
        raise ConstructionError(f"unknown recipe {recipe!r}; choose from {sorted(RECIPES)}")
    return RECIPES[recipe](n, seed)


def _require_rigid(fw: Framework, label: str):
    from .rigidity import infinitesimal_rigidity_test

    report = infinitesimal_rigidity_test(fw)
    if not report.rigid:
        raise ConstructionError(f"{label} framework fails the rank test (rank {report.rank} != {report.required})")


def merge_add_edges(fw1: Framework, fw2: Framework, pair1, pair2, three_edges: bool = False, check: bool = True) -> Framework:
    """Merge two rigid frameworks by adding cross edges.

    With vertices (i, m) of the first framework and (j, k) of the second,
    adds edges (m, k) and (i, j); exactly three of the four must be
    A-vertices with non-collinear positions.  With ``three_edges`` all four
    must be A-vertices (no three collinear) and edges (i, j), (i, k), (m, k)
    are added.  ``check`` runs the rank test on both inputs, standing in
    for the global-rigidity precondition of ordering-generated inputs.
    """
    i, m = pair1
    j, k = pair2
    if check:
        _require_rigid(fw1, "first")
        _require_rigid(fw2, "second")
    n1 = fw1.n
    jj, kk = j + n1, k + n1
    attrs4 = [fw1.bipartition.attr(i), fw1.bipartition.attr(m), fw2.bipartition.attr(j), fw2.bipartition.attr(k)]
    pts4 = [fw1.point(i), fw1.point(m), fw2.point(j), fw2.point(k)]
    n_a = sum(1 for a in attrs4 if a == "A")
    if three_edges:
        if n_a != 4:
            raise ConstructionError("3-edge merge needs all four chosen vertices in V_A")
        for trio in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
            if not _noncollinear(pts4[trio[0]], pts4[trio[1]], pts4[trio[2]]):
                raise ConstructionError("3-edge merge needs the four points non-collinear")
        new_edges = [(i, jj), (i, kk), (m, kk)]
    else:
        if n_a != 3:
            raise ConstructionError("2-edge merge needs exactly three of the four chosen vertices in V_A")
        a_pts = [pt for pt, a in zip(pts4, attrs4) if a == "A"]
        if not _noncollinear(*a_pts):
            raise ConstructionError("2-edge merge needs the three A-positions non-collinear")
        new_edges = [(m, kk), (i, jj)]
    edges = list(fw1.graph.edges) + [(a + n1, b + n1) for (a, b) in fw2.graph.edges] + new_edges
    points = np.vstack([fw1.points, fw2.points])
    attrs = fw1.bipartition.attrs + fw2.bipartition.attrs
    return Framework(Graph.from_edges(n1 + fw2.n, edges), Bipartition(attrs), points)


def merge_contract(fw1: Framework, fw2: Framework, pair_a, pair_b, tol: float = 1e-9, check: bool = True):
    """Merge two rigid frameworks by contracting two coincident vertex pairs.

    Pairs (i, j) and (m, k) with i, m in the first framework and j, k in the
    second must have equal positions (within ``tol``) and equal attributes.
    Returns (framework, vertex_map) where vertex_map sends each vertex of
    the second framework to its id in the merged one.
    """
    i, j = pair_a
    m, k = pair_b
    if check:
        _require_rigid(fw1, "first")
        _require_rigid(fw2, "second")
    if j == k or i == m:
        raise ConstructionError("contraction pairs must use distinct vertices")
    for (u, v) in ((i, j), (m, k)):
        if np.linalg.norm(fw1.point(u) - fw2.point(v)) > tol:
            raise ConstructionError(f"contracted vertices {u} and {v} are not coincident")
        if fw1.bipartition.attr(u) != fw2.bipartition.attr(v):
            raise ConstructionError(f"contracted vertices {u} and {v} have different attributes")
    n1 = fw1.n
    vmap: dict[int, int] = {j: i, k: m}
    next_id = n1 + 1
    for v in range(1, fw2.n + 1):
        if v not in vmap:
            vmap[v] = next_id
            next_id += 1
    edges = set(fw1.graph.edges)
    for (a, b) in fw2.graph.edges:
        u, v = vmap[a], vmap[b]
        if u == v:
            raise ConstructionError("contraction collapses an edge to a loop")
        edges.add((min(u, v), max(u, v)))
    new_points = np.zeros((next_id - 1, 2))
    new_points[:n1] = fw1.points
    attrs = list(fw1.bipartition.attrs) + [""] * (next_id - 1 - n1)
    for v in range(1, fw2.n + 1):
        t = vmap[v]
        if t > n1:
            new_points[t - 1] = fw2.point(v)
            attrs[t - 1] = fw2.bipartition.attr(v)
    merged = Framework(
        Graph(next_id - 1, tuple(sorted(edges))),
        Bipartition(tuple(attrs)),
        new_points,
    )
    return merged, vmap
