"""Finite base graphs, integer-voltage covers, and periodic realizations.

A periodic lattice is stored as a finite oriented graph plus one integer
translation vector ("voltage") per oriented edge.  The infinite cover is
never materialized: a vertex of the cover is a (base vertex, cell) pair,
and geometric questions reduce to finite data plus integer translations.

All containers in this module are immutable after construction, so values
can be shared freely between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LatticeError",
    "Edge",
    "BaseGraph",
    "CrystalLattice",
    "PeriodicRealization",
    "LatticePoint",
    "betti",
    "is_maximal_abelian",
    "maximal_abelian_cover",
    "fundamental_cycles",
    "edge_displacement",
    "realize",
    "locate",
    "check_nondegenerate",
    "path_displacement",
    "jump_vectors",
    "in_jump_set",
    "load_lattice",
    "lattice_to_config",
]


class LatticeError(ValueError):
    """Raised when graph or realization data violates a structural rule."""


@dataclass(frozen=True)
class Edge:
    """One oriented edge of a finite base graph."""

    id: str
    origin: str
    terminus: str
    inverse: str


class BaseGraph:
    """Finite connected oriented graph with an edge-inversion pairing.

    Every oriented edge ``e`` has a distinct partner ``e.inverse`` running
    the opposite way; the pairing is an involution.  Loops and multiple
    edges are allowed.
    """

    def __init__(self, vertices: Sequence[str], edges: Iterable[Edge]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        self.edges: dict[str, Edge] = {e.id: e for e in edges}
        self._out: dict[str, tuple[str, ...]] = {}
        self._validate()

    def _validate(self) -> None:
        if not self.vertices:
            raise LatticeError("graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise LatticeError("duplicate vertex ids")
        vset = set(self.vertices)
        for e in self.edges.values():
            if e.origin not in vset or e.terminus not in vset:
                raise LatticeError(f"edge {e.id!r} references unknown vertex")
            if e.inverse not in self.edges:
                raise LatticeError(f"edge {e.id!r} has no inverse edge {e.inverse!r}")
            inv = self.edges[e.inverse]
            if inv.inverse != e.id:
                raise LatticeError(f"inversion is not an involution at edge {e.id!r}")
            if inv.id == e.id:
                raise LatticeError(f"edge {e.id!r} is its own inverse")
            if inv.origin != e.terminus or inv.terminus != e.origin:
                raise LatticeError(f"inverse of {e.id!r} does not swap endpoints")
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            out[e.origin].append(e.id)
        self._out = {v: tuple(sorted(ids)) for v, ids in out.items()}
        for v in self.vertices:
            if not self._out[v]:
                raise LatticeError(f"vertex {v!r} has degree 0")
        # connectivity by breadth-first search over oriented edges
        seen = {self.vertices[0]}
        frontier = [self.vertices[0]]
        while frontier:
            v = frontier.pop()
            for eid in self._out[v]:
                w = self.edges[eid].terminus
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if seen != vset:
            raise LatticeError("graph is not connected")

    def edge(self, edge_id: str) -> Edge:
        return self.edges[edge_id]

    def out_edges(self, vertex: str) -> tuple[str, ...]:
        """Ids of the oriented edges leaving ``vertex``, sorted."""
        return self._out[vertex]

    def degree(self, vertex: str) -> int:
        return len(self._out[vertex])

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_oriented_edges(self) -> int:
        return len(self.edges)

    def edge_pairs(self) -> list[tuple[str, str]]:
        """Unordered inversion pairs, each as (lexicographically smaller id, inverse)."""
        pairs = []
        for e in self.edges.values():
            if e.id < e.inverse:
                pairs.append((e.id, e.inverse))
        return sorted(pairs)


def betti(base: BaseGraph) -> int:
    """First Betti number: independent cycles of the base graph."""
    return base.num_oriented_edges // 2 - base.num_vertices + 1


class CrystalLattice:
    """A periodic cover of a finite base graph, encoded as a voltage graph.

    ``voltage[e]`` is the integer translation picked up when traversing the
    lift of ``e``; anti-symmetry ``voltage[inverse(e)] == -voltage[e]`` is
    required so that traversal direction is consistent.
    """

    def __init__(self, base: BaseGraph, dim: int, voltage: Mapping[str, Sequence[int]]):
        if dim < 1:
            raise LatticeError("dim must be a positive integer")
        self.base = base
        self.dim = int(dim)
        self.voltage: dict[str, tuple[int, ...]] = {
            eid: tuple(int(x) for x in vec) for eid, vec in voltage.items()
        }
        self._validate()

    def _validate(self) -> None:
        for eid, e in self.base.edges.items():
            if eid not in self.voltage:
                raise LatticeError(f"edge {eid!r} has no voltage vector")
            v = self.voltage[eid]
            if len(v) != self.dim:
                raise LatticeError(f"voltage of edge {eid!r} has wrong length")
            w = self.voltage[e.inverse]
            if tuple(-x for x in v) != w:
                raise LatticeError(f"voltage of {eid!r} is not minus that of its inverse")

    def voltage_array(self, edge_id: str) -> np.ndarray:
        return np.array(self.voltage[edge_id], dtype=float)


def is_maximal_abelian(lattice: CrystalLattice) -> bool:
    """True when the cover realizes the full first homology of its base."""
    return lattice.dim == betti(lattice.base)


def _spanning_tree(base: BaseGraph) -> tuple[dict[str, str], set[str]]:
    """BFS spanning tree.

    Returns (parent edge id per non-root vertex, set of tree edge ids in
    both orientations).
    """
    root = base.vertices[0]
    parent_edge: dict[str, str] = {}
    tree_edges: set[str] = set()
    seen = {root}
    frontier = [root]
    while frontier:
        v = frontier.pop(0)
        for eid in base.out_edges(v):
            e = base.edge(eid)
            if e.terminus not in seen:
                seen.add(e.terminus)
                parent_edge[e.terminus] = eid
                tree_edges.add(eid)
                tree_edges.add(e.inverse)
                frontier.append(e.terminus)
    return parent_edge, tree_edges


def maximal_abelian_cover(base: BaseGraph) -> CrystalLattice:
    """Cover whose rank equals the Betti number of ``base``.

    Spanning-tree edges get zero voltage; the j-th non-tree inversion pair
    gets the j-th unit vector (plus on the lexicographically smaller id).
    """
    _, tree_edges = _spanning_tree(base)
    b1 = betti(base)
    if b1 == 0:
        raise LatticeError("base graph is a tree; its abelian cover is finite, not periodic")
    voltage: dict[str, tuple[int, ...]] = {}
    j = 0
    for eid, inv_id in base.edge_pairs():
        if eid in tree_edges:
            vec = tuple(0 for _ in range(b1))
            voltage[eid] = vec
            voltage[inv_id] = vec
        else:
            plus = tuple(1 if k == j else 0 for k in range(b1))
            voltage[eid] = plus
            voltage[inv_id] = tuple(-x for x in plus)
            j += 1
    return CrystalLattice(base, b1, voltage)


def fundamental_cycles(base: BaseGraph) -> list[list[str]]:
    """One closed path per non-tree edge pair, forming a cycle basis.

    Cycle for a non-tree edge e: tree path root -> o(e), then e, then tree
    path t(e) -> root.
    """
    parent_edge, tree_edges = _spanning_tree(base)
    root = base.vertices[0]

    def path_from_root(v: str) -> list[str]:
        rev: list[str] = []
        while v != root:
            eid = parent_edge[v]
            rev.append(eid)
            v = base.edge(eid).origin
        return rev[::-1]

    cycles = []
    for eid, _ in base.edge_pairs():
        if eid in tree_edges:
            continue
        e = base.edge(eid)
        up = path_from_root(e.origin)
        down = [base.edge(f).inverse for f in reversed(path_from_root(e.terminus))]
        cycles.append(up + [eid] + down)
    return cycles


@dataclass(frozen=True)
class LatticePoint:
    """A vertex of the cover: base vertex plus integer cell coordinates."""

    vertex: str
    cell: tuple[int, ...]

    def translated(self, gamma: Sequence[int]) -> "LatticePoint":
        return LatticePoint(self.vertex, tuple(c + int(g) for c, g in zip(self.cell, gamma)))


def _locked(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class PeriodicRealization:
    """Placement of a crystal lattice in Euclidean space.

    ``offsets[v]`` is the position of the lift of ``v`` in the zero cell;
    ``basis`` has the images of the translation generators as columns, so
    the lift (v, cell) sits at ``offsets[v] + basis @ cell``.
    """

    def __init__(
        self,
        lattice: CrystalLattice,
        offsets: Mapping[str, Sequence[float]],
        basis: Sequence[Sequence[float]] | np.ndarray | None = None,
    ):
        self.lattice = lattice
        d = lattice.dim
        if basis is None:
            basis = np.eye(d)
        self.basis = _locked(np.asarray(basis, dtype=float).reshape(d, d))
        if abs(np.linalg.det(self.basis)) < 1e-12:
            raise LatticeError("basis matrix is singular; realization does not span space")
        self._basis_inv = _locked(np.linalg.inv(self.basis))
        self.offsets: dict[str, np.ndarray] = {}
        for v in lattice.base.vertices:
            if v not in offsets:
                raise LatticeError(f"vertex {v!r} has no offset")
            vec = np.asarray(offsets[v], dtype=float)
            if vec.shape != (d,):
                raise LatticeError(f"offset of vertex {v!r} has wrong length")
            self.offsets[v] = _locked(vec)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def base(self) -> BaseGraph:
        return self.lattice.base

    def origin(self, vertex: str | None = None) -> LatticePoint:
        """Lift of ``vertex`` (default: first base vertex) in the zero cell."""
        v = vertex if vertex is not None else self.base.vertices[0]
        return LatticePoint(v, (0,) * self.dim)


def edge_displacement(real: PeriodicRealization, edge_id: str) -> np.ndarray:
    """Geometric displacement of one lifted edge; independent of the cell."""
    e = real.base.edge(edge_id)
    volt = real.lattice.voltage_array(edge_id)
    return real.offsets[e.terminus] + real.basis @ volt - real.offsets[e.origin]


def realize(real: PeriodicRealization, p: LatticePoint) -> np.ndarray:
    """Position of the cover vertex ``p`` in Euclidean space."""
    if len(p.cell) != real.dim:
        raise LatticeError("lattice point has wrong cell length")
    return real.offsets[p.vertex] + real.basis @ np.asarray(p.cell, dtype=float)


def locate(real: PeriodicRealization, point: Sequence[float], tol: float = 1e-9) -> LatticePoint | None:
    """Inverse of :func:`realize` within ``tol``; None when no vertex matches.

    Raises :class:`LatticeError` when two distinct cover vertices both fall
    within ``tol`` of ``point`` (nearly degenerate realization).
    """
    v = np.asarray(point, dtype=float)
    matches: list[LatticePoint] = []
    for x in real.base.vertices:
        gamma = real._basis_inv @ (v - real.offsets[x])
        cell = np.rint(gamma)
        residual = v - (real.offsets[x] + real.basis @ cell)
        if np.linalg.norm(residual) <= tol:
            matches.append(LatticePoint(x, tuple(int(c) for c in cell)))
    if not matches:
        return None
    if len(matches) > 1:
        raise LatticeError(f"ambiguous location: {matches[0]} and {matches[1]} both within {tol}")
    return matches[0]


def check_nondegenerate(real: PeriodicRealization, tol: float = 1e-9) -> list[str]:
    """Violations of injectivity and distinct edge directions; empty when clean."""
    violations: list[str] = []
    verts = real.base.vertices
    # (a) vertex offsets must be distinct modulo the period lattice
    for i, x in enumerate(verts):
        for y in verts[i + 1 :]:
            diff = real.offsets[x] - real.offsets[y]
            gamma = np.rint(real._basis_inv @ diff)
            if np.linalg.norm(diff - real.basis @ gamma) <= tol:
                violations.append(f"offsets of {x!r} and {y!r} coincide modulo the period lattice")
    # (b) no collapsed edges
    for eid, e in sorted(real.base.edges.items()):
        if np.linalg.norm(edge_displacement(real, eid)) <= tol:
            violations.append(f"edge {eid!r} has zero displacement")
    # (c) distinct unit directions within each outgoing star
    for x in verts:
        dirs: list[tuple[str, np.ndarray]] = []
        for eid in real.base.out_edges(x):
            d = edge_displacement(real, eid)
            n = np.linalg.norm(d)
            if n <= tol:
                continue  # already reported in (b)
            dirs.append((eid, d / n))
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                if np.linalg.norm(dirs[i][1] - dirs[j][1]) <= tol:
                    violations.append(
                        f"edges {dirs[i][0]!r} and {dirs[j][0]!r} leave {x!r} in the same direction"
                    )
    return violations


def path_displacement(real: PeriodicRealization, path: Sequence[str]) -> np.ndarray:
    """Sum of edge displacements along a composable edge path."""
    total = np.zeros(real.dim)
    prev: Edge | None = None
    for eid in path:
        e = real.base.edge(eid)
        if prev is not None and prev.terminus != e.origin:
            raise LatticeError(f"path does not compose: {prev.id!r} ends at {prev.terminus!r}, "
                               f"{e.id!r} starts at {e.origin!r}")
        total += edge_displacement(real, eid)
        prev = e
    return total


def jump_vectors(real: PeriodicRealization, vertex: str, max_length: int = 6) -> list[np.ndarray]:
    """Displacements of all paths from ``vertex`` up to ``max_length`` edges.

    A bounded witness generator for the (infinite) set of admissible jump
    directions at ``vertex``: the full set consists of all real multiples
    of these vectors.
    """
    found: dict[tuple[float, ...], np.ndarray] = {}
    frontier: list[tuple[str, np.ndarray]] = [(vertex, np.zeros(real.dim))]
    for _ in range(max_length):
        nxt: list[tuple[str, np.ndarray]] = []
        for v, acc in frontier:
            for eid in real.base.out_edges(v):
                e = real.base.edge(eid)
                vec = acc + edge_displacement(real, eid)
                key = tuple(np.round(vec, 9))
                if key not in found:
                    found[key] = vec
                nxt.append((e.terminus, vec))
        frontier = nxt
    return [found[k] for k in sorted(found)]


def in_jump_set(
    real: PeriodicRealization,
    vertex: str,
    vec: Sequence[float],
    max_length: int = 6,
    tol: float = 1e-9,
) -> bool:
    """Whether ``vec`` is a real multiple of some path displacement from ``vertex``."""
    v = np.asarray(vec, dtype=float)
    if np.linalg.norm(v) <= tol:
        return True
    for a in jump_vectors(real, vertex, max_length):
        na2 = float(a @ a)
        if na2 <= tol * tol:
            continue
        k = float(v @ a) / na2
        if np.linalg.norm(v - k * a) <= tol:
            return True
    return False


def lattice_to_config(real: PeriodicRealization) -> dict:
    """JSON-compatible description of a realized lattice."""
    lat = real.lattice
    return {
        "dim": lat.dim,
        "vertices": list(lat.base.vertices),
        "edges": [
            {
                "id": e.id,
                "origin": e.origin,
                "terminus": e.terminus,
                "inverse": e.inverse,
                "voltage": list(lat.voltage[e.id]),
            }
            for _, e in sorted(lat.base.edges.items())
        ],
        "offsets": {v: list(map(float, real.offsets[v])) for v in lat.base.vertices},
        "basis": [list(map(float, row)) for row in real.basis],
    }


def load_lattice(source: str | Path | Mapping) -> PeriodicRealization:
    """Build a realized lattice from a config dict or a JSON file path.

    Required keys: dim, vertices, edges (id/origin/terminus/inverse/voltage).
    Optional: offsets (default zero) and basis (default identity).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    else:
        cfg = dict(source)
    try:
        dim = int(cfg["dim"])
        vertices = list(cfg["vertices"])
        edges = [Edge(e["id"], e["origin"], e["terminus"], e["inverse"]) for e in cfg["edges"]]
        voltage = {e["id"]: tuple(int(x) for x in e["voltage"]) for e in cfg["edges"]}
    except (KeyError, TypeError) as exc:
        raise LatticeError(f"malformed lattice config: {exc}") from exc
    base = BaseGraph(vertices, edges)
    lattice = CrystalLattice(base, dim, voltage)
    offsets = cfg.get("offsets") or {v: [0.0] * dim for v in vertices}
    basis = cfg.get("basis")
    return PeriodicRealization(lattice, offsets, basis)
