"""Random walks on realized lattices.

Two families: finite-range walks whose per-step law depends on the base
vertex underneath the walker (each kernel is the normalized law of a
finite-support zeta spec), and infinite-range walks that add one compound
Poisson draw per step on a single-vertex base.

``simulate`` records full trajectories; for large ensembles where only
endpoints matter use ``simulate_endpoints``, which follows the identical
per-path draw protocol without materializing paths.  Path ``i`` always
uses the generator ``stream(master_seed, i)``, so results do not depend
on scheduling.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .distributions import (
    CompoundPoissonLaw,
    LatticeDistribution,
    characteristic_function,
    finite_support_to_shintani,
    shintani_distribution,
    stream,
)
from .graphs import LatticeError, LatticePoint, PeriodicRealization, locate, realize
from .zeta import ShintaniZetaSpec

__all__ = [
    "StepKernel",
    "build_step_kernel",
    "FiniteRangeWalkSpec",
    "InfiniteRangeWalkSpec",
    "Trajectory",
    "step_finite_range",
    "step_infinite_range",
    "simulate",
    "simulate_endpoints",
    "walk_cf",
]


class StepKernel:
    """One-step law at a base vertex, with its zeta-spec witness.

    The law is rebuilt from the witness spec (not copied from the input
    weights), so the kernel really is the normalized zeta law.  Every
    step vector must land on a lattice vertex; the landing vertex and
    cell shift are resolved once here, never during simulation.
    """

    def __init__(
        self,
        real: PeriodicRealization,
        vertex: str,
        dist: LatticeDistribution,
        witness: tuple[ShintaniZetaSpec, tuple[float, ...]],
        tol: float = 1e-9,
    ):
        if vertex not in real.base.vertices:
            raise LatticeError(f"unknown base vertex {vertex!r}")
        if abs(dist.total - 1.0) > 1e-9:
            raise LatticeError(f"kernel masses sum to {dist.total}, expected 1")
        origin = realize(real, real.origin(vertex))
        targets: list[str] = []
        deltas = np.zeros((len(dist), real.dim), dtype=np.int64)
        lattice_points: list[LatticePoint] = []
        for i, vec in enumerate(dist.points):
            hit = locate(real, origin + vec, tol=tol)
            if hit is None:
                raise LatticeError(
                    f"step vector {tuple(vec)} from vertex {vertex!r} leaves the lattice"
                )
            targets.append(hit.vertex)
            deltas[i] = hit.cell
            lattice_points.append(hit)
        self.vertex = vertex
        self.dist = LatticeDistribution(dist.points, dist.masses, lattice_points)
        self.witness = witness
        self.vectors = dist.points
        self.masses = dist.masses
        self.cdf = np.cumsum(dist.masses)
        self.cdf = self.cdf / self.cdf[-1]
        self.targets = tuple(targets)
        self.cell_deltas = deltas
        uniq = set(targets)
        self.single_target = targets[0] if len(uniq) == 1 else None

    def cf(self, t: Sequence[float]) -> complex:
        return characteristic_function(self.dist, None, t)


def build_step_kernel(
    real: PeriodicRealization,
    vertex: str,
    steps: Sequence[tuple[Sequence[float], float]],
    sigma: Sequence[float] | None = None,
) -> StepKernel:
    """Kernel from (vector, weight) pairs via the zeta-spec round trip."""
    vecs = [v for v, _ in steps]
    weights = [w for _, w in steps]
    if sigma is None:
        sigma = (1.0,) * real.dim
    spec = finite_support_to_shintani(vecs, weights, sigma)
    dist = shintani_distribution(spec, sigma)
    return StepKernel(real, vertex, dist, (spec, tuple(float(x) for x in sigma)))


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
    return h.hexdigest()[:16]


class FiniteRangeWalkSpec:
    """Vertex-dependent finite-range walk: one step kernel per base vertex."""

    def __init__(
        self,
        real: PeriodicRealization,
        kernels: dict[str, StepKernel],
        start: LatticePoint | None = None,
    ):
        for v in real.base.vertices:
            if v not in kernels:
                raise LatticeError(f"no kernel for base vertex {v!r}")
        for v, k in kernels.items():
            if k.vertex != v:
                raise LatticeError(f"kernel built for {k.vertex!r} registered under {v!r}")
        self.real = real
        self.kernels = dict(kernels)
        self.start = start if start is not None else real.origin()
        if self.start.vertex not in real.base.vertices or len(self.start.cell) != real.dim:
            raise LatticeError("start point does not belong to the lattice")

    @property
    def dim(self) -> int:
        return self.real.dim

    def vertex_sequence(self, n_steps: int) -> list[str] | None:
        """Base vertices visited before each step, when deterministic.

        Defined exactly when every kernel sends all its mass to a single
        base vertex; returns None otherwise.
        """
        seq = []
        v = self.start.vertex
        for _ in range(n_steps):
            seq.append(v)
            nxt = self.kernels[v].single_target
            if nxt is None:
                return None
            v = nxt
        return seq

    def digest(self) -> str:
        items = [
            (v, tuple(map(tuple, k.vectors)), tuple(k.masses)) for v, k in sorted(self.kernels.items())
        ]
        return _digest("finite", items, self.start)


class InfiniteRangeWalkSpec:
    """IID compound-Poisson-increment walk on a single-vertex base."""

    def __init__(
        self,
        real: PeriodicRealization,
        law: CompoundPoissonLaw,
        start: LatticePoint | None = None,
        tol: float = 1e-9,
    ):
        if real.base.num_vertices != 1:
            raise LatticeError("infinite-range walks need a single-vertex base")
        if law.dim != real.dim:
            raise LatticeError("law dimension does not match the lattice")
        # every jump must be a lattice translation
        basis_inv = np.linalg.inv(real.basis)
        cells = basis_inv @ law.levy.locations.T
        if law.levy.locations.size and np.max(np.abs(cells - np.rint(cells))) > tol:
            raise LatticeError("some jump locations are not lattice translations")
        direction_cells = basis_inv @ law._directions.T
        self._direction_cells = np.rint(direction_cells.T).astype(np.int64)  # (m, d)
        self.real = real
        self.law = law
        self.start = start if start is not None else real.origin()
        if len(self.start.cell) != real.dim:
            raise LatticeError("start point does not belong to the lattice")

    @property
    def dim(self) -> int:
        return self.real.dim

    def digest(self) -> str:
        return _digest("infinite", self.law.spec, tuple(self.law.sigma), self.start)


class Trajectory:
    """One sampled path in both lattice and Euclidean coordinates."""

    def __init__(
        self,
        points: Sequence[LatticePoint],
        realized: np.ndarray,
        seed: int,
        path_index: int,
        meta: str,
    ):
        if len(points) != len(realized):
            raise ValueError("points and realized coordinates must be parallel")
        self.points = list(points)
        realized = np.asarray(realized, dtype=float)
        realized.flags.writeable = False
        self.realized = realized
        self.seed = int(seed)
        self.path_index = int(path_index)
        self.meta = meta

    def __len__(self) -> int:
        return len(self.points)


def step_finite_range(
    spec: FiniteRangeWalkSpec, state: LatticePoint, rng: np.random.Generator
) -> LatticePoint:
    """One transition of the vertex-dependent walk."""
    try:
        kern = spec.kernels[state.vertex]
    except KeyError:
        raise LatticeError(f"no kernel for base vertex {state.vertex!r}") from None
    i = int(np.searchsorted(kern.cdf, rng.random()))
    return LatticePoint(kern.targets[i], tuple(int(c) for c in state.cell + kern.cell_deltas[i]))


def step_infinite_range(
    spec: InfiniteRangeWalkSpec, state: LatticePoint, rng: np.random.Generator
) -> LatticePoint:
    """One transition: add a compound Poisson draw, mapped to cell shifts."""
    cells = _infinite_cell_increments(spec, 1, rng)
    return LatticePoint(state.vertex, tuple(int(c) for c in np.asarray(state.cell) + cells[0]))


def _infinite_cell_increments(
    spec: InfiniteRangeWalkSpec, n_steps: int, rng: np.random.Generator
) -> np.ndarray:
    """(n_steps, d) integer cell increments; same draw protocol as the
    batched compound Poisson sampler."""
    law = spec.law
    out = np.zeros((n_steps, spec.dim), dtype=np.int64)
    if law.total_mass == 0.0:
        if n_steps:
            rng.poisson(0.0, n_steps)  # keep the stream layout uniform
        return out
    ks = rng.poisson(law.total_mass, n_steps)
    total = int(ks.sum())
    if total == 0:
        return out
    pos = np.searchsorted(law._factor_cdf, rng.random(total))
    us = rng.random(total)
    rs = np.empty(total, dtype=np.int64)
    for p in range(len(law._active)):
        mask = pos == p
        if np.any(mask):
            rs[mask] = law._jump_samplers[p].sample_many(us[mask])
    factor_ids = np.array(law._active)[pos]
    jump_cells = -rs[:, None] * spec._direction_cells[factor_ids]
    starts = np.concatenate([[0], np.cumsum(ks)[:-1]]).astype(int)
    nz = np.nonzero(ks)[0]
    out[nz] = np.add.reduceat(jump_cells, starts[nz], axis=0)
    return out


def _finite_path_cells(
    spec: FiniteRangeWalkSpec, n_steps: int, rng: np.random.Generator
) -> tuple[list[str], np.ndarray]:
    """Vertices and cells along one path (length n_steps + 1)."""
    us = rng.random(n_steps)
    seq = spec.vertex_sequence(n_steps)
    cells = np.zeros((n_steps + 1, spec.dim), dtype=np.int64)
    cells[0] = spec.start.cell
    if seq is not None:
        vertices = seq + [spec.kernels[seq[-1]].single_target] if n_steps else [spec.start.vertex]
        deltas = np.zeros((n_steps, spec.dim), dtype=np.int64)
        for v in set(seq):
            at_v = np.array([k for k, w in enumerate(seq) if w == v], dtype=int)
            kern = spec.kernels[v]
            idx = np.searchsorted(kern.cdf, us[at_v])
            deltas[at_v] = kern.cell_deltas[idx]
        cells[1:] = cells[0] + np.cumsum(deltas, axis=0)
        return vertices, cells
    vertices = [spec.start.vertex]
    v = spec.start.vertex
    for k in range(n_steps):
        kern = spec.kernels[v]
        i = int(np.searchsorted(kern.cdf, us[k]))
        cells[k + 1] = cells[k] + kern.cell_deltas[i]
        v = kern.targets[i]
        vertices.append(v)
    return vertices, cells


def _walk_path(spec, n_steps: int, rng: np.random.Generator) -> tuple[list[str], np.ndarray]:
    if isinstance(spec, FiniteRangeWalkSpec):
        return _finite_path_cells(spec, n_steps, rng)
    incr = _infinite_cell_increments(spec, n_steps, rng)
    cells = np.zeros((n_steps + 1, spec.dim), dtype=np.int64)
    cells[0] = spec.start.cell
    cells[1:] = cells[0] + np.cumsum(incr, axis=0)
    return [spec.start.vertex] * (n_steps + 1), cells


def _realize_cells(real: PeriodicRealization, vertices: list[str], cells: np.ndarray) -> np.ndarray:
    offs = np.array([real.offsets[v] for v in vertices])
    return offs + cells @ real.basis.T


def _run_paths(
    spec,
    n_steps: int,
    n_paths: int,
    master_seed: int,
    per_path: Callable[[int], object],
    workers: int | None,
) -> list:
    if workers is None or workers <= 1 or n_paths <= 1:
        return [per_path(i) for i in range(n_paths)]
    results: list = [None] * n_paths
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, res in zip(range(n_paths), pool.map(per_path, range(n_paths))):
            results[i] = res
    return results


def simulate(
    spec,
    n_steps: int,
    n_paths: int,
    master_seed: int,
    workers: int | None = None,
) -> list[Trajectory]:
    """Independent trajectories, one per derived stream.

    Path i is a pure function of (spec, n_steps, master_seed, i); the
    worker count changes scheduling only, never output.
    """
    if n_steps < 0 or n_paths < 0:
        raise ValueError("n_steps and n_paths must be nonnegative")
    meta = spec.digest()

    def one(i: int) -> Trajectory:
        rng = stream(master_seed, i)
        vertices, cells = _walk_path(spec, n_steps, rng)
        realized = _realize_cells(spec.real, vertices, cells)
        points = [LatticePoint(v, tuple(int(c) for c in row)) for v, row in zip(vertices, cells)]
        return Trajectory(points, realized, master_seed, i, meta)

    return _run_paths(spec, n_steps, n_paths, master_seed, one, workers)


def simulate_endpoints(
    spec,
    n_steps: int,
    n_paths: int,
    master_seed: int,
    workers: int | None = None,
) -> np.ndarray:
    """Realized endpoints only, as an (n_paths, d) array.

    Draws per path match :func:`simulate` exactly; only the recording
    differs, so endpoints agree with full trajectories bit for bit.
    """
    if n_steps < 0 or n_paths < 0:
        raise ValueError("n_steps and n_paths must be nonnegative")

    def one(i: int) -> np.ndarray:
        rng = stream(master_seed, i)
        vertices, cells = _walk_path(spec, n_steps, rng)
        return _realize_cells(spec.real, [vertices[-1]], cells[-1:])[0]

    rows = _run_paths(spec, n_steps, n_paths, master_seed, one, workers)
    return np.array(rows).reshape(n_paths, spec.dim)


def walk_cf(spec, n_steps: int, t: Sequence[float]) -> complex:
    """Characteristic function of the walker's position after ``n_steps``.

    For infinite-range walks this is the one-step function to the n-th
    power.  For finite-range walks it is the product of the kernel
    functions along the visited base vertices, which is well defined only
    when that sequence is deterministic.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if isinstance(spec, InfiniteRangeWalkSpec):
        return characteristic_function(spec.law, None, t) ** n_steps
    seq = spec.vertex_sequence(n_steps)
    if seq is None:
        raise LatticeError(
            "analytic characteristic function unavailable: the visited base-vertex "
            "sequence is random; use the empirical estimate instead"
        )
    value = 1.0 + 0.0j
    for v in seq:
        value *= spec.kernels[v].cf(t)
    return value
