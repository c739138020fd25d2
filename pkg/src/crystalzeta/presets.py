"""Built-in lattices and the step laws classically attached to them.

Four realized lattices ship with the package:

* ``line``: the integer line (one base vertex, one loop pair);
* ``square``: Z^2 with axis edges (one base vertex, two loop pairs);
* ``triangular``: Z^2 with axis edges plus the (1, -1) diagonal;
* ``hexagonal``: honeycomb with a two-vertex base and offsets
  (0, 0) and (1/3, 2/3).

Each preset also exposes natural step laws: nearest-neighbor kernels for
the finite-range walks, a per-axis geometric-ratio product law for the
infinite-range walk on single-vertex bases, and the range-N kernel on the
triangular lattice whose support has 3N^2 + 3N + 1 points.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .distributions import CompoundPoissonLaw, compound_poisson_law
from .graphs import BaseGraph, CrystalLattice, Edge, PeriodicRealization
from .walks import FiniteRangeWalkSpec, InfiniteRangeWalkSpec, build_step_kernel
from .zeta import FiniteEulerSpec, PoissonWeights, ShintaniZetaSpec

__all__ = [
    "preset_names",
    "get_preset",
    "line_lattice",
    "square_lattice",
    "triangular_lattice",
    "hexagonal_lattice",
    "line_two_point_weights",
    "line_poisson_spec",
    "square_nn_weights",
    "triangular_range_points",
    "triangular_range_weights",
    "hexagonal_step_vectors",
    "hexagonal_step_weights",
    "euler_product_spec",
    "euler_product_law",
    "finite_walk",
    "infinite_walk",
]


def _bouquet(loops: list[tuple[int, ...]]) -> PeriodicRealization:
    """Single-vertex base with one loop pair per voltage vector."""
    d = len(loops[0])
    edges = []
    voltage = {}
    for k, vec in enumerate(loops, start=1):
        edges.append(Edge(f"e{k}", "x", "x", f"e{k}~"))
        edges.append(Edge(f"e{k}~", "x", "x", f"e{k}"))
        voltage[f"e{k}"] = vec
        voltage[f"e{k}~"] = tuple(-v for v in vec)
    base = BaseGraph(["x"], edges)
    lattice = CrystalLattice(base, d, voltage)
    return PeriodicRealization(lattice, {"x": [0.0] * d})


def line_lattice() -> PeriodicRealization:
    """The integer line: cell n sits at position n."""
    return _bouquet([(1,)])


def square_lattice() -> PeriodicRealization:
    """Z^2 with unit axis steps."""
    return _bouquet([(1, 0), (0, 1)])


def triangular_lattice() -> PeriodicRealization:
    """Z^2 with axis steps plus the (1, -1) diagonal (six neighbors)."""
    return _bouquet([(1, 0), (0, 1), (1, -1)])


def hexagonal_lattice() -> PeriodicRealization:
    """Honeycomb lattice with base vertices x, y and three x -> y edges.

    The zero-cell lift of y sits at (1/3, 2/3); the two other x -> y edges
    reach the y lifts in cells (0, -1) and (-1, 0), so the outgoing star
    of x realizes the displacements (1/3, 2/3), (1/3, -1/3), (-2/3, -1/3).
    """
    edges = []
    voltage: dict[str, tuple[int, int]] = {}
    for k, vec in enumerate([(0, 0), (0, -1), (-1, 0)], start=1):
        edges.append(Edge(f"e{k}", "x", "y", f"e{k}~"))
        edges.append(Edge(f"e{k}~", "y", "x", f"e{k}"))
        voltage[f"e{k}"] = vec
        voltage[f"e{k}~"] = (-vec[0], -vec[1])
    base = BaseGraph(["x", "y"], edges)
    lattice = CrystalLattice(base, 2, voltage)
    return PeriodicRealization(lattice, {"x": [0.0, 0.0], "y": [1.0 / 3.0, 2.0 / 3.0]})


_PRESETS = {
    "line": line_lattice,
    "square": square_lattice,
    "triangular": triangular_lattice,
    "hexagonal": hexagonal_lattice,
}


def preset_names() -> list[str]:
    return ["line", "square", "triangular", "hexagonal"]


def get_preset(name: str) -> PeriodicRealization:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {preset_names()}") from None
    return builder()


def line_two_point_weights(alpha: float = 0.5, beta: float = 0.5) -> list[tuple[tuple[float, ...], float]]:
    """Steps +1 / -1 with probabilities alpha / beta."""
    return [((1.0,), float(alpha)), ((-1.0,), float(beta))]


def square_nn_weights(
    right: float = 0.25, left: float = 0.25, up: float = 0.25, down: float = 0.25
) -> list[tuple[tuple[float, ...], float]]:
    """The four axis neighbors of the square lattice."""
    return [
        ((1.0, 0.0), float(right)),
        ((-1.0, 0.0), float(left)),
        ((0.0, 1.0), float(up)),
        ((0.0, -1.0), float(down)),
    ]


def triangular_range_points(reach: int) -> list[tuple[int, int]]:
    """Integer points within triangular-lattice graph distance ``reach``.

    The set {k : |k1| <= N, |k2| <= N, |k1 + k2| <= N} has exactly
    3N^2 + 3N + 1 elements.
    """
    if reach < 1:
        raise ValueError("reach must be a positive integer")
    pts = [
        (k1, k2)
        for k1 in range(-reach, reach + 1)
        for k2 in range(-reach, reach + 1)
        if abs(k1 + k2) <= reach
    ]
    return sorted(pts)


def triangular_range_weights(
    reach: int, weights: Sequence[float] | None = None
) -> list[tuple[tuple[float, ...], float]]:
    """Range-``reach`` kernel on the triangular lattice (uniform by default)."""
    pts = triangular_range_points(reach)
    if weights is None:
        w = [1.0 / len(pts)] * len(pts)
    else:
        w = [float(x) for x in weights]
        if len(w) != len(pts):
            raise ValueError(f"need {len(pts)} weights for reach {reach}")
    return [((float(a), float(b)), x) for (a, b), x in zip(pts, w)]


def hexagonal_step_vectors(vertex: str) -> list[tuple[float, float]]:
    """The three outgoing displacements at an x-type or y-type vertex."""
    x_steps = [(1.0 / 3.0, 2.0 / 3.0), (1.0 / 3.0, -1.0 / 3.0), (-2.0 / 3.0, -1.0 / 3.0)]
    if vertex == "x":
        return x_steps
    if vertex == "y":
        return [(-a, -b) for a, b in x_steps]
    raise KeyError(f"hexagonal base has vertices 'x' and 'y', not {vertex!r}")


def hexagonal_step_weights(
    vertex: str, weights: Sequence[float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
) -> list[tuple[tuple[float, ...], float]]:
    vecs = hexagonal_step_vectors(vertex)
    w = [float(x) for x in weights]
    if len(w) != 3:
        raise ValueError("hexagonal kernels take exactly three weights")
    return [(v, x) for v, x in zip(vecs, w)]


def euler_product_spec(name: str, ratio: float = 2.0 / 3.0) -> tuple[FiniteEulerSpec, np.ndarray]:
    """Per-generator finite product for a single-vertex preset.

    One factor per translation generator, direction the generator image,
    unit coefficients, and sigma chosen so each factor's geometric ratio
    equals ``ratio``.  Parameterizing by the ratio pins the law directly:
    the ratio, not the (coefficient, sigma) split, is what the Levy
    measure and characteristic function depend on.
    """
    real = get_preset(name)
    if real.base.num_vertices != 1:
        raise ValueError(f"preset {name!r} has more than one base vertex")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    d = real.dim
    directions = tuple(tuple(float(x) for x in real.basis[:, k]) for k in range(d))
    spec = FiniteEulerSpec(dim=d, coeffs=(1.0,) * d, directions=directions)
    sigma = np.linalg.solve(
        np.array(directions, dtype=float), np.full(d, -math.log(ratio))
    )
    return spec, sigma


def euler_product_law(name: str, ratio: float = 2.0 / 3.0) -> CompoundPoissonLaw:
    """Compound Poisson law of :func:`euler_product_spec`."""
    spec, sigma = euler_product_spec(name, ratio)
    return compound_poisson_law(spec, sigma)


def line_poisson_spec(
    rate: float = 1.0, sigma: float = 2.0, base: int = 2
) -> tuple[ShintaniZetaSpec, np.ndarray]:
    """One-dimensional series spec whose normalized law is Poisson(rate).

    Weights live on the index ladder (base**k - 1, 0); c_1 couples the
    first index to the argument and c_2 = 0 keeps the second inert.
    """
    spec = ShintaniZetaSpec(
        dim=1,
        form_matrix=((1.0, 0.0), (0.0, 1.0)),
        shifts=(1.0, 1.0),
        directions=((-1.0 / math.log(base),), (0.0,)),
        weights=PoissonWeights(rate=float(rate), base=int(base), sigma=(float(sigma),)),
    )
    return spec, np.array([float(sigma)])


def finite_walk(
    name: str,
    *,
    weights: Sequence[float] | None = None,
    weights_y: Sequence[float] | None = None,
    reach: int = 1,
    sigma: Sequence[float] | None = None,
    start=None,
) -> FiniteRangeWalkSpec:
    """Finite-range walk with the preset's natural kernel.

    ``weights`` means (alpha, beta) on the line, the four axis weights on
    the square, the range-``reach`` table on the triangular lattice, and
    the x-vertex triple on the hexagonal one (``weights_y`` the y-vertex
    triple, defaulting to ``weights``).
    """
    real = get_preset(name)
    if name == "line":
        w = weights if weights is not None else (0.5, 0.5)
        steps = {"x": line_two_point_weights(*w)}
    elif name == "square":
        w = weights if weights is not None else (0.25, 0.25, 0.25, 0.25)
        steps = {"x": square_nn_weights(*w)}
    elif name == "triangular":
        steps = {"x": triangular_range_weights(reach, weights)}
    elif name == "hexagonal":
        wx = weights if weights is not None else (1.0 / 3.0,) * 3
        wy = weights_y if weights_y is not None else wx
        steps = {"x": hexagonal_step_weights("x", wx), "y": hexagonal_step_weights("y", wy)}
    else:
        raise KeyError(f"unknown preset {name!r}; choose from {preset_names()}")
    kernels = {v: build_step_kernel(real, v, sv, sigma) for v, sv in steps.items()}
    return FiniteRangeWalkSpec(real, kernels, start)


def infinite_walk(name: str, ratio: float = 2.0 / 3.0, start=None) -> InfiniteRangeWalkSpec:
    """Infinite-range walk driven by :func:`euler_product_law`."""
    real = get_preset(name)
    return InfiniteRangeWalkSpec(real, euler_product_law(name, ratio), start)
