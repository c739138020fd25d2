"""Discrete laws generated by zeta series and finite Euler products.

Covers the normalized point masses a convergent multiple series induces,
the compound Poisson laws behind valid finite-product characteristic
functions (with their finite Levy measures and jump samplers), the
numeric falsification search for invalid coefficient choices, and the
geometric-sequence test recovering product parameters from a jump table.

Samplers take an explicit ``numpy.random.Generator``; parallel work
should derive independent streams with :func:`stream`.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import zeta as _scipy_zeta
from scipy.stats import qmc

from .graphs import LatticePoint
from .zeta import (
    ConvergenceError,
    FiniteEulerSpec,
    FiniteWeights,
    PoissonWeights,
    ShintaniZetaSpec,
    TruncationPolicy,
    finite_euler_eval,
    shintani_eval,
)

__all__ = [
    "LatticeDistribution",
    "LevyMeasure",
    "CompoundPoissonLaw",
    "stream",
    "shintani_distribution",
    "finite_support_to_shintani",
    "characteristic_function",
    "characteristic_function_grid",
    "compound_poisson_law",
    "sample_jump",
    "sample_compound_poisson",
    "sample_compound_poisson_batch",
    "falsify_cf",
    "FalsifyResult",
    "geometric_check",
    "GeometricFactorization",
    "riemann_zeta_distribution",
]

_MERGE_DECIMALS = 12


def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator number ``index`` derived from ``master_seed``.

    The split is ``default_rng((master_seed, index))``: the pair seeds a
    SeedSequence, so distinct indices give statistically independent
    streams and the mapping is stable across runs and platforms.
    """
    return np.random.default_rng((int(master_seed), int(index)))


def _lock(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class LatticeDistribution:
    """Finitely supported (possibly truncated) law on points of R^d.

    ``total`` is the retained mass; ``1 - total`` is the truncated tail.
    """

    def __init__(
        self,
        points: np.ndarray,
        masses: np.ndarray,
        lattice_points: Sequence[LatticePoint] | None = None,
    ):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        masses = np.asarray(masses, dtype=float)
        if points.shape[0] != masses.shape[0]:
            raise ValueError("points and masses must be parallel")
        if np.any(masses < -1e-15):
            raise ValueError("masses must be nonnegative")
        masses = np.maximum(masses, 0.0)
        keys = np.round(points, _MERGE_DECIMALS)
        if len(np.unique(keys, axis=0)) != len(keys):
            raise ValueError("support points must be pairwise distinct")
        total = float(masses.sum())
        if total > 1 + 1e-12:
            raise ValueError(f"total mass {total} exceeds 1")
        self.points = _lock(points)
        self.masses = _lock(masses)
        self.total = total
        self.lattice_points = tuple(lattice_points) if lattice_points is not None else None
        if self.lattice_points is not None and len(self.lattice_points) != len(masses):
            raise ValueError("lattice_points must be parallel to the support")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - self.total)

    @property
    def support(self) -> list[tuple[tuple[float, ...], float]]:
        return [(tuple(p), float(m)) for p, m in zip(self.points, self.masses)]

    def __len__(self) -> int:
        return len(self.masses)

    @staticmethod
    def merge(points: Sequence[Sequence[float]], masses: Sequence[float],
              lattice_points: Sequence[LatticePoint | None] | None = None) -> "LatticeDistribution":
        """Sum masses of coincident points (first-seen order kept)."""
        bucket: dict[tuple, int] = {}
        out_pts: list[np.ndarray] = []
        out_mass: list[float] = []
        out_lp: list[LatticePoint | None] = []
        for i, (p, w) in enumerate(zip(points, masses)):
            p = np.asarray(p, dtype=float)
            key = tuple(np.round(p, _MERGE_DECIMALS))
            if key in bucket:
                out_mass[bucket[key]] += float(w)
            else:
                bucket[key] = len(out_pts)
                out_pts.append(p)
                out_mass.append(float(w))
                out_lp.append(lattice_points[i] if lattice_points is not None else None)
        lp = None
        if lattice_points is not None and all(x is not None for x in out_lp):
            lp = out_lp  # type: ignore[assignment]
        return LatticeDistribution(np.array(out_pts), np.array(out_mass), lp)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw support points proportionally to their masses."""
        cdf = np.cumsum(self.masses) / self.total
        n = 1 if size is None else int(size)
        idx = np.searchsorted(cdf, rng.random(n))
        out = self.points[idx]
        return out[0] if size is None else out


class LevyMeasure:
    """Finite atomic measure: jump locations with positive weights."""

    def __init__(self, locations: np.ndarray, weights: np.ndarray):
        locations = np.atleast_2d(np.asarray(locations, dtype=float))
        weights = np.asarray(weights, dtype=float)
        if locations.shape[0] != weights.shape[0]:
            raise ValueError("locations and weights must be parallel")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        self.locations = _lock(locations)
        self.weights = _lock(weights)
        self.total_mass = float(weights.sum())

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    def exponent(self, t: Sequence[float]) -> complex:
        """The integral of (e^{i<t,x>} - 1) against the measure."""
        t = np.asarray(t, dtype=float)
        return complex(np.sum(self.weights * (np.exp(1j * self.locations @ t) - 1.0)))


class _LogSeriesSampler:
    """Logarithmic distribution P(r) = A**r / (r * -log(1-A)) on r >= 1.

    Inverse CDF over a table extending to cumulative mass 1 - 1e-12;
    the remaining tail is resolved exactly on demand.
    """

    def __init__(self, ratio: float):
        if not 0.0 < ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        self.ratio = float(ratio)
        self.norm = -math.log1p(-self.ratio)
        probs = []
        r, cum = 1, 0.0
        while cum < 1.0 - 1e-12:
            p = self.ratio**r / (r * self.norm)
            probs.append(p)
            cum += p
            r += 1
            if r > 100_000:  # ratio extremely close to 1; table is capped
                break
        self.cdf = np.cumsum(probs)

    def pmf(self, r: int) -> float:
        return self.ratio**r / (r * self.norm)

    def sample_many(self, us: np.ndarray) -> np.ndarray:
        rs = np.searchsorted(self.cdf, us) + 1
        over = rs > len(self.cdf)
        if np.any(over):
            for i in np.nonzero(over)[0]:
                u, r, cum = us[i], len(self.cdf), float(self.cdf[-1])
                while cum < u:
                    r += 1
                    cum += self.pmf(r)
                rs[i] = r
        return rs


class CompoundPoissonLaw:
    """Compound Poisson law on R^d induced by a valid finite product.

    The Levy measure puts weight ratio**r / r at -r * a_l for each factor
    direction a_l, and the jump law draws a factor proportionally to its
    share -log(1 - ratio_l) of the total mass, then a logarithmic jump
    size r.
    """

    def __init__(self, spec: FiniteEulerSpec, sigma: Sequence[float],
                 levy_tail: float = 1e-14):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (spec.dim,):
            raise ValueError("sigma must be a real vector of the spec dimension")
        A = spec.direction_matrix()
        coeffs = np.array(spec.coeffs, dtype=float)
        if np.any(coeffs < 0):
            bad = int(np.argmin(coeffs))
            raise ValueError(
                f"coefficient {bad} is negative; the normalized product is not a "
                "characteristic function (try falsify_cf for a witness)"
            )
        ratios = coeffs * np.exp(-(A @ sigma))
        if np.any(ratios >= 1.0):
            bad = int(np.argmax(ratios))
            raise ValueError(f"factor {bad} has ratio {ratios[bad]:.6g} >= 1; no law exists")
        active = [l for l in range(spec.num_factors) if ratios[l] > 0]
        if active and np.linalg.matrix_rank(A[active]) < len(active):
            warnings.warn(
                "active directions are linearly dependent; the law is still "
                "constructed but the validity criterion assumed independence",
                stacklevel=2,
            )
        locs: list[np.ndarray] = []
        wts: list[float] = []
        for l in active:
            r_ratio = float(ratios[l])
            # geometric tail of sum_{r>R} ratio**r / r below levy_tail
            R = 1
            while r_ratio ** (R + 1) / ((R + 1) * (1.0 - r_ratio)) > levy_tail:
                R += 1
            rs = np.arange(1, R + 1)
            locs.append(-np.outer(rs, A[l]))
            wts.append(r_ratio**rs / rs)
        self.spec = spec
        self.sigma = _lock(sigma)
        self.ratios = _lock(ratios)
        self.total_mass = float(-np.sum(np.log1p(-ratios[active]))) if active else 0.0
        if active:
            self.levy = LevyMeasure(np.vstack(locs), np.concatenate(wts))
        else:
            self.levy = LevyMeasure(np.zeros((0, spec.dim)), np.zeros(0))
        self._active = active
        self._factor_share = np.array(
            [-math.log1p(-ratios[l]) for l in active], dtype=float
        )
        self._factor_cdf = (
            np.cumsum(self._factor_share) / self.total_mass if active else np.zeros(0)
        )
        self._jump_samplers = [_LogSeriesSampler(float(ratios[l])) for l in active]
        self._directions = A

    @property
    def dim(self) -> int:
        return self.spec.dim

    def jump_pmf(self) -> dict[tuple[int, int], float]:
        """P(jump = -r * a_l) keyed by (r, l); l is 0-based, r >= 1."""
        out: dict[tuple[int, int], float] = {}
        for pos, l in enumerate(self._active):
            ratio = float(self.ratios[l])
            R = len(self._jump_samplers[pos].cdf)
            for r in range(1, R + 1):
                out[(r, l)] = ratio**r / (r * self.total_mass)
        return out

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.spec, tuple(self.sigma))).encode())
        return h.hexdigest()[:16]


def compound_poisson_law(spec: FiniteEulerSpec, sigma: Sequence[float]) -> CompoundPoissonLaw:
    """Build the compound Poisson law whose characteristic function is the
    normalized finite product at ``sigma``."""
    return CompoundPoissonLaw(spec, sigma)


def sample_jump(law: CompoundPoissonLaw, rng: np.random.Generator) -> np.ndarray:
    """One jump: -r * a_l with l by mass share and r logarithmic."""
    if law.total_mass == 0.0:
        raise ValueError("law has no jumps (zero total mass)")
    pos = int(np.searchsorted(law._factor_cdf, rng.random()))
    r = int(law._jump_samplers[pos].sample_many(np.array([rng.random()]))[0])
    return -r * law._directions[law._active[pos]]


def sample_compound_poisson(law: CompoundPoissonLaw, rng: np.random.Generator) -> np.ndarray:
    """One draw: a Poisson(total_mass) number of independent jumps, summed."""
    return sample_compound_poisson_batch(law, 1, rng)[0]


def sample_compound_poisson_batch(
    law: CompoundPoissonLaw, n: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` independent draws as an (n, d) array.

    Draw order: all Poisson counts, then all factor choices, then all jump
    sizes, so the output is a deterministic function of the generator state.
    """
    out = np.zeros((n, law.dim))
    ks = rng.poisson(law.total_mass, n) if law.total_mass > 0 else np.zeros(n, dtype=int)
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
    jumps = -rs[:, None] * law._directions[np.array(law._active)[pos]]
    starts = np.concatenate([[0], np.cumsum(ks)[:-1]]).astype(int)
    nz = np.nonzero(ks)[0]
    out[nz] = np.add.reduceat(jumps, starts[nz], axis=0)
    return out


def shintani_distribution(
    spec: ShintaniZetaSpec,
    sigma: Sequence[float],
    trunc: TruncationPolicy = TruncationPolicy(),
) -> LatticeDistribution:
    """Normalized point masses of the multiple series at ``sigma``.

    The multi-index n is sent to the point -sum_l c_l * log(form_l(n)) with
    mass weight(n) * prod_l form_l(n)**-<c_l, sigma> / Z(sigma).  Weights
    must be single-signed; coincident points merge by mass summation.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (spec.dim,):
        raise ValueError("sigma must be a real vector of the spec dimension")
    norm, _ = shintani_eval(spec, sigma.astype(complex), trunc)
    norm = norm.real
    if abs(norm) < 1e-300:
        raise ValueError("series vanishes at sigma; cannot normalize")
    M = np.array(spec.form_matrix, dtype=float)
    u = np.array(spec.shifts, dtype=float)
    C = np.array(spec.directions, dtype=float)  # (m, d)

    def point_and_mass(key: tuple[int, ...], w: float) -> tuple[np.ndarray, float]:
        forms = M @ (np.array(key, dtype=float) + u)
        logf = np.log(forms)
        pt = -(C.T @ logf)
        mass = w * math.exp(-float((C @ sigma) @ logf))
        return pt, mass

    pts: list[np.ndarray] = []
    ms: list[float] = []
    if isinstance(spec.weights, FiniteWeights):
        vals = [w for _, w in spec.weights.items() if w != 0]
        if any(abs(w.imag) > 1e-15 for w in vals):
            raise ValueError("weights must be real to define a distribution")
        signs = {math.copysign(1.0, w.real) for w in vals}
        if len(signs) > 1:
            raise ValueError("weights change sign; not proportional to a distribution")
        for key, w in spec.weights.items():
            if w == 0:
                continue
            pt, mass = point_and_mass(key, w.real)
            pts.append(pt)
            ms.append(mass / norm)
    else:
        wf: PoissonWeights = spec.weights
        c1 = np.array(spec.directions[0], dtype=float)
        tilt = float((-math.log(wf.base) * c1) @ np.asarray(wf.sigma, dtype=float))
        r = spec.num_indices
        for k in range(trunc.max_terms + 1):
            key = (wf.base**k - 1,) + (0,) * (r - 1)
            w = math.exp(k * math.log(wf.rate) - k * tilt - math.lgamma(k + 1))
            pt, mass = point_and_mass(key, w)
            mass /= norm
            if mass < 1e-15 and k > wf.rate:
                break
            pts.append(pt)
            ms.append(mass)
    dist = LatticeDistribution.merge(pts, ms)
    if dist.total > 1 + 1e-9:
        raise ValueError("masses exceed 1; series normalization is inconsistent")
    return dist


def finite_support_to_shintani(
    points: Sequence[Sequence[float]],
    weights: Sequence[float],
    sigma: Sequence[float],
) -> ShintaniZetaSpec:
    """Zeta spec whose normalized law at ``sigma`` is the given point law.

    Uses one index per point with distinct integer bases j_l = l + 2: the
    l-th direction is -a_l / log(j_l) and the weight table concentrates
    on (0, ..., j_l - 1, ..., 0) with weight w_l * exp(-<a_l, sigma>).
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise ValueError("need at least one support point")
    d = pts[0].shape[0]
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (d,):
        raise ValueError("sigma must have the same dimension as the points")
    if not np.any(sigma != 0.0):
        raise ValueError("sigma must be nonzero")
    ws = np.asarray(weights, dtype=float)
    if np.any(ws < 0):
        raise ValueError("weights must be nonnegative")
    if abs(ws.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {ws.sum()}, expected 1")
    m = len(pts)
    bases = [l + 2 for l in range(m)]
    directions = tuple(tuple(-p / math.log(j)) for p, j in zip(pts, bases))
    form = tuple(tuple(1.0 if i == l else 0.0 for i in range(m)) for l in range(m))
    table = {}
    for l, (p, w, j) in enumerate(zip(pts, ws, bases)):
        key = tuple(j - 1 if i == l else 0 for i in range(m))
        table[key] = w * math.exp(-float(p @ sigma))
    return ShintaniZetaSpec(
        dim=d,
        form_matrix=form,
        shifts=(1.0,) * m,
        directions=directions,
        weights=FiniteWeights.from_dict(table),
    )


def characteristic_function(obj, sigma, t) -> complex:
    """E[exp(i <t, X>)] for a law, a series spec, or a finite product.

    For specs the value is the ratio Z(sigma + i t) / Z(sigma); for an
    explicit law it is the finite sum over the support (``sigma`` unused).
    """
    if isinstance(obj, LatticeDistribution):
        t = np.asarray(t, dtype=float)
        return complex(np.sum(obj.masses * np.exp(1j * (obj.points @ t))))
    if isinstance(obj, CompoundPoissonLaw):
        return complex(np.exp(obj.levy.exponent(t)))
    sigma = np.asarray(sigma, dtype=float)
    t = np.asarray(t, dtype=float)
    s = sigma + 1j * t
    if isinstance(obj, ShintaniZetaSpec):
        num, _ = shintani_eval(obj, s)
        den, _ = shintani_eval(obj, sigma.astype(complex))
        return num / den
    if isinstance(obj, FiniteEulerSpec):
        return finite_euler_eval(obj, s) / finite_euler_eval(obj, sigma.astype(complex))
    raise TypeError(f"no characteristic function for {type(obj).__name__}")


def characteristic_function_grid(obj, sigma, ts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`characteristic_function` over rows of ``ts``."""
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    if isinstance(obj, LatticeDistribution):
        return (np.exp(1j * ts @ obj.points.T) * obj.masses).sum(axis=1)
    if isinstance(obj, CompoundPoissonLaw):
        phase = np.exp(1j * ts @ obj.levy.locations.T)
        return np.exp((phase - 1.0) @ obj.levy.weights)
    if isinstance(obj, FiniteEulerSpec):
        sigma = np.asarray(sigma, dtype=float)
        A = obj.direction_matrix()
        ratios = np.array(obj.coeffs) * np.exp(-(A @ sigma))
        zs = ratios * np.exp(-1j * ts @ A.T)  # (n, m)
        return np.prod((1.0 - ratios) / (1.0 - zs), axis=1)
    return np.array([characteristic_function(obj, sigma, t) for t in ts])


@dataclass(frozen=True)
class FalsifyResult:
    t: tuple[float, ...]
    magnitude: float


def falsify_cf(
    spec: FiniteEulerSpec,
    sigma: Sequence[float],
    grid_points: int = 10_000,
    refine_steps: int = 100,
    span: float = 50.0,
) -> FalsifyResult | None:
    """Search for an argument where the normalized product exceeds 1.

    Returns a witness when the search finds |f(t)| > 1 + 1e-9, and None
    otherwise.  With all coefficients nonnegative the ratio is a genuine
    characteristic function, so |f| <= 1 everywhere and no search is run.
    """
    if all(a >= 0 for a in spec.coeffs):
        return None
    sigma = np.asarray(sigma, dtype=float)
    d = spec.dim
    sampler = qmc.Halton(d=d, scramble=False)
    grid = span * (2.0 * sampler.random(grid_points) - 1.0)
    mags = np.abs(characteristic_function_grid(spec, sigma, grid))
    best_idx = int(np.argmax(mags))
    best_t = grid[best_idx].copy()
    best = float(mags[best_idx])

    def mag(t: np.ndarray) -> float:
        return abs(characteristic_function(spec, sigma, t))

    step = span / max(1.0, grid_points ** (1.0 / d))
    for _ in range(refine_steps):
        improved = False
        for axis in range(d):
            for sgn in (+1.0, -1.0):
                cand = best_t.copy()
                cand[axis] += sgn * step
                v = mag(cand)
                if v > best:
                    best, best_t, improved = v, cand, True
        if not improved:
            step *= 0.7
            if step < 1e-12:
                break
    if best > 1.0 + 1e-9:
        return FalsifyResult(tuple(best_t), best)
    return None


@dataclass(frozen=True)
class GeometricFactorization:
    coeffs: tuple[float, ...]
    sigma: tuple[float, ...]
    ratios: tuple[float, ...]


def geometric_check(
    beta: Mapping[tuple[int, int], float],
    directions: Sequence[Sequence[float]],
    rel_tol: float = 1e-9,
) -> GeometricFactorization | None:
    """Recover product parameters from a jump table, when they exist.

    ``beta[(r, l)]`` is the probability of the jump r * a_l (r >= 1, l
    0-based).  When every sequence r * beta(r, l) is geometric with ratio
    in (0, 1) within ``rel_tol``, returns coefficients in (0, 1], and the
    least-norm ``sigma`` solving <a_l, sigma> = -log(ratio_l / coeff_l);
    otherwise None.
    """
    A = np.array([np.asarray(a, dtype=float) for a in directions])
    m = A.shape[0]
    if np.linalg.matrix_rank(A) < m:
        raise ValueError("directions are linearly dependent; cannot solve for sigma")
    total = sum(beta.values())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"jump table sums to {total}, expected 1")
    ratios = []
    for l in range(m):
        rs = sorted(r for (r, ll) in beta if ll == l and beta[(r, ll)] > 0)
        if not rs or rs[0] != 1 or rs != list(range(1, len(rs) + 1)):
            return None
        g = np.array([r * beta[(r, l)] for r in rs])
        if len(g) < 2:
            return None  # a single entry is ratio 0, outside (0, 1)
        q = g[1:] / g[:-1]
        ratio = float(np.median(q))
        if not 0.0 < ratio < 1.0:
            return None
        if np.any(np.abs(q - ratio) > rel_tol * ratio):
            return None
        ratios.append(ratio)
    # factor each ratio as coeff * exp(-t) with coeff in (0, 1], t > 0
    coeffs = tuple(1.0 for _ in range(m))
    ts = np.array([-math.log(r) for r in ratios])
    sigma, *_ = np.linalg.lstsq(A, ts, rcond=None)
    return GeometricFactorization(coeffs, tuple(sigma), tuple(ratios))


def riemann_zeta_distribution(sigma: float, n_max: int) -> LatticeDistribution:
    """One-dimensional law with mass n**-sigma / zeta(sigma) at -log(n).

    Truncated at ``n_max``; the deficit equals the dropped Dirichlet tail.
    """
    if sigma <= 1:
        raise ValueError("sigma must exceed 1")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    ns = np.arange(1, n_max + 1, dtype=float)
    masses = ns**-sigma / float(_scipy_zeta(sigma))
    points = -np.log(ns)[:, None]
    return LatticeDistribution(points, masses)
