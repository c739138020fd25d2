"""Independent cross-checks for laws and samplers.

Everything here deliberately avoids the code paths it validates: the
empirical characteristic function is a plain Monte Carlo average, and the
compound Poisson probability mass oracle expands the Poisson-convolution
series directly instead of touching the samplers.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import chi2

from .distributions import CompoundPoissonLaw, sample_compound_poisson_batch

__all__ = [
    "empirical_cf",
    "BruteForcePmf",
    "brute_force_cp_pmf",
    "CfComparison",
    "compare_cf",
    "sampler_vs_oracle",
]


def empirical_cf(samples: np.ndarray, t: Sequence[float]) -> complex:
    """Monte Carlo estimate of E[exp(i <t, X>)] from raw samples."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("need at least one sample")
    t = np.asarray(t, dtype=float)
    return complex(np.mean(np.exp(1j * samples @ t)))


class BruteForcePmf:
    """Truncated probability table with its accounting.

    ``deficit`` is the mass living outside the truncation box (1 minus the
    retained total).  ``unaccounted`` bounds the error of the *retained*
    masses themselves: the dropped Poisson orders, plus the whole deficit
    when jumps have mixed component signs (then box re-entry can bias the
    retained masses and exactness on the box is not certified).
    """

    def __init__(self, probs: Mapping[tuple, float], deficit: float, unaccounted: float):
        self.probs = dict(probs)
        self.deficit = float(deficit)
        self.unaccounted = float(unaccounted)

    @property
    def total(self) -> float:
        return float(sum(self.probs.values()))

    def __getitem__(self, key: tuple) -> float:
        return self.probs.get(tuple(key), 0.0)

    def __len__(self) -> int:
        return len(self.probs)


def _atom_key(loc: np.ndarray, integral: bool) -> tuple:
    if integral:
        return tuple(int(round(x)) for x in loc)
    return tuple(round(float(x), 9) for x in loc)


def brute_force_cp_pmf(law: CompoundPoissonLaw, support_radius: float) -> BruteForcePmf:
    """Mass function of the law by direct Poisson-convolution expansion.

    Jumps and all convolution results are truncated to the box
    |x|_inf <= support_radius; Poisson orders are added until their tail
    drops below 1e-12.  The deficit is 1 minus the retained mass.
    """
    lam = law.total_mass
    locs = law.levy.locations
    integral = bool(locs.size == 0 or np.max(np.abs(locs - np.rint(locs))) <= 1e-9)
    zero = _atom_key(np.zeros(law.dim), integral)
    if lam == 0.0:
        return BruteForcePmf({zero: 1.0}, 0.0, 0.0)
    # when every component moves in one direction only, partial sums are
    # componentwise monotone, so a path that leaves the box never returns
    # and the retained masses are exact
    monotone = bool(np.all(np.min(locs, axis=0) * np.max(locs, axis=0) >= -1e-15))

    jump: dict[tuple, float] = {}
    for loc, w in zip(locs, law.levy.weights):
        if np.max(np.abs(loc)) <= support_radius:
            key = _atom_key(loc, integral)
            jump[key] = jump.get(key, 0.0) + float(w) / lam

    # Poisson orders until the remaining tail is negligible
    k_max, cum, w_k = 0, 0.0, math.exp(-lam)
    weights = []
    while cum < 1.0 - 1e-12 and k_max < 10_000:
        weights.append(w_k)
        cum += w_k
        k_max += 1
        w_k *= lam / k_max
    poisson_tail = max(0.0, 1.0 - cum)

    out: dict[tuple, float] = {}
    conv: dict[tuple, float] = {zero: 1.0}
    for k, w in enumerate(weights):
        for pt, p in conv.items():
            out[pt] = out.get(pt, 0.0) + w * p
        if k == len(weights) - 1:
            break
        nxt: dict[tuple, float] = {}
        for pt, p in conv.items():
            for step, q in jump.items():
                tgt = tuple(a + b for a, b in zip(pt, step))
                if max(abs(x) for x in tgt) <= support_radius + 1e-9:
                    nxt[tgt] = nxt.get(tgt, 0.0) + p * q
        conv = nxt
    total = sum(out.values())
    deficit = max(0.0, 1.0 - total)
    unaccounted = poisson_tail if monotone else poisson_tail + deficit
    return BruteForcePmf(out, deficit, unaccounted)


class CfComparison:
    """Analytic versus empirical characteristic function on a grid."""

    def __init__(
        self,
        grid: np.ndarray,
        analytic: np.ndarray,
        empirical: np.ndarray,
        n_samples: int,
    ):
        grid = np.atleast_2d(np.asarray(grid, dtype=float))
        analytic = np.asarray(analytic, dtype=complex)
        empirical = np.asarray(empirical, dtype=complex)
        if not (len(grid) == len(analytic) == len(empirical)):
            raise ValueError("grid, analytic, and empirical must be parallel")
        self.grid = grid
        self.analytic = analytic
        self.empirical = empirical
        self.n_samples = int(n_samples)
        self.max_abs_dev = float(np.max(np.abs(analytic - empirical))) if len(grid) else 0.0

    def threshold(self, c: float = 4.0) -> float:
        return c / math.sqrt(self.n_samples)

    def passes(self, c: float = 4.0) -> bool:
        return self.max_abs_dev <= self.threshold(c)

    def rows(self) -> list[dict]:
        out = []
        for t, a, e in zip(self.grid, self.analytic, self.empirical):
            out.append(
                {
                    "t": tuple(t),
                    "analytic_re": a.real,
                    "analytic_im": a.imag,
                    "empirical_re": e.real,
                    "empirical_im": e.imag,
                    "abs_dev": abs(a - e),
                }
            )
        return out


def compare_cf(
    analytic: Callable[[np.ndarray], complex],
    samples: np.ndarray,
    grid: np.ndarray,
) -> CfComparison:
    """Evaluate an analytic characteristic function against the empirical
    one computed from ``samples`` on every grid point."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    ana = np.array([analytic(t) for t in grid], dtype=complex)
    phases = np.exp(1j * samples @ grid.T)  # (n_samples, n_grid)
    emp = phases.mean(axis=0)
    return CfComparison(grid, ana, emp, samples.shape[0])


def sampler_vs_oracle(
    law: CompoundPoissonLaw,
    n_draws: int,
    support_radius: float,
    seed: int,
    samples: np.ndarray | None = None,
) -> float:
    """Pearson chi-square p-value of sampler draws against the pmf oracle.

    Bins are the oracle support plus an "other" bin (which also absorbs
    the out-of-box mass); bins with expected count below 5 are pooled into
    "other".  ``samples`` overrides drawing (useful for testing the test).
    """
    oracle = brute_force_cp_pmf(law, support_radius)
    if oracle.unaccounted >= 1e-6:
        raise ValueError(
            f"oracle masses carry unaccounted error {oracle.unaccounted:.2e} at radius "
            f"{support_radius}; increase the radius"
        )
    if law.total_mass == 0.0:
        if samples is None:
            samples = sample_compound_poisson_batch(law, n_draws, np.random.default_rng(seed))
        if np.any(samples != 0.0):
            raise AssertionError("law without jumps produced nonzero draws")
        return 1.0
    if samples is None:
        samples = sample_compound_poisson_batch(law, n_draws, np.random.default_rng(seed))
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[0]
    integral = all(isinstance(x, int) for x in next(iter(oracle.probs)))
    counts: dict[tuple, int] = {}
    for row in samples:
        key = _atom_key(row, integral)
        counts[key] = counts.get(key, 0) + 1

    kept: list[tuple[float, int]] = []  # (expected, observed)
    other_exp = oracle.deficit * n
    other_obs = 0
    seen = set()
    for pt, p in oracle.probs.items():
        exp = p * n
        obs = counts.get(pt, 0)
        seen.add(pt)
        if exp < 5.0:
            other_exp += exp
            other_obs += obs
        else:
            kept.append((exp, obs))
    for pt, obs in counts.items():
        if pt not in seen:
            other_obs += obs
    if other_exp > 0 or other_obs > 0:
        kept.append((max(other_exp, 1e-12), other_obs))
    if len(kept) < 2:
        raise ValueError("chi-square test needs at least two bins")
    stat = sum((obs - exp) ** 2 / exp for exp, obs in kept)
    dof = len(kept) - 1
    return float(chi2.sf(stat, dof))
