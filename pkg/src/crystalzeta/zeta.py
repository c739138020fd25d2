"""Evaluation of multidimensional zeta series and Euler products.

Three function families share the complex-vector argument convention
``s = sigma + i*t`` with ``<c, s>`` the bilinear pairing (no conjugation):

* multiple series with weighted linear forms in the denominator
  (Shintani type), evaluated term by term;
* finite Euler products, a product of m geometric factors;
* polynomial Euler products over primes up to a cutoff.

Evaluators return rigorous truncation bounds where the sum or product is
infinite, and 0.0 where evaluation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "ConvergenceError",
    "PoleError",
    "TruncationPolicy",
    "FiniteWeights",
    "PoissonWeights",
    "ShintaniZetaSpec",
    "FiniteEulerSpec",
    "PolynomialEulerSpec",
    "shintani_eval",
    "finite_euler_eval",
    "finite_euler_series",
    "polynomial_euler_eval",
    "p_reduction",
    "primes_up_to",
]


class ConvergenceError(ValueError):
    """Argument lies outside the region where the sum or product converges."""


class PoleError(ArithmeticError):
    """A product factor has a vanishing denominator."""


@dataclass(frozen=True)
class TruncationPolicy:
    """How far to push infinite sums: at most ``max_terms`` per index."""

    max_terms: int = 200


@dataclass(frozen=True)
class FiniteWeights:
    """Weight function supported on finitely many multi-indices."""

    table: tuple[tuple[tuple[int, ...], complex], ...]

    @staticmethod
    def from_dict(d: Mapping[Sequence[int], complex]) -> "FiniteWeights":
        items = tuple(
            (tuple(int(i) for i in key), complex(val)) for key, val in d.items()
        )
        return FiniteWeights(tuple(sorted(items, key=lambda kv: kv[0])))

    def items(self):
        return self.table

    def __post_init__(self):
        for key, _ in self.table:
            if any(i < 0 for i in key):
                raise ValueError("multi-indices must be nonnegative")


@dataclass(frozen=True)
class PoissonWeights:
    """Weights along the geometric index ladder (base**k - 1, 0, ..., 0).

    The k-th rung carries weight rate**k * exp(-k * tilt) / k! where the
    tilt is the pairing of ``sigma`` with the first ladder direction
    ``-log(base) * c_1`` of the owning series spec.  The factorial decay
    makes the resulting series converge for every argument.
    """

    rate: float
    base: int
    sigma: tuple[float, ...]

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.base < 2:
            raise ValueError("base must be an integer >= 2")


WeightFunction = Union[FiniteWeights, PoissonWeights]


@dataclass(frozen=True)
class ShintaniZetaSpec:
    """Multiple series with linear-form denominators.

    The generic term for a multi-index n is

        weight(n) / prod_l ( sum_j M[l, j] * (n_j + shift_j) ) ** <c_l, s>

    with ``form_matrix`` M (m x r, nonnegative, each row somewhere
    positive), positive ``shifts`` (length r), and ``directions`` c_l in
    R^d controlling how each factor couples to the argument s.
    """

    dim: int
    form_matrix: tuple[tuple[float, ...], ...]
    shifts: tuple[float, ...]
    directions: tuple[tuple[float, ...], ...]
    weights: WeightFunction

    def __post_init__(self):
        m, r = self.num_factors, self.num_indices
        if m < 1 or r < 1 or self.dim < 1:
            raise ValueError("dimensions must be positive")
        for row in self.form_matrix:
            if len(row) != r:
                raise ValueError("form_matrix rows must all have length r")
            if any(x < 0 for x in row):
                raise ValueError("form_matrix entries must be nonnegative")
            if not any(x > 0 for x in row):
                raise ValueError("each form_matrix row needs a positive entry")
        if any(u <= 0 for u in self.shifts):
            raise ValueError("shifts must be positive")
        if len(self.directions) != m:
            raise ValueError("need one direction vector per factor")
        for c in self.directions:
            if len(c) != self.dim:
                raise ValueError("direction vectors must have length dim")
        if isinstance(self.weights, FiniteWeights):
            for key, _ in self.weights.items():
                if len(key) != r:
                    raise ValueError("weight multi-indices must have length r")
        elif isinstance(self.weights, PoissonWeights):
            if len(self.weights.sigma) != self.dim:
                raise ValueError("weight sigma must have length dim")

    @property
    def num_factors(self) -> int:
        return len(self.form_matrix)

    @property
    def num_indices(self) -> int:
        return len(self.shifts)


@dataclass(frozen=True)
class FiniteEulerSpec:
    """Finite product of factors (1 - coeff_l * exp(-<a_l, s>))**-1."""

    dim: int
    coeffs: tuple[float, ...]
    directions: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if len(self.coeffs) != len(self.directions):
            raise ValueError("need one direction per coefficient")
        if any(abs(a) > 1 for a in self.coeffs):
            raise ValueError("coefficients must lie in [-1, 1]")
        for a in self.directions:
            if len(a) != self.dim:
                raise ValueError("direction vectors must have length dim")

    @property
    def num_factors(self) -> int:
        return len(self.coeffs)

    def direction_matrix(self) -> np.ndarray:
        return np.array(self.directions, dtype=float).reshape(self.num_factors, self.dim)


@dataclass(frozen=True)
class PolynomialEulerSpec:
    """Product over primes p <= prime_cutoff of (1 - coeff(l, p) * p**-<a_l, s>)**-1."""

    dim: int
    directions: tuple[tuple[float, ...], ...]
    coeff_of_prime: tuple[tuple[tuple[int, int], float], ...]  # ((l, p), coeff)
    prime_cutoff: int = 10_000

    @staticmethod
    def from_dict(
        dim: int,
        directions: Sequence[Sequence[float]],
        coeff_of_prime: Mapping[tuple[int, int], float],
        prime_cutoff: int = 10_000,
    ) -> "PolynomialEulerSpec":
        items = tuple(sorted(((int(l), int(p)), float(a)) for (l, p), a in coeff_of_prime.items()))
        return PolynomialEulerSpec(
            dim, tuple(tuple(float(x) for x in a) for a in directions), items, prime_cutoff
        )

    def __post_init__(self):
        if self.dim < 1 or self.prime_cutoff < 2:
            raise ValueError("dim must be positive and prime_cutoff >= 2")
        for (l, p), a in self.coeff_of_prime:
            if not 0 <= l < len(self.directions):
                raise ValueError(f"coefficient references unknown factor index {l}")
            if abs(a) > 1:
                raise ValueError("coefficients must lie in [-1, 1]")
        for a in self.directions:
            if len(a) != self.dim:
                raise ValueError("direction vectors must have length dim")

    @property
    def num_factors(self) -> int:
        return len(self.directions)

    def coeff(self, l: int, p: int) -> float:
        return dict(self.coeff_of_prime).get((l, p), 0.0)


def _as_s(s, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if arr.shape != (dim,):
        raise ValueError(f"argument must be a complex vector of length {dim}")
    return arr


def _pairings(directions, s: np.ndarray) -> np.ndarray:
    return np.array(directions, dtype=float) @ s


def shintani_eval(
    spec: ShintaniZetaSpec, s, trunc: TruncationPolicy = TruncationPolicy()
) -> tuple[complex, float]:
    """Value of the multiple series at ``s`` and a bound on the dropped tail.

    Finite weight tables are summed exactly (tail 0).  Ladder weights are
    summed up to ``trunc.max_terms`` rungs with a factorial remainder
    bound; when every form-matrix entry is positive the argument must also
    satisfy min_l Re <c_l, s> > r / m, mirroring the region in which the
    fully-coupled series is known to converge.
    """
    sv = _as_s(s, spec.dim)
    cs = _pairings(spec.directions, sv)  # (m,) complex pairings <c_l, s>
    M = np.array(spec.form_matrix, dtype=float)
    u = np.array(spec.shifts, dtype=float)

    if isinstance(spec.weights, FiniteWeights):
        total = 0.0 + 0.0j
        for key, w in spec.weights.items():
            if w == 0:
                continue
            forms = M @ (np.array(key, dtype=float) + u)  # (m,)
            total += w * np.exp(-np.sum(cs * np.log(forms)))
        return complex(total), 0.0

    # geometric ladder weights
    wf: PoissonWeights = spec.weights
    r, m = spec.num_indices, spec.num_factors
    w_re = cs.real
    if np.all(M > 0):
        wmin = float(np.min(w_re))
        if wmin <= r / m:
            bad = int(np.argmin(w_re))
            raise ConvergenceError(
                f"Re<c[{bad}], s> = {w_re[bad]:.6g} is not above the required {r}/{m}"
            )
    c1 = np.array(spec.directions[0], dtype=float)
    ladder_dir = -math.log(wf.base) * c1
    tilt = float(ladder_dir @ np.asarray(wf.sigma, dtype=float))
    log_j = math.log(wf.base)

    # per-rung growth of each linear form is between 1 and base, so the
    # term ratio is bounded by Q / (k+1) with this constant Q
    growth_exponent = float(np.sum(np.maximum(0.0, -w_re)))
    q_const = wf.rate * math.exp(-tilt) * math.exp(log_j * growth_exponent)

    rest = M[:, 1:] @ u[1:] if r > 1 else np.zeros(m)
    lead = M[:, 0]

    def log_forms(k: int) -> np.ndarray:
        # log of M[:,0] * (base**k - 1 + u_1) + sum_{j>=2} M[:,j] * u_j,
        # stable when base**k overflows the float range
        if k * log_j < 600:
            vals = lead * (float(wf.base) ** k - 1.0 + u[0]) + rest
            return np.log(vals)
        out = np.empty(m)
        for l in range(m):
            if lead[l] > 0:
                out[l] = k * log_j + math.log(lead[l])
            else:
                out[l] = math.log(rest[l])
        return out

    total = 0.0 + 0.0j
    last_abs = math.inf
    k_stop = trunc.max_terms
    for k in range(trunc.max_terms + 1):
        log_w = k * math.log(wf.rate) - k * tilt - math.lgamma(k + 1)
        log_term = log_w - np.sum(cs * log_forms(k))
        if log_term.real < -720:
            last_abs = 0.0
            k_stop = k
            break
        term = np.exp(log_term)
        total += term
        last_abs = abs(term)
        k_stop = k
        if last_abs < 1e-18 * max(1.0, abs(total)) and k > wf.rate:
            break
    ratio = q_const / (k_stop + 2)
    if ratio >= 1.0:
        tail = math.inf
    else:
        tail = last_abs * (q_const / (k_stop + 1)) / (1.0 - ratio)
    return complex(total), float(tail)


def finite_euler_eval(spec: FiniteEulerSpec, s) -> complex:
    """Exact value of the finite product at ``s``."""
    sv = _as_s(s, spec.dim)
    if spec.num_factors == 0:
        return 1.0 + 0.0j
    z = np.array(spec.coeffs) * np.exp(-_pairings(spec.directions, sv))
    denom = 1.0 - z
    if np.any(np.abs(denom) < 1e-300):
        bad = int(np.argmin(np.abs(denom)))
        raise PoleError(f"factor {bad} has a vanishing denominator at this argument")
    return complex(np.prod(1.0 / denom))


def finite_euler_series(spec: FiniteEulerSpec, s, cutoff: int) -> tuple[complex, float]:
    """Box-truncated series expansion of the finite product.

    Sums the multi-geometric series over exponents 0..cutoff in each of
    the m factors (the box sum factorizes into per-factor partial sums)
    and reports a rigorous geometric bound on the dropped tail.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    sv = _as_s(s, spec.dim)
    if spec.num_factors == 0:
        return 1.0 + 0.0j, 0.0
    z = np.array(spec.coeffs) * np.exp(-_pairings(spec.directions, sv))
    radii = np.abs(z)
    if np.any(radii >= 1.0):
        bad = int(np.argmax(radii))
        raise ConvergenceError(
            f"factor {bad} has ratio {radii[bad]:.6g} >= 1; series diverges at this argument"
        )
    partial = np.ones(spec.num_factors, dtype=complex)
    for l in range(spec.num_factors):
        partial[l] = np.sum(z[l] ** np.arange(cutoff + 1))
    value = complex(np.prod(partial))
    full = np.prod(1.0 / np.abs(1.0 - radii))
    head = radii ** (cutoff + 1)
    tail = float(full * (np.prod(1.0 + head) - 1.0))
    return value, tail


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n by a plain sieve."""
    if n < 2:
        return np.array([], dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def polynomial_euler_eval(spec: PolynomialEulerSpec, s) -> tuple[complex, float]:
    """Truncated product over primes and a bound covering the missing primes."""
    sv = _as_s(s, spec.dim)
    if spec.num_factors == 0:
        return 1.0 + 0.0j, 0.0
    pair = _pairings(spec.directions, sv)  # (m,)
    w = pair.real
    wmin = float(np.min(w))
    if wmin <= 1.0:
        bad = int(np.argmin(w))
        raise ConvergenceError(
            f"Re<a[{bad}], s> = {w[bad]:.6g} must exceed 1 for the prime product to converge"
        )
    primes = primes_up_to(spec.prime_cutoff)
    coeffs = dict(spec.coeff_of_prime)
    value = 1.0 + 0.0j
    for l in range(spec.num_factors):
        alpha = np.array([coeffs.get((l, int(p)), 0.0) for p in primes])
        nz = alpha != 0.0
        if not np.any(nz):
            continue
        zs = alpha[nz] * np.exp(-pair[l] * np.log(primes[nz].astype(float)))
        denom = 1.0 - zs
        if np.any(np.abs(denom) < 1e-300):
            raise PoleError(f"factor {l} has a vanishing denominator at this argument")
        value *= complex(np.prod(1.0 / denom))
    if spec.num_factors == 0:
        return value, 0.0
    P = float(spec.prime_cutoff)
    guard = 1.0 / (1.0 - P**-wmin)
    log_tail = spec.num_factors * (1.0 + P**-wmin * guard / 2.0) * P ** (1.0 - wmin) / (wmin - 1.0)
    tail = float(abs(value) * math.expm1(log_tail)) if log_tail < 700 else math.inf
    return complex(value), tail


def p_reduction(spec: FiniteEulerSpec, primes: Sequence[int]) -> PolynomialEulerSpec:
    """Embed a finite product into the prime-product family.

    Factor l is attached to the l-th prime with direction rescaled by
    1/log(p_l), so that evaluation agrees exactly with the finite product
    (all other primes carry coefficient zero).
    """
    ps = [int(p) for p in primes]
    if len(ps) != spec.num_factors:
        raise ValueError("need exactly one prime per factor")
    if len(set(ps)) != len(ps):
        raise ValueError("primes must be distinct")
    sieve = set(int(q) for q in primes_up_to(max(ps) if ps else 2))
    for p in ps:
        if p not in sieve:
            raise ValueError(f"{p} is not prime")
    directions = tuple(
        tuple(x / math.log(p) for x in a) for a, p in zip(spec.directions, ps)
    )
    coeff = {(l, ps[l]): spec.coeffs[l] for l in range(spec.num_factors)}
    cutoff = max(ps) if ps else 2
    return PolynomialEulerSpec.from_dict(spec.dim, directions, coeff, prime_cutoff=cutoff)
