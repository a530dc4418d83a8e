"""Homogeneous Green function, good potential and the Hsia kernel.

The Green function of a degree-d lift F is G(Z) = lim d^-n log||F^n(Z)||.
It satisfies G(F(Z)) = d G(Z) and G(lam Z) = G(Z) + log|lam|.  For a good
lift (resultant one) the difference g(z) = G(Z) - log||Z|| descends to the
sphere, and the pair kernel log d(x,y) - g(x) - g(y) integrates to zero
against the equilibrium measure in each variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotGoodLift
from .geometry import ProjPoint, RationalMapLift, lift_array, spherical_dist_matrix

TARGET_TOL = 1e-12


def _per_step_bound(F: RationalMapLift) -> float:
    """sup over the unit sphere of |log ||F|| |.

    Upper part: ||F(W)|| <= sqrt(2) * (d+1) * max|coeff| on ||W|| = 1.
    Lower part: |Res(F)| <= ||F1||_sup^d * ||F2||_sup^d * C(d) style bounds
    give ||F(W)|| >= |Res| / (2 (d+1) max|coeff|)^(2d-1) on the sphere; the
    crude constant only costs a handful of extra iterations.
    """
    d = F.degree
    cmax = max(F.coeff_max(), 1e-300)
    upper = math.log(math.sqrt(2.0) * (d + 1) * cmax)
    res = abs(complex(F.resultant))
    lower = math.log(res) - (2 * d - 1) * math.log(2.0 * (d + 1) * cmax)
    return max(abs(upper), abs(lower), 1.0)


@dataclass(frozen=True)
class GreenEvaluator:
    """Immutable Green-function evaluator with a certified truncation bound."""

    F: RationalMapLift
    iteration_bound: int
    per_step_bound: float
    target_tol: float = TARGET_TOL

    @classmethod
    def make(cls, F: RationalMapLift, target_tol: float = TARGET_TOL) -> "GreenEvaluator":
        M = _per_step_bound(F)
        d = F.degree
        # truncation error after k steps is at most M d^-k / (1 - 1/d)
        k = math.ceil(math.log(M / ((1.0 - 1.0 / d) * target_tol), d)) + 5
        return cls(F=F, iteration_bound=k, per_step_bound=M, target_tol=target_tol)

    @property
    def degree(self) -> int:
        return self.F.degree

    def green_array(self, Z: np.ndarray) -> np.ndarray:
        """G(Z) for an (..., 2) array of nonzero lifts."""
        Z = np.asarray(Z, dtype=complex)
        norms = np.sqrt(np.abs(Z[..., 0]) ** 2 + np.abs(Z[..., 1]) ** 2)
        out = np.log(norms)
        W = Z / np.maximum(norms[..., None], 1e-300)
        d = self.degree
        scale = 1.0
        for _ in range(self.iteration_bound):
            scale /= d
            V = self.F.apply(W)
            nv = np.sqrt(np.abs(V[..., 0]) ** 2 + np.abs(V[..., 1]) ** 2)
            out = out + scale * np.log(nv)
            W = V / nv[..., None]
        return out

    def green(self, Z) -> float:
        """G(Z) for a single lift given as a 2-sequence or ProjPoint."""
        if isinstance(Z, ProjPoint):
            Z = Z.lift
        return float(self.green_array(np.array(Z, dtype=complex)))


def green(ev: GreenEvaluator, Z) -> float:
    return ev.green(Z)


def good_potential(ev: GreenEvaluator, z: ProjPoint) -> float:
    """g(z) = G(Z) - log||Z||; lift-independent, requires a resultant-one lift."""
    if not ev.F.normalized:
        raise NotGoodLift("potential requires a resultant-one lift; normalize first")
    Z = np.array(z.lift, dtype=complex)
    nrm = math.hypot(abs(Z[0]), abs(Z[1]))
    return float(ev.green_array(Z)) - math.log(nrm)


def good_potential_array(ev: GreenEvaluator, points) -> np.ndarray:
    """Vectorized good potential over a list of ProjPoints or (n, 2) lifts."""
    if not ev.F.normalized:
        raise NotGoodLift("potential requires a resultant-one lift; normalize first")
    Z = lift_array(points) if not isinstance(points, np.ndarray) else points
    norms = np.sqrt(np.abs(Z[..., 0]) ** 2 + np.abs(Z[..., 1]) ** 2)
    return ev.green_array(Z) - np.log(norms)


def hsia_kernel(ev: GreenEvaluator, x: ProjPoint, y: ProjPoint) -> float:
    """log d(x,y) - g(x) - g(y); symmetric, -inf exactly on the diagonal."""
    gx = good_potential(ev, x)
    gy = good_potential(ev, y)
    w = abs(x.x1 * y.x2 - x.x2 * y.x1) / (x.norm() * y.norm())
    if w == 0.0:
        return -math.inf
    return math.log(min(w, 1.0)) - gx - gy


def hsia_matrix(ev: GreenEvaluator, points_a, points_b=None) -> np.ndarray:
    """Pairwise kernel values; -inf marks coincident pairs."""
    A = lift_array(points_a) if not isinstance(points_a, np.ndarray) else points_a
    B = A if points_b is None else (
        lift_array(points_b) if not isinstance(points_b, np.ndarray) else points_b)
    ga = good_potential_array(ev, A)
    gb = ga if B is A else good_potential_array(ev, B)
    D = spherical_dist_matrix(A, B)
    with np.errstate(divide="ignore"):
        return np.log(D) - ga[:, None] - gb[None, :]


def hsia_kernel_lifted(ev: GreenEvaluator, x: ProjPoint, y: ProjPoint) -> float:
    """Kernel from an arbitrary (not resultant-one) lift of the same map.

    Adds the lift correction (1 / (d(d-1))) log|Res(F)| so the value agrees
    with the good-lift kernel.
    """
    d = ev.degree
    corr = math.log(abs(complex(ev.F.resultant))) / (d * (d - 1))
    gx = float(ev.green_array(np.array(x.lift))) - math.log(x.norm())
    gy = float(ev.green_array(np.array(y.lift))) - math.log(y.norm())
    w = abs(x.x1 * y.x2 - x.x2 * y.x1) / (x.norm() * y.norm())
    if w == 0.0:
        return -math.inf
    return math.log(min(w, 1.0)) - gx - gy + corr


HOLDER_BLOCK = 512


@dataclass
class HolderEstimator:
    """Streaming max-ratio estimator for the alpha-Hoelder seminorm of g.

    Draws random spherical point pairs plus near-diagonal pairs at dyadic
    distances, in fixed-size blocks seeded by (seed, block index).  A larger
    budget replays the same leading blocks and appends more, so estimates
    are monotone nondecreasing in the sample count for a fixed seed.
    """

    ev: GreenEvaluator
    alpha: float = 1.0
    seed: int = 0
    _best: float = field(default=0.0, repr=False)
    _blocks: int = field(default=0, repr=False)

    def extend(self, samples: int) -> float:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        need = -(-samples // HOLDER_BLOCK)
        for k in range(self._blocks, need):
            rng = np.random.default_rng([self.seed, k])
            B = HOLDER_BLOCK
            # base points uniform on the sphere via complex gaussian lifts
            X = rng.standard_normal((B, 2)) + 1j * rng.standard_normal((B, 2))
            Y = rng.standard_normal((B, 2)) + 1j * rng.standard_normal((B, 2))
            # half the budget goes to near-diagonal pairs at dyadic scales
            half = B // 2
            scales = 2.0 ** (-rng.integers(1, 40, size=half))
            Y[:half] = X[:half] + scales[:, None] * (
                rng.standard_normal((half, 2)) +
                1j * rng.standard_normal((half, 2)))
            gx = good_potential_array(self.ev, X)
            gy = good_potential_array(self.ev, Y)
            D = np.minimum(np.abs(X[:, 0] * Y[:, 1] - X[:, 1] * Y[:, 0]) /
                           (np.linalg.norm(np.abs(X), axis=1) *
                            np.linalg.norm(np.abs(Y), axis=1)), 1.0)
            ok = D > 0
            ratios = np.abs(gx[ok] - gy[ok]) / D[ok] ** self.alpha
            if len(ratios):
                self._best = max(self._best, float(np.max(ratios)))
        self._blocks = max(self._blocks, need)
        return self._best


def holder_seminorm_estimate(ev: GreenEvaluator, alpha: float,
                             samples: int, rng_seed: int = 0) -> float:
    """Monte-Carlo lower bound for sup |g(x)-g(y)| / d(x,y)^alpha."""
    est = HolderEstimator(ev=ev, alpha=alpha, seed=rng_seed)
    return est.extend(samples)
