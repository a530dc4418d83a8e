"""Equilibrium-measure sampling, Monte-Carlo integration and energy bounds.

Sampling runs backward orbits: preimages of w under the map are the
projective roots of the degree-d form  w2 F1 - w1 F2, and picking a uniform
random branch at every step equidistributes toward the maximal-entropy
measure.  Integration and mutual energies are plain Monte-Carlo reductions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptySample, NegativeA, PreimageSolveFailed,
                     UnknownObservable)
from .geometry import ProjPoint, RationalMapLift, hom_eval, lift_array, \
    spherical_dist_matrix
from .potential import GreenEvaluator, good_potential_array
from .roots import aberth_batch, hom_roots

DEFAULT_BURN_IN = 60
PREIMAGE_TOL = 1e-8


def _preimage_coeffs(F: RationalMapLift, W: np.ndarray) -> np.ndarray:
    """Coefficient rows of w2 F1 - w1 F2 for an (n, 2) array of targets."""
    c1 = F.f1.as_complex()
    c2 = F.f2.as_complex()
    return W[:, 1:2] * c1[None, :] - W[:, 0:1] * c2[None, :]


def preimages(F: RationalMapLift, p: ProjPoint) -> list[ProjPoint]:
    """All d preimages (with multiplicity) of a single point."""
    co = _preimage_coeffs(F, np.array([[p.x1, p.x2]]))[0]
    finite, n_inf = hom_roots(co)
    out = [ProjPoint.from_affine(z, p.precision) for z in finite]
    out += [ProjPoint.infinity(p.precision)] * n_inf
    return out


def _distinct_count(points: list[ProjPoint], tol: float = 1e-9) -> int:
    Z = lift_array(points)
    D = spherical_dist_matrix(Z, Z)
    used = np.zeros(len(points), dtype=bool)
    count = 0
    for i in range(len(points)):
        if not used[i]:
            count += 1
            used |= D[i] <= tol
    return count


def is_exceptional(F: RationalMapLift, p: ProjPoint) -> bool:
    """Fewer than d distinct 1-step or d^2 2-step backward points."""
    d = F.degree
    one = preimages(F, p)
    if _distinct_count(one) < d:
        return True
    two = [q for x in one for q in preimages(F, x)]
    return _distinct_count(two) < d * d


@dataclass
class MeasureSampler:
    """Backward-orbit sampler for the equilibrium measure of a good lift."""

    map: RationalMapLift
    burn_in: int = DEFAULT_BURN_IN
    seed: int = 0
    start_point: ProjPoint | None = None
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.burn_in < 1:
            raise ValueError("burn_in must be >= 1")
        self.rng = np.random.default_rng(self.seed)
        if self.start_point is None:
            # deterministic generic start; resample until non-exceptional
            pick = np.random.default_rng(self.seed ^ 0x9E3779B9)
            for _ in range(64):
                z = complex(pick.standard_normal(), pick.standard_normal())
                cand = ProjPoint.from_affine(0.7 + 0.3j + 0.1 * z,
                                             self.map.precision)
                if not is_exceptional(self.map, cand):
                    self.start_point = cand
                    break
            else:
                raise PreimageSolveFailed("could not find a generic start point")
        elif is_exceptional(self.map, self.start_point):
            raise ValueError("start point is exceptional for this map")

    def sample(self, count: int) -> list[ProjPoint]:
        return sample_mu(self, count)


def _backward_step(F: RationalMapLift, W: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """One uniform random preimage per row of an (n, 2) lift array."""
    n = len(W)
    d = F.degree
    co = _preimage_coeffs(F, W)
    scale = np.max(np.abs(co), axis=1)
    lead = np.abs(co[:, -1])
    easy = lead > 1e-8 * scale
    out = np.empty((n, 2), dtype=complex)
    choice = rng.integers(0, d, size=n)
    if np.any(easy):
        roots = aberth_batch(co[easy])
        picked = roots[np.arange(easy.sum()), choice[easy] % roots.shape[1]]
        norm = np.maximum(np.abs(picked), 1.0)
        out[easy, 0] = picked / norm
        out[easy, 1] = 1.0 / norm
        # residual check on the chosen roots, relative to the coefficient scale
        res = np.abs(_batch_eval(co[easy], out[easy])) / scale[easy]
        if np.any(res > PREIMAGE_TOL):
            raise PreimageSolveFailed(
                f"preimage residual {np.max(res):.3g} exceeds {PREIMAGE_TOL}")
    hard = np.where(~easy)[0]
    for i in hard:
        finite, n_inf = hom_roots(co[i])
        lifts = [(z / max(abs(z), 1.0), 1.0 / max(abs(z), 1.0)) for z in finite]
        lifts += [(1.0 + 0j, 0j)] * n_inf
        out[i] = lifts[choice[i] % len(lifts)]
    return out


def _batch_eval(co: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Evaluate each coefficient row on its own max-normalized lift."""
    vals = np.zeros(len(co), dtype=complex)
    m = co.shape[1] - 1
    big1 = np.abs(Z[:, 0]) >= np.abs(Z[:, 1])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = np.where(big1, Z[:, 1] / np.where(Z[:, 0] != 0, Z[:, 0], 1),
                     Z[:, 0] / np.where(Z[:, 1] != 0, Z[:, 1], 1))
    acc = np.zeros(len(co), dtype=complex)
    # factoring X1^m leaves sum c_j r^(m-j): Horner from c_0; the X2^m
    # branch leaves sum c_j s^j: Horner from c_m
    idx = np.where(big1[:, None],
                   np.arange(m + 1)[None, :], np.arange(m + 1)[None, ::-1])
    ordered = np.take_along_axis(co, idx, axis=1)
    for j in range(m + 1):
        acc = acc * r + ordered[:, j]
    lead = np.where(big1, Z[:, 0], Z[:, 1])
    return acc * lead ** m


def sample_mu(s: MeasureSampler, count: int) -> list[ProjPoint]:
    """count independent backward orbits of length burn_in from the start."""
    if count == 0:
        return []
    W = np.tile(np.array([s.start_point.x1, s.start_point.x2]), (count, 1))
    for _ in range(s.burn_in):
        W = _backward_step(s.map, W, s.rng)
    return [ProjPoint.make(w[0], w[1], s.map.precision) for w in W]


def integrate(phi, samples: list[ProjPoint]) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of an observable."""
    if not samples:
        raise EmptySample("integrate() needs at least one sample")
    vals = np.asarray(phi(samples), dtype=float)
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return est, stderr


def mutual_energy_mc(samples_a: list[ProjPoint],
                     samples_b: list[ProjPoint]) -> float:
    """-mean log d(x, y) over the sample product; diagonal excluded if shared."""
    est, _ = mutual_energy_mc_err(samples_a, samples_b)
    return est


def mutual_energy_mc_err(samples_a, samples_b) -> tuple[float, float]:
    if not samples_a or not samples_b:
        raise EmptySample("mutual energy needs nonempty sample lists")
    A = lift_array(samples_a)
    B = lift_array(samples_b)
    D = spherical_dist_matrix(A, B)
    with np.errstate(divide="ignore"):
        L = -np.log(D)
    if samples_a is samples_b:
        np.fill_diagonal(L, np.nan)
    vals = L[np.isfinite(L)]
    if len(vals) == 0:
        raise EmptySample("no off-diagonal pairs at positive distance")
    # pairs sharing an index are correlated; stderr from row means is honest
    row = np.nanmean(np.where(np.isfinite(L), L, np.nan), axis=1)
    row = row[np.isfinite(row)]
    est = float(np.mean(vals))
    stderr = float(np.std(row, ddof=1) / math.sqrt(len(row))) if len(row) > 1 else 0.0
    return est, stderr


@dataclass(frozen=True)
class EnergyBoundInputs:
    """Everything the discrepancy-bound scalar A needs."""

    n: int
    pair_energy_sum: float
    alpha: float
    holder_seminorm: float


def frl_bound_A(inp: EnergyBoundInputs) -> float:
    """A = -sum(Phi)/(n(n-1)) + (2 ||g|| + 2 + max(2, 1/alpha)) log(n)/n."""
    if inp.n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < inp.alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    a = (-inp.pair_energy_sum / (inp.n * (inp.n - 1))
         + (2.0 * inp.holder_seminorm + 2.0 + max(2.0, 1.0 / inp.alpha))
         * math.log(inp.n) / inp.n)
    if a < 0:
        raise NegativeA(f"discrepancy scalar A = {a:.3g} < 0")
    return a


def discrepancy_bound(inp: EnergyBoundInputs, lip: float) -> float:
    """eta(n^-max(2,1/alpha)) + sqrt(A) * ||grad phi||, for Lipschitz phi."""
    a = frl_bound_A(inp)
    eta = lip * inp.n ** (-max(2.0, 1.0 / inp.alpha))
    return eta + math.sqrt(a) * lip


# --------------------------------------------------------------------------
# regularized measures (uniform circles of small spherical radius)

def circle_points(center: ProjPoint, eps: float, thetas: np.ndarray) -> np.ndarray:
    """Lifts on the spherical circle of radius eps around a point.

    The circle of Euclidean chart radius eps/sqrt(1-eps^2) around 0 has
    constant spherical distance eps to 0; a unitary moves it to the center.
    """
    r = eps / math.sqrt(1.0 - eps * eps)
    u = r * np.exp(1j * thetas)
    nrm = center.norm()
    p1, p2 = center.x1 / nrm, center.x2 / nrm
    # unitary with second column the unit center lift sends (0, 1) -> center
    X1 = np.conj(p2) * u + p1
    X2 = -np.conj(p1) * u + p2
    return np.stack([X1, X2], axis=-1)


def sample_regularized(points: list[ProjPoint], eps: float, count: int,
                       rng: np.random.Generator) -> list[ProjPoint]:
    """Draws from the eps-circle average of the uniform atomic measure."""
    if not points:
        raise EmptySample("no atoms to regularize")
    atoms = rng.integers(0, len(points), size=count)
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=count)
    out = []
    for a, t in zip(atoms, thetas):
        Z = circle_points(points[a], eps, np.array([t]))[0]
        out.append(ProjPoint.make(Z[0], Z[1]))
    return out


# --------------------------------------------------------------------------
# observable registry

@dataclass(frozen=True)
class Observable:
    """A CLI-addressable test function with its continuity constants."""

    name: str
    fn: object                 # callable(list[ProjPoint]) -> float array
    lip: float                 # Lipschitz constant wrt spherical distance
    grad_l2: float             # ||grad phi||_{L^2} bound; <= lip for Lipschitz

    def __call__(self, samples):
        return self.fn(samples)


def _re_chordal(samples):
    Z = lift_array(samples)
    n2 = np.abs(Z[:, 0]) ** 2 + np.abs(Z[:, 1]) ** 2
    return np.real(Z[:, 0] * np.conj(Z[:, 1])) / n2


def _im_chordal(samples):
    Z = lift_array(samples)
    n2 = np.abs(Z[:, 0]) ** 2 + np.abs(Z[:, 1]) ** 2
    return np.imag(Z[:, 0] * np.conj(Z[:, 1])) / n2


def _dist_to(p: ProjPoint):
    def fn(samples):
        Z = lift_array(samples)
        P = np.array([[p.x1, p.x2]], dtype=complex)
        return spherical_dist_matrix(Z, P)[:, 0]
    return fn


_DIST_RE = re.compile(r"^dist_to\((.+)\)$")


def get_observable(name: str, ev: GreenEvaluator | None = None,
                   potential_lip: float = 2.0) -> Observable:
    """Look up a registry observable by CLI name.

    "re_chordal" and "im_chordal" are the coordinates of the radius-1/2
    sphere embedding (1-Lipschitz); "dist_to(z)" is the spherical distance
    to a fixed point; "potential" is the good potential itself, with an
    empirical-or-supplied Lipschitz constant.
    """
    if name == "re_chordal":
        return Observable(name, _re_chordal, lip=1.0, grad_l2=1.0)
    if name == "im_chordal":
        return Observable(name, _im_chordal, lip=1.0, grad_l2=1.0)
    m = _DIST_RE.match(name)
    if m:
        arg = m.group(1).strip()
        if arg in ("inf", "oo"):
            p = ProjPoint.infinity()
        else:
            p = ProjPoint.from_affine(complex(arg.replace(" ", "")))
        return Observable(name, _dist_to(p), lip=1.0, grad_l2=1.0)
    if name == "potential":
        if ev is None:
            raise UnknownObservable("'potential' needs a GreenEvaluator")
        return Observable(name, lambda s: good_potential_array(ev, s),
                          lip=potential_lip, grad_l2=potential_lip)
    raise UnknownObservable(f"no observable named {name!r}")
