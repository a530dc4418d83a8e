"""Dynatomic polynomials, periodic points and the configuration discriminant."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionWarning, IncompleteRoots, RootFindingDiverged
from .geometry import (HomPoly, ProjPoint, RationalMapLift, hom_eval, polydiv_exact,
                       polydiv_float, spherical_dist, spherical_dist_matrix,
                       lift_array, tol_for, wedge)
from .roots import hom_roots


def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    result = 1
    p, m = 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def dynatomic_degree(d: int, n: int) -> int:
    """d_n = sum over k | n of mu(n/k) (d^k + 1)."""
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    return sum(moebius(n // k) * (d ** k + 1) for k in divisors(n))


def wedge_form(F: RationalMapLift, ell: int) -> HomPoly:
    """The degree d^ell + 1 form  F^ell wedge (X, Y) = F1 Y - F2 X."""
    A, B = F.iterate(ell)
    exact = A.exact and B.exact
    a = list(A.coeffs) if exact else list(A.as_complex())
    b = list(B.coeffs) if exact else list(B.as_complex())
    out = [0] * (len(a) + 1)
    for j, x in enumerate(a):       # F1 * Y keeps the X power
        out[j] = out[j] + x
    for j, x in enumerate(b):       # F2 * X shifts the X power up
        out[j + 1] = out[j + 1] - x
    return HomPoly.make(out, exact=exact)


@dataclass(frozen=True)
class DynatomicPoly:
    base_map: RationalMapLift
    n: int
    poly: HomPoly

    @property
    def exact(self) -> bool:
        return self.poly.exact

    @property
    def degree(self) -> int:
        return self.poly.degree


def dynatomic_poly(F: RationalMapLift, n: int) -> DynatomicPoly:
    """Moebius product of iterate-wedge forms; exact division when possible."""
    num = None
    den = None
    for ell in divisors(n):
        mu = moebius(n // ell)
        if mu == 0:
            continue
        w = wedge_form(F, ell)
        if mu > 0:
            num = w if num is None else num.mul(w)
        else:
            den = w if den is None else den.mul(w)
    assert num is not None
    expected = dynatomic_degree(F.degree, n)
    if den is None:
        psi = num
    else:
        if num.exact and den.exact:
            q = polydiv_exact(list(num.coeffs), list(den.coeffs))
        else:
            dc = den.as_complex()
            top = len(dc) - 1
            scale = float(np.max(np.abs(dc)))
            while top > 0 and abs(dc[top]) <= 1e-14 * scale:
                top -= 1
            q = list(polydiv_float(num.as_complex(), dc[: top + 1], tol_for(F.precision)))
        # dividing by a trimmed denominator (dropped Y factors) pads the
        # quotient with high-order zeros; restore the homogeneous degree
        if len(q) > expected + 1:
            qmax = max(abs(complex(x)) for x in q)
            if any(abs(complex(x)) > 1e-9 * qmax for x in q[expected + 1:]):
                raise IncompleteRoots("quotient exceeds the dynatomic degree")
            q = q[: expected + 1]
        psi = HomPoly.make(q, exact=num.exact and den.exact)
    if psi.degree != expected:
        raise IncompleteRoots(
            f"dynatomic degree {psi.degree} != expected d_n = {expected}")
    return DynatomicPoly(base_map=F, n=n, poly=psi)


@dataclass
class Configuration:
    """A finite multiset of projective points with provenance metadata."""

    points: list
    multiplicities: list
    provenance: str
    residuals: list
    low_period_flags: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(sum(self.multiplicities))

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "points": [[p.x1.real, p.x1.imag, p.x2.real, p.x2.imag]
                       for p in self.points],
            "multiplicities": [int(m) for m in self.multiplicities],
            "residuals": [float(r) for r in self.residuals],
            "low_period_flags": [bool(b) for b in self.low_period_flags],
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Configuration":
        pts = [ProjPoint.make(complex(a, b), complex(c, d))
               for a, b, c, d in doc["points"]]
        return cls(points=pts,
                   multiplicities=list(doc["multiplicities"]),
                   provenance=doc.get("provenance", ""),
                   residuals=list(doc.get("residuals", [0.0] * len(pts))),
                   low_period_flags=list(doc.get("low_period_flags", [False] * len(pts))),
                   flags=list(doc.get("flags", [])))

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)


def _cluster(points: list, radius: float) -> list[list[int]]:
    """Single-linkage clusters of ProjPoints at the given spherical radius."""
    n = len(points)
    if n == 0:
        return []
    D = spherical_dist_matrix(lift_array(points), lift_array(points))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.argwhere(np.triu(D <= radius, k=1))
    for i, j in close:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _polish_periodic(F: RationalMapLift, n: int, z: np.ndarray,
                     rounds: int = 40) -> np.ndarray:
    """Ehrlich-Aberth refinement of finite dynatomic roots against the map.

    Evaluates p'(z)/p(z) for p(z) = prod over ell | n of
    (f^ell(z) - z)^mu(n/ell) by iterating f, which sidesteps the
    huge-coefficient noise floor of the expanded polynomial.  The pairwise
    repulsion term keeps tightly clustered approximations from collapsing
    onto a shared root.  Escaping points are left alone.
    """
    a = np.asarray(F.f1.as_complex())
    b = np.asarray(F.f2.as_complex())
    da, db = np.polyder(a[::-1]), np.polyder(b[::-1])
    mu_of = {ell: moebius(n // ell) for ell in divisors(n)
             if moebius(n // ell) != 0}
    z = np.array(z, dtype=complex)
    if len(z) == 0:
        return z
    for _ in range(rounds):
        u = z.copy()
        D = np.ones_like(z)
        S = np.zeros_like(z)
        alive = np.abs(z) < 1e6
        for ell in range(1, n + 1):
            with np.errstate(all="ignore"):
                p1, p2 = np.polyval(a[::-1], u), np.polyval(b[::-1], u)
                dp1, dp2 = np.polyval(da, u), np.polyval(db, u)
                D = D * (dp1 * p2 - p1 * dp2) / p2 ** 2
                u = p1 / p2
            alive &= np.isfinite(u) & (np.abs(u) < 1e8)
            mu = mu_of.get(ell)
            if mu:
                with np.errstate(all="ignore"):
                    S = S + mu * (D - 1.0) / (u - z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(all="ignore"):
            rep = np.sum(1.0 / diff, axis=1)
            step = 1.0 / (S - rep)        # Aberth correction with w = p/p' = 1/S
        good = alive & np.isfinite(step) & (np.abs(step) < 0.1 * (1.0 + np.abs(z)))
        step = np.where(good, step, 0.0)
        z = z - step
        if np.max(np.abs(step) / (1.0 + np.abs(z))) <= 1e-14:
            break
    return z


def dynatomic_residuals(F: RationalMapLift, n: int, points: list) -> np.ndarray:
    """|Psi_n(Z)| / ||Z||^d_n per point, via renormalized map iteration.

    Each iterate-wedge factor is evaluated with bounded arithmetic (scale
    factors tracked in log space), so the result resolves residuals far below
    the expanded polynomial's coefficient-evaluation noise floor.  Entries
    where a negatively-weighted low-period factor vanishes come out as NaN;
    callers should fall back to direct coefficient evaluation there.
    """
    Z = lift_array(points)
    N = len(points)
    d = F.degree
    mu_of = {ell: moebius(n // ell) for ell in divisors(n)
             if moebius(n // ell) != 0}
    U = Z.copy()
    L = np.zeros(N)
    total = np.zeros(N)
    bad = np.zeros(N, dtype=bool)
    for ell in range(1, n + 1):
        V = F.apply(U)
        s = np.max(np.abs(V), axis=1)
        L = d * L + np.log(s)
        U = V / s[:, None]
        mu = mu_of.get(ell)
        if mu:
            wabs = np.abs(U[:, 0] * Z[:, 1] - U[:, 1] * Z[:, 0])
            with np.errstate(divide="ignore"):
                lw = L + np.log(wabs)
            if mu < 0:
                bad |= wabs <= 1e-12
            total = total + mu * lw
    norms = np.linalg.norm(Z, axis=1)
    dn = dynatomic_degree(d, n)
    with np.errstate(all="ignore"):
        out = np.exp(total - dn * np.log(norms))
    out = np.where(np.isnan(total) | bad, np.nan, out)
    out[np.isneginf(total)] = 0.0
    return out


def _newton_period_n(F: RationalMapLift, n: int, z: np.ndarray,
                     iters: int = 60) -> np.ndarray:
    """Affine Newton iteration for f^n(z) - z = 0 from a batch of seeds.

    The derivative of f^n is accumulated by the chain rule along the orbit,
    so the conditioning is that of the map itself rather than of the
    expanded degree-(d^n + 1) polynomial.  Escaping or non-converging seeds
    are simply returned as they stand; callers filter by defect.
    """
    a = np.asarray(F.f1.as_complex())
    b = np.asarray(F.f2.as_complex())
    da, db = np.polyder(a[::-1]), np.polyder(b[::-1])
    z = np.array(z, dtype=complex)
    for _ in range(iters):
        u = z.copy()
        D = np.ones_like(z)
        with np.errstate(all="ignore"):
            for _ in range(n):
                p1, p2 = np.polyval(a[::-1], u), np.polyval(b[::-1], u)
                D = D * (np.polyval(da, u) * p2 - p1 * np.polyval(db, u)) / p2 ** 2
                u = p1 / p2
            step = (u - z) / (D - 1.0)
        ok = np.isfinite(step) & (np.abs(z) < 1e8)
        step = np.where(ok, step, 0.0)
        # clip wild steps so seeds cannot tunnel across the sphere
        big = np.abs(step) > 0.5 * (1.0 + np.abs(z))
        step = np.where(big, step * (0.5 * (1.0 + np.abs(z))
                                     / np.maximum(np.abs(step), 1e-300)), step)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(z))):
            break
    return z


def periodicity_defect(F: RationalMapLift, n: int, z: np.ndarray) -> np.ndarray:
    """Chordal distance d(f^n(z), z) per finite affine point.

    Every dynatomic root is a root of the period-n wedge form, so a polished
    approximation is acceptable exactly when this defect is at rounding
    level.  The expanded-polynomial residual cannot play that role at high
    degree: |Psi(z)| / ||Z||^deg is a product of hundreds of pairwise
    distances and is astronomically small for any point near the Julia set.
    """
    z = np.asarray(z, dtype=complex)
    nrm = np.maximum(np.abs(z), 1.0)
    Z = np.stack([z / nrm, 1.0 / nrm], axis=-1)
    W = Z.copy()
    for _ in range(n):
        W = F.apply(W)
        s = np.max(np.abs(W), axis=-1)
        ok = s > 0
        W = W / np.where(ok, s, 1.0)[..., None]
    wedge_abs = np.abs(W[..., 0] * Z[..., 1] - W[..., 1] * Z[..., 0])
    return wedge_abs / (np.linalg.norm(W, axis=-1) * np.linalg.norm(Z, axis=-1))


def _is_polynomial(F: RationalMapLift) -> bool:
    """True when the denominator form is a constant multiple of Y^d."""
    c2 = np.asarray(F.f2.as_complex())
    return c2[0] != 0 and np.all(c2[1:] == 0)


def _homotopy_fixed_points(F: RationalMapLift, n: int,
                           w0: complex) -> np.ndarray | None:
    """All d^n affine fixed points of f^n for a polynomial map.

    Tracks the d^n solution paths of f^n(z) = (1 - t) w0 + t z from t = 0
    (the backward tree of w0, solved stably one preimage level at a time)
    to t = 1.  Unlike root finding in the monomial basis this never touches
    the d^n-degree expanded coefficients, so it stays well conditioned at
    periods where those coefficients dwarf machine range.  Returns None when
    paths collide for this w0; callers retry with a different anchor.
    """
    from .roots import aberth_batch
    d = F.degree
    c1 = np.asarray(F.f1.as_complex())
    a0 = complex(F.f2.as_complex()[0])
    # backward tree: preimages of w solve  sum c1[j] z^j = a0 w
    pts = np.array([w0], dtype=complex)
    for _ in range(n):
        rows = np.tile(c1, (len(pts), 1))
        rows[:, 0] = c1[0] - a0 * pts
        pts = aberth_batch(rows).ravel()
    z = pts
    p_desc = c1[::-1]
    dp_desc = np.polyder(p_desc)
    for t in np.linspace(0.0, 1.0, 81)[1:]:
        target = (1.0 - t) * w0
        for _ in range(8):
            u = z.copy()
            D = np.ones_like(z)
            with np.errstate(all="ignore"):
                for _ in range(n):
                    D = D * np.polyval(dp_desc, u) / a0
                    u = np.polyval(p_desc, u) / a0
                step = (u - target - t * z) / (D - t)
            step = np.where(np.isfinite(step), step, 0.0)
            big = np.abs(step) > 0.25 * (1.0 + np.abs(z))
            step = np.where(big, step * (0.25 * (1.0 + np.abs(z))
                                         / np.maximum(np.abs(step), 1e-300)),
                            step)
            z = z - step
            if np.all(np.abs(step) <= 1e-14 * (1.0 + np.abs(z))):
                break
    if periodicity_defect(F, n, z).max() > 1e-8:
        return None
    return z


def _duplicate_mask(z: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Marks every entry after the first of each near-coincident group."""
    order = np.argsort(z.real, kind="stable")
    s = z[order]
    dup_sorted = np.zeros(len(z), dtype=bool)
    for w in range(1, min(6, len(z))):
        dup_sorted[w:] |= np.abs(s[w:] - s[:-w]) <= tol
    dup = np.zeros(len(z), dtype=bool)
    dup[order] = dup_sorted
    return dup


def _primitive_period_filter(F: RationalMapLift, n: int,
                             z: np.ndarray) -> np.ndarray:
    keep = np.ones(len(z), dtype=bool)
    for m in divisors(n)[:-1]:
        keep &= periodicity_defect(F, m, z) > 1e-6
    return z[keep]


def _regenerate_roots(F: RationalMapLift, n: int, finite: np.ndarray,
                      bad: np.ndarray, defect_tol: float) -> np.ndarray:
    """Replace a partially-converged finite root set with a complete one.

    Polynomial maps get the homotopy path tracker, which finds every fixed
    point of f^n; the expected count of primitive roots is the number of
    finite approximations being replaced.  Other maps fall back to targeted
    Newton re-seeding of only the failed slots.
    """
    best = None
    if _is_polynomial(F) and F.degree ** n <= (1 << 16):
        anchors = (complex(0.4372, 0.2913), complex(-0.3913, 0.7544),
                   complex(1.2041, -0.5317))
        for w0 in anchors:
            fixed = _homotopy_fixed_points(F, n, w0)
            if fixed is None:
                continue
            prim = _primitive_period_filter(F, n, fixed)
            if len(prim) != len(finite):
                continue
            dup = _duplicate_mask(prim)
            if not np.any(dup):
                return prim
            # a merged path pair leaves one root duplicated and one missing;
            # keep the clean majority and recover the difference below
            if best is None or dup.sum() < best[1].sum():
                best = (prim, dup)
    if best is not None:
        prim, dup = best
        return _repair_missing_roots(F, n, prim[~dup], int(dup.sum()),
                                     defect_tol)
    return _repair_missing_roots(F, n, finite[~bad], int(bad.sum()),
                                 defect_tol)


def _repair_missing_roots(F: RationalMapLift, n: int, good: np.ndarray,
                          missing: int, defect_tol: float) -> np.ndarray:
    """Recover dynatomic roots lost to the coefficient-basis solver.

    Seeds Newton runs for f^n(z) = z near already-converged roots (the
    Julia set is the closure of the repelling cycles, so uncovered roots lie
    in the same region), then keeps hits that are genuinely new, genuinely
    period n, and converged.  Raises when the budget runs out short.
    """
    rng = np.random.default_rng(0xFEC)
    accepted = list(good)
    proper = divisors(n)[:-1]
    anchors = good if len(good) else np.zeros(1, dtype=complex)
    need = missing
    for attempt in range(60):
        if need == 0:
            break
        batch = max(8 * need, 32)
        scale = (0.02, 0.1, 0.4)[attempt % 3]
        picks = anchors[rng.integers(0, len(anchors), size=batch)]
        seeds = picks + scale * (rng.standard_normal(batch) +
                                 1j * rng.standard_normal(batch))
        roots = _newton_period_n(F, n, seeds)
        ok = periodicity_defect(F, n, roots) <= defect_tol
        for m in proper:
            # discard points whose actual period divides a proper divisor
            ok &= periodicity_defect(F, m, roots) > 1e-6
        for z in roots[ok]:
            if need == 0:
                break
            if accepted and np.min(np.abs(np.asarray(accepted) - z)) <= 1e-9:
                continue
            accepted.append(z)
            need -= 1
    if need:
        raise RootFindingDiverged(
            f"could not recover {need} of the period-{n} roots within the "
            f"Newton re-seeding budget")
    return np.asarray(accepted, dtype=complex)


def _orbit_point(F: RationalMapLift, p: ProjPoint, k: int) -> ProjPoint:
    Z = np.array([p.x1, p.x2], dtype=complex)
    for _ in range(k):
        Z = F.apply(Z[None, :])[0]
        Z = Z / np.max(np.abs(Z))
    return ProjPoint.make(Z[0], Z[1], p.precision)


def periodic_points(F: RationalMapLift, n: int, tol: float = 1e-9) -> Configuration:
    """All d_n projective roots of the n-th dynatomic polynomial of F."""
    psi = dynatomic_poly(F, n)
    coeffs = psi.poly.as_complex()
    finite, n_inf = hom_roots(coeffs, tol=min(tol, 1e-13), strict=False,
                              trim_tol=0.0 if psi.poly.exact else 1e-14)
    finite = _polish_periodic(F, n, finite)
    # re-seed any stragglers (escaped or unconverged approximations) near
    # converged roots; the pairwise repulsion in the polish then pushes the
    # newcomer onto whichever root is left uncovered
    defect_tol = 1e-8
    if len(finite):
        bad = periodicity_defect(F, n, finite) > defect_tol
        if np.any(bad):
            finite = _regenerate_roots(F, n, finite, bad, defect_tol)

    raw: list[ProjPoint] = [ProjPoint.from_affine(z, F.precision) for z in finite]
    raw += [ProjPoint.infinity(F.precision)] * n_inf

    radius = math.sqrt(tol)
    clusters = _cluster(raw, radius)
    points, mults = [], []
    for idx in clusters:
        members = [raw[i] for i in idx]
        if all(m.x2 == 0 for m in members):
            points.append(ProjPoint.infinity(F.precision))
        else:
            zs = [m.affine() for m in members if m.x2 != 0]
            points.append(ProjPoint.from_affine(sum(zs) / len(zs), F.precision))
        mults.append(len(idx))
    flags = []
    if any(m > 1 for m in mults):
        warnings.warn("clustered dynatomic roots: discriminant is near zero",
                      ConditionWarning, stacklevel=2)
        flags.append("parabolic_cluster")

    res = dynatomic_residuals(F, n, points)
    fallback = np.isnan(res)
    if np.any(fallback):
        norms = np.array([math.hypot(abs(p.x1), abs(p.x2)) for p in points])
        vals = np.abs(hom_eval(coeffs, np.array([p.x1 for p in points]),
                               np.array([p.x2 for p in points])))
        res = np.where(fallback, vals / norms ** psi.degree, res)
    residuals = res.tolist()

    low = []
    tol_orbit = math.sqrt(tol)
    for p in points:
        is_low = False
        for k in divisors(n)[:-1]:
            if spherical_dist(_orbit_point(F, p, k), p) <= tol_orbit:
                is_low = True
                break
        low.append(is_low)

    cfg = Configuration(points=points, multiplicities=mults,
                        provenance=f"Per_{n}(f)", residuals=residuals,
                        low_period_flags=low, flags=flags)
    if cfg.size != psi.degree:
        raise IncompleteRoots("root multiplicities do not sum to the degree")
    return cfg


def _renorm_product(factors) -> complex:
    """Product of many complex scalars with exponent renormalization."""
    mant = 1.0 + 0j
    expo = 0
    for f in factors:
        mant *= f
        a = abs(mant)
        if a == 0:
            return 0j
        if a > 1e100 or a < 1e-100:
            e = int(math.floor(math.log2(a)))
            mant /= 2.0 ** e
            expo += e
    return mant * 2.0 ** expo


def disc(psi, roots: Configuration) -> complex:
    """Ordered product over i != j of root-lift wedges.

    Lifts are (a, 1) for finite roots and (1, 0) at infinity; the scalar
    mismatch with the polynomial's leading structure is absorbed into the
    first lift, which leaves the product unchanged.
    """
    poly = psi.poly if isinstance(psi, DynatomicPoly) else psi
    m = poly.degree
    if roots.size != m:
        raise IncompleteRoots(
            f"multiplicity sum {roots.size} != polynomial degree {m}")
    if any(mu > 1 for mu in roots.multiplicities):
        return 0j
    lifts = [(p.x1 / p.x2, 1.0 + 0j) if p.x2 != 0 else (1.0 + 0j, 0j)
             for p in roots.points]
    # sigma: ratio of psi to the product of the linear forms (X,Y) wedge Z_j
    prod = np.array([1.0 + 0j])
    for (z1, z2) in lifts:
        prod = np.convolve(prod, np.array([-z1, z2]))   # ascending X powers
    pc = poly.as_complex()
    kref = int(np.argmax(np.abs(pc)))
    sigma = pc[kref] / prod[kref]
    wedges = []
    for i in range(m):
        for j in range(i + 1, m):
            w = wedge(lifts[i], lifts[j])
            wedges.append(-w * w)
    return _renorm_product([sigma ** (2 * (m - 1))] + wedges)
