"""Projective points, homogeneous binary forms, resultants and lifts.

Conventions: a homogeneous form of degree m is stored by its coefficient
vector indexed by the power of X, so ``coeffs[j]`` multiplies X^j Y^(m-j).
Exact forms carry ``int``/``Fraction`` entries, float forms numpy complex.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateLift, DegreeCapExceeded, InexactDivision, MapSpecError

DEGREE_CAP = 4096


def tol_for(precision: int) -> float:
    """All tolerances scale as 2^(10 - precision)."""
    return 2.0 ** (10 - precision)


# --------------------------------------------------------------------------
# polynomial coefficient arithmetic (shared by exact and float variants)

def polymul(a, b, exact: bool):
    if exact:
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    return np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def polydiv_exact(num, den):
    """Exact quotient of coefficient lists (low-to-high); raises on a remainder."""
    num = [Fraction(x) for x in num]
    den = [Fraction(x) for x in den]
    while den and den[-1] == 0:
        den.pop()
    if not den:
        raise ZeroDivisionError("division by the zero form")
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] / den[-1]
        q[i] = c
        if c:
            for j, y in enumerate(den):
                num[i + j] -= c * y
    if any(x != 0 for x in num):
        raise InexactDivision("dynatomic factor does not divide exactly")
    return q


def polydiv_float(num, den, tol: float):
    num = np.array(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    scale = np.max(np.abs(num)) or 1.0
    q = np.zeros(len(num) - len(den) + 1, dtype=complex)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] / den[-1]
        q[i] = c
        num[i:i + len(den)] -= c * den
    if np.max(np.abs(num)) > tol * scale * len(num):
        raise InexactDivision(
            f"division residual {np.max(np.abs(num)) / scale:.3g} exceeds tolerance")
    return q


# --------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class HomPoly:
    """A homogeneous binary form; ``exact`` tags rational coefficients."""

    degree: int
    coeffs: tuple
    exact: bool

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("coefficient count must be degree + 1")

    @classmethod
    def make(cls, coeffs, exact=None):
        coeffs = list(coeffs)
        if exact is None:
            exact = all(isinstance(c, (int, Fraction)) for c in coeffs)
        if exact:
            coeffs = tuple(Fraction(c) for c in coeffs)
        else:
            coeffs = tuple(complex(c) for c in coeffs)
        return cls(degree=len(coeffs) - 1, coeffs=coeffs, exact=exact)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=complex)

    def __call__(self, x1, x2):
        """Evaluate at lifts; accepts scalars or numpy arrays."""
        return hom_eval(self.as_complex(), x1, x2)

    def mul(self, other: "HomPoly") -> "HomPoly":
        exact = self.exact and other.exact
        a = self.coeffs if exact else self.as_complex()
        b = other.coeffs if exact else other.as_complex()
        return HomPoly.make(polymul(list(a), list(b), exact), exact=exact)

    def compose_pair(self, A: "HomPoly", B: "HomPoly") -> "HomPoly":
        """Substitute (X, Y) -> (A, B); A and B share a common degree."""
        exact = self.exact and A.exact and B.exact
        a = list(A.coeffs) if exact else list(A.as_complex())
        b = list(B.coeffs) if exact else list(B.as_complex())
        cs = list(self.coeffs) if exact else list(self.as_complex())
        m = self.degree
        one = [Fraction(1)] if exact else [1.0 + 0j]
        pa, pb = [one], [one]
        for _ in range(m):
            pa.append(list(polymul(pa[-1], a, exact)))
            pb.append(list(polymul(pb[-1], b, exact)))
        deg_out = m * A.degree
        out = [Fraction(0)] * (deg_out + 1) if exact else np.zeros(deg_out + 1, dtype=complex)
        for j, c in enumerate(cs):
            if c == 0:
                continue
            term = polymul(pa[j], pb[m - j], exact)
            for i, t in enumerate(term):
                out[i] += c * t
        return HomPoly.make(list(out), exact=exact)


def hom_eval(coeffs, x1, x2):
    """Evaluate sum_j c_j x1^j x2^(m-j), factoring out the larger coordinate.

    Factoring keeps intermediate magnitudes near |max coord|^m, which matters
    for the high-degree dynatomic forms evaluated on max-normalized lifts.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    m = len(coeffs) - 1
    shape = np.broadcast(x1, x2).shape
    x1, x2 = np.broadcast_to(x1, shape), np.broadcast_to(x2, shape)
    big1 = np.abs(x1) >= np.abs(x2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r12 = np.where(big1 & (x1 != 0), x2 / np.where(x1 != 0, x1, 1), 0)
        r21 = np.where(~big1, x1 / np.where(x2 != 0, x2, 1), 0)
    acc1 = np.zeros(shape, dtype=complex)      # sum c_j r^(m-j), r = x2/x1
    for c in coeffs:
        acc1 = acc1 * r12 + c
    acc2 = np.zeros(shape, dtype=complex)      # sum c_j s^j, s = x1/x2
    for c in coeffs[::-1]:
        acc2 = acc2 * r21 + c
    return np.where(big1, acc1 * x1 ** m, acc2 * x2 ** m)


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^1(C) carried as a max-normalized nonzero lift."""

    x1: complex
    x2: complex
    precision: int = 53

    @classmethod
    def make(cls, x1, x2, precision: int = 53) -> "ProjPoint":
        x1, x2 = complex(x1), complex(x2)
        m = max(abs(x1), abs(x2))
        if m == 0 or not math.isfinite(m):
            raise ValueError("lift must be nonzero and finite")
        return cls(x1 / m, x2 / m, precision)

    @classmethod
    def from_affine(cls, z, precision: int = 53) -> "ProjPoint":
        return cls.make(z, 1.0, precision)

    @classmethod
    def infinity(cls, precision: int = 53) -> "ProjPoint":
        return cls(1.0 + 0j, 0j, precision)

    @property
    def lift(self):
        return (self.x1, self.x2)

    def norm(self) -> float:
        return math.hypot(abs(self.x1), abs(self.x2))

    def is_infinity(self, tol: float | None = None) -> bool:
        tol = tol_for(self.precision) if tol is None else tol
        return abs(self.x2) <= tol * abs(self.x1)

    def affine(self) -> complex:
        if self.x2 == 0:
            raise ZeroDivisionError("point at infinity has no affine chart value")
        return self.x1 / self.x2

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return spherical_dist(self, other) <= tol_for(min(self.precision, other.precision))

    def __hash__(self):
        raise TypeError("ProjPoint equality is projective; not hashable")


def wedge(X, Y) -> complex:
    """X1*Y2 - X2*Y1 on lift pairs (ProjPoint or 2-tuples)."""
    x1, x2 = X.lift if isinstance(X, ProjPoint) else X
    y1, y2 = Y.lift if isinstance(Y, ProjPoint) else Y
    return x1 * y2 - x2 * y1


def spherical_dist(x: ProjPoint, y: ProjPoint) -> float:
    """|X wedge Y| / (||X|| ||Y||), the chordal metric with values in [0, 1]."""
    d = abs(wedge(x, y)) / (x.norm() * y.norm())
    return min(d, 1.0)


def lift_array(points) -> np.ndarray:
    """Stack ProjPoints into an (n, 2) complex array of lifts."""
    return np.array([[p.x1, p.x2] for p in points], dtype=complex)


def spherical_dist_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise chordal distances between two (n, 2) lift arrays."""
    w = A[:, None, 0] * B[None, :, 1] - A[:, None, 1] * B[None, :, 0]
    na = np.sqrt(np.abs(A[:, 0]) ** 2 + np.abs(A[:, 1]) ** 2)
    nb = np.sqrt(np.abs(B[:, 0]) ** 2 + np.abs(B[:, 1]) ** 2)
    return np.minimum(np.abs(w) / (na[:, None] * nb[None, :]), 1.0)


# --------------------------------------------------------------------------
# resultants and lifts

def sylvester_rows(f1_desc, f2_desc, d: int):
    """Rows of the 2d-square resultant matrix from descending coefficients."""
    rows = []
    for i in range(d):
        rows.append([0] * i + list(f1_desc) + [0] * (d - 1 - i))
    for i in range(d):
        rows.append([0] * i + list(f2_desc) + [0] * (d - 1 - i))
    return rows


def det_bareiss(rows) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    # clear denominators row by row; track the overall scale
    m = []
    scale = Fraction(1)
    for row in rows:
        row = [Fraction(x) for x in row]
        lcm = 1
        for x in row:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        scale *= lcm
        m.append([int(x * lcm) for x in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return Fraction(sign * m[n - 1][n - 1], 1) / scale


@dataclass(frozen=True)
class RationalMapLift:
    """A pair of degree-d homogeneous forms with nonzero resultant."""

    f1: HomPoly
    f2: HomPoly
    resultant: complex
    precision: int = 53

    @classmethod
    def make(cls, f1: HomPoly, f2: HomPoly, precision: int = 53) -> "RationalMapLift":
        if f1.degree != f2.degree or f1.degree < 2:
            raise ValueError("forms must share a common degree d >= 2")
        res = resultant_of_forms(f1, f2, precision)
        return cls(f1, f2, res, precision)

    @classmethod
    def from_affine_quadratic(cls, c, precision: int = 53) -> "RationalMapLift":
        """The lift (X^2 + c Y^2, Y^2) of z -> z^2 + c; already resultant one."""
        exact = isinstance(c, (int, Fraction))
        f1 = HomPoly.make([c, 0, 1], exact=exact)
        f2 = HomPoly.make([1, 0, 0] if exact else [1.0, 0j, 0j], exact=exact)
        return cls.make(f1, f2, precision)

    @property
    def degree(self) -> int:
        return self.f1.degree

    @property
    def exact(self) -> bool:
        return self.f1.exact and self.f2.exact

    @property
    def normalized(self) -> bool:
        return abs(complex(self.resultant) - 1.0) <= 1000 * tol_for(self.precision)

    def coeff_max(self) -> float:
        return float(np.max(np.abs(np.concatenate(
            [self.f1.as_complex(), self.f2.as_complex()]))))

    def apply(self, Z: np.ndarray) -> np.ndarray:
        """Evaluate the lift on an (..., 2) array of lifts."""
        Z = np.asarray(Z, dtype=complex)
        c1, c2 = self.f1.as_complex(), self.f2.as_complex()
        return np.stack([hom_eval(c1, Z[..., 0], Z[..., 1]),
                         hom_eval(c2, Z[..., 0], Z[..., 1])], axis=-1)

    def apply_point(self, p: ProjPoint) -> ProjPoint:
        out = self.apply(np.array([[p.x1, p.x2]]))
        return ProjPoint.make(out[0, 0], out[0, 1], p.precision)

    def iterate(self, n: int) -> tuple[HomPoly, HomPoly]:
        """Coefficients of the n-th symbolic iterate (degree d^n)."""
        if n < 1:
            raise ValueError("n must be positive")
        if self.degree ** n > DEGREE_CAP:
            raise DegreeCapExceeded(
                f"degree {self.degree}^{n} exceeds the cap {DEGREE_CAP}")
        A, B = self.f1, self.f2
        for _ in range(n - 1):
            A, B = self.f1.compose_pair(A, B), self.f2.compose_pair(A, B)
        return A, B

    def scale(self, c) -> "RationalMapLift":
        exact = self.exact and isinstance(c, (int, Fraction))
        f1 = HomPoly.make([c * x for x in (self.f1.coeffs if exact else self.f1.as_complex())], exact=exact)
        f2 = HomPoly.make([c * x for x in (self.f2.coeffs if exact else self.f2.as_complex())], exact=exact)
        return RationalMapLift.make(f1, f2, self.precision)


def resultant_of_forms(f1: HomPoly, f2: HomPoly, precision: int = 53):
    """Resultant as the 2d-square determinant; raises DegenerateLift on zero."""
    d = f1.degree
    desc1 = list(f1.coeffs[::-1])
    desc2 = list(f2.coeffs[::-1])
    rows = sylvester_rows(desc1, desc2, d)
    if f1.exact and f2.exact:
        res = det_bareiss(rows)
        if res == 0:
            raise DegenerateLift("zero resultant: forms share a projective zero")
        return res
    mat = np.array([[complex(x) for x in r] for r in rows], dtype=complex)
    res = np.linalg.det(mat)
    scale = max(1.0, float(np.max(np.abs(mat)))) ** (2 * d)
    if abs(res) <= tol_for(precision) * scale:
        raise DegenerateLift("zero resultant: forms share a projective zero")
    return res


def resultant(F: RationalMapLift):
    return F.resultant


def normalize_good_lift(F: RationalMapLift) -> RationalMapLift:
    """Rescale by the principal 2d-th root of 1/Res(F) so the resultant is one."""
    if F.exact and F.resultant == 1:
        return F
    res = complex(F.resultant)
    c = cmath.exp(-cmath.log(res) / (2 * F.degree))
    return F.scale(c)


# --------------------------------------------------------------------------
# map-spec files

def _parse_coeff(entry):
    if isinstance(entry, str):
        try:
            return Fraction(entry)
        except (ValueError, ZeroDivisionError) as exc:
            raise MapSpecError(f"bad rational coefficient {entry!r}") from exc
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        try:
            return complex(float(entry[0]), float(entry[1]))
        except (TypeError, ValueError) as exc:
            raise MapSpecError(f"bad float coefficient {entry!r}") from exc
    raise MapSpecError(f"coefficient must be 'p/q' or [re, im], got {entry!r}")


def load_map_spec(path, precision: int = 53) -> RationalMapLift:
    """Read {"degree": d, "num": [a_d..a_0], "den": [b_d..b_0]} (descending)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MapSpecError(f"cannot read map spec {path}: {exc}") from exc
    try:
        d = int(doc["degree"])
        num = [_parse_coeff(x) for x in doc["num"]]
        den = [_parse_coeff(x) for x in doc["den"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MapSpecError(f"malformed map spec {path}: {exc}") from exc
    if d < 2 or len(num) != d + 1 or len(den) != d + 1:
        raise MapSpecError("degree must be >= 2 with d+1 coefficients per form")
    exact = all(isinstance(x, Fraction) for x in num + den)
    f1 = HomPoly.make(num[::-1], exact=exact)   # internal order is ascending
    f2 = HomPoly.make(den[::-1], exact=exact)
    return RationalMapLift.make(f1, f2, precision)
