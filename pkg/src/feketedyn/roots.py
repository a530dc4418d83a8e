"""Simultaneous (Aberth-Ehrlich) root finding for dense complex polynomials.

High-degree dynatomic forms carry coefficients up to ~1e114, so plain Horner
partial sums can overflow for |z| > 1.  Evaluation therefore switches to the
reversed polynomial at 1/z outside the unit circle, which keeps every partial
sum below (degree+1) * max|coeff|.
"""

from __future__ import annotations

import numpy as np

from .errors import RootFindingDiverged

SWEEP_BUDGET_PER_DEGREE = 200


def _newton_ratio(coeffs_desc: np.ndarray, z: np.ndarray):
    """Return (p/p', log|p|) without forming z^m; safe for huge coefficients."""
    m = len(coeffs_desc) - 1
    inner = np.abs(z) <= 1.0
    out = np.zeros_like(z)
    logp = np.full(z.shape, -np.inf)

    if np.any(inner):
        zi = z[inner]
        v = np.zeros_like(zi)
        dv = np.zeros_like(zi)
        for c in coeffs_desc:
            dv = dv * zi + v
            v = v * zi + c
        with np.errstate(divide="ignore", invalid="ignore"):
            out[inner] = v / dv
        with np.errstate(divide="ignore"):
            logp[inner] = np.log(np.abs(v))

    if np.any(~inner):
        zo = z[~inner]
        w = 1.0 / zo
        qv = np.zeros_like(zo)
        qdv = np.zeros_like(zo)
        for c in coeffs_desc[::-1]:        # reversed polynomial q(w)
            qdv = qdv * w + qv
            qv = qv * w + c
        # p(z) = z^m q(1/z);  p'(z) = z^(m-1) (m q(w) - w q'(w))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[~inner] = zo * qv / (m * qv - w * qdv)
        with np.errstate(divide="ignore"):
            logp[~inner] = m * np.log(np.abs(zo)) + np.log(np.abs(qv))
    return out, logp


def _fujiwara_radius(coeffs_desc: np.ndarray) -> float:
    lead = abs(coeffs_desc[0])
    m = len(coeffs_desc) - 1
    with np.errstate(divide="ignore"):
        ratios = np.abs(coeffs_desc[1:]) / lead
    exps = 1.0 / np.arange(1, m + 1)
    vals = ratios ** exps
    r = 2.0 * float(np.max(vals)) if m else 1.0
    return max(r, 1e-3)


def aberth(coeffs, tol: float = 1e-13, rng=None, max_sweeps: int | None = None,
           strict: bool = True):
    """All roots of a dense polynomial, coefficients low-to-high.

    Returns an array of the full degree; exact zero trailing coefficients are
    peeled off as exact zero roots (no deflation otherwise).
    """
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2:
        return np.zeros(0, dtype=complex)
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    nzero = 0
    while c[nzero] == 0:
        nzero += 1
    c = c[nzero:]
    m = len(c) - 1
    if m == 0:
        return np.zeros(nzero, dtype=complex)
    if m == 1:
        return np.concatenate([np.zeros(nzero), [-c[0] / c[1]]])

    desc = c[::-1]
    R = _fujiwara_radius(desc)
    k = np.arange(m)
    z = 0.9 * R * np.exp(1j * (2 * np.pi * (k + 0.5) / m + 0.41))
    rng = np.random.default_rng(0) if rng is None else rng

    budget = max_sweeps if max_sweeps is not None else min(2000, SWEEP_BUDGET_PER_DEGREE + 2 * m)
    converged = False
    for _ in range(budget):
        w, _ = _newton_ratio(desc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        S = np.sum(1.0 / diff, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = w / (1.0 - w * S)
        bad = ~np.isfinite(corr)
        if np.any(bad):
            corr[bad] = 0.0
            z[bad] += (rng.standard_normal(bad.sum()) +
                       1j * rng.standard_normal(bad.sum())) * (0.01 * R)
        z = z - corr
        if np.all(np.abs(corr) <= tol * (1.0 + np.abs(z))):
            converged = True
            break
    # Newton polish; tightens residuals without disturbing clusters much
    for _ in range(3):
        w, _ = _newton_ratio(desc, z)
        w[~np.isfinite(w)] = 0.0
        step_ok = np.abs(w) < 0.1 * (1.0 + np.abs(z))
        z = z - np.where(step_ok, w, 0.0)
    if not converged and strict:
        # Newton ratios bottom out at the coefficient-evaluation noise floor
        # eps * (m+1) * max|c| * max(1,|z|)^m, so measure the log-residual
        # against that floor instead of demanding tiny corrections
        w, logp = _newton_ratio(desc, z)
        lead = np.max(np.abs(desc))
        floor = (np.log(np.finfo(float).eps * (m + 1) * lead)
                 + m * np.log(np.maximum(1.0, np.abs(z))))
        still = np.nan_to_num(logp, nan=np.inf) > floor + np.log(1e6)
        if np.any(still):
            raise RootFindingDiverged(
                f"{int(still.sum())} of {m} roots failed to converge "
                f"within the sweep budget {budget}")
    return np.concatenate([np.zeros(nzero, dtype=complex), z])


def hom_roots(coeffs_ascending, tol: float = 1e-13, rng=None, strict: bool = True,
              trim_tol: float = 1e-14):
    """Projective roots of a homogeneous binary form.

    Returns (finite_roots, n_infinity): leading-coefficient zeros become roots
    at infinity, the remaining dehomogenized roots come from :func:`aberth`.
    Pass ``trim_tol=0`` for exact coefficients, where a tiny-but-nonzero
    leading coefficient (e.g. monic with huge middle terms) is meaningful.
    """
    c = np.asarray(coeffs_ascending, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        raise ValueError("zero form has no well-defined root set")
    deg = len(c) - 1
    top = deg
    while top > 0 and abs(c[top]) <= trim_tol * scale:
        top -= 1
    n_inf = deg - top
    finite = (aberth(c[: top + 1], tol=tol, rng=rng, strict=strict)
              if top >= 1 else np.zeros(0, complex))
    return finite, n_inf


def aberth_batch(coeffs, tol: float = 1e-12, sweeps: int = 40):
    """Vectorized Aberth for a batch of same-degree polynomials.

    ``coeffs`` has shape (B, d+1) ascending with nonzero leading column;
    returns roots of shape (B, d).  Used for the degree-d preimage solves.
    """
    c = np.asarray(coeffs, dtype=complex)
    B, m1 = c.shape
    d = m1 - 1
    c = c / np.max(np.abs(c), axis=1, keepdims=True)
    if d == 1:
        return (-c[:, :1] / c[:, 1:2])
    lead = np.abs(c[:, -1])
    with np.errstate(divide="ignore"):
        ratios = np.abs(c[:, :-1][:, ::-1]) / lead[:, None]
    exps = 1.0 / np.arange(1, d + 1)
    R = 2.0 * np.max(ratios ** exps[None, :], axis=1)
    R = np.clip(R, 1e-6, 1e6)
    k = np.arange(d)
    z = 0.9 * R[:, None] * np.exp(1j * (2 * np.pi * (k[None, :] + 0.5) / d + 0.41))
    desc = c[:, ::-1]
    for _ in range(sweeps):
        v = np.zeros_like(z)
        dv = np.zeros_like(z)
        for j in range(m1):
            dv = dv * z + v
            v = v * z + desc[:, j][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = v / dv
        S = np.zeros_like(z)
        for a in range(d):
            for b in range(d):
                if a != b:
                    S[:, a] += 1.0 / (z[:, a] - z[:, b])
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = w / (1.0 - w * S)
        corr = np.nan_to_num(corr, nan=0.0, posinf=0.0, neginf=0.0)
        z = z - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(z))) <= tol:
            break
    return z


def poly_residuals(coeffs_ascending, roots):
    """|p(root)| via the overflow-safe evaluator, per root."""
    desc = np.asarray(coeffs_ascending, dtype=complex)[::-1]
    _, logp = _newton_ratio(desc, np.asarray(roots, dtype=complex))
    return np.exp(logp)
