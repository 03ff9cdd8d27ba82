"""Pose and structure recovery from real roots of the eliminant.

Everything downstream of the eliminant's real roots runs in double
precision: for each root s0 the two univariate sextics are solved, the pair
of folded values minimizing the mixed residual is kept, the rotation
parameters are unfolded (picking |u| <= 1), the twisted counterpart and the
four (R, +/-t) branches are screened by the in-front conditions, the scene
coordinates follow in closed form, and the candidate with the smallest
reprojection error wins.  The returned solution is mapped back to the
original camera frames through the recorded normalization rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import (
    ReducedSystem,
    SVAR,
    TVARS,
    WQuadratic,
    build_fji,
    build_Q,
    build_reduced_system,
    cayley_rotation,
    translation_ratios,
    twisted_counterpart,
)
from .eliminate import Eliminant, build_eliminant, extension_check
from .errors import (
    BehindCamera,
    DegenerateTranslation,
    DegenerateTwist,
    DegenerateTz,
    DegenerateV,
    NoCheiralConfig,
    NoSolution,
    ParallelRays,
    SolverError,
    WDenominatorZero,
)
from .normalize import NormalizedProblem, ProblemInstance, apply_normalization
from .poly import UniPoly, real_roots

_TINY = 1e-14


@dataclass(frozen=True)
class CandidateRoot:
    """One real root of the eliminant with its back-substituted values."""

    s0: float
    u2t: float
    u3t: float
    params2: tuple  # (u, v, w) for camera 2
    params3: tuple
    twisted2: tuple
    twisted3: tuple
    mix_residual: float


@dataclass(frozen=True)
class PoseSolution:
    """Recovered poses and scene coordinates in the original frames.

    r2, r3 map camera coordinates to the first camera's frame; t is the
    vector from the first to the second camera center (length equal to the
    baseline); sigma is the sign relating the third camera's offset
    direction to t.  reproj_error is the sum of squared image-coordinate
    residuals over all twelve observations (normalized units, computed in
    the normalization frame the solver works in).
    """

    r2: np.ndarray
    r3: np.ndarray
    t: np.ndarray
    sigma: int
    o2: np.ndarray
    o3: np.ndarray
    points: np.ndarray
    reproj_error: float
    n_real_roots: int
    s0: float
    runner_up_gap: float | None


class _FloatSystem:
    """Float views of the reduced system for root-level work."""

    def __init__(self, sys: ReducedSystem):
        self.h2 = self._tpoly(sys.h2, TVARS[2])
        self.h3 = self._tpoly(sys.h3, TVARS[3])
        self.hmix = sys.hmix

    @staticmethod
    def _tpoly(h, tvar):
        cols = h.coeffs_wrt(tvar)
        m = max(c.max_abs_coeff() for c in cols if not c.is_zero())
        out = []
        for c in cols:
            u = c.as_unipoly(SVAR)
            out.append([float(x / m) for x in u.coeffs])
        return out

    @staticmethod
    def _horner(coeffs: list[float], x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    def sextic_at(self, which: int, s0: float) -> np.ndarray:
        cols = self.h2 if which == 2 else self.h3
        return np.array([self._horner(c, s0) for c in cols])

    def mix_at(self, u2t: float, u3t: float, s0: float) -> float:
        return abs(
            self.hmix.eval_float_scaled({"u2t": u2t, "u3t": u3t, SVAR: s0})
        )


def _real_roots_of(coeffs: np.ndarray, imag_tol: float = 1e-6) -> list[float]:
    """Real roots of a float-coefficient polynomial (index = degree)."""
    c = coeffs.copy()
    m = np.max(np.abs(c))
    if m == 0:
        return []
    c /= m
    while len(c) > 1 and abs(c[-1]) < 1e-13:
        c = c[:-1]
    if len(c) <= 1:
        return []
    rts = np.roots(c[::-1])
    out = [float(r.real) for r in rts if abs(r.imag) <= imag_tol * (1.0 + abs(r.real))]
    out.sort()
    return out


def back_substitute(s0: float, sys: ReducedSystem, fsys: _FloatSystem | None = None):
    """(u2t, u3t) minimizing the mixed residual over the real-root grid of
    the two specialized sextics; None when either sextic has no real root."""
    if fsys is None:
        fsys = _FloatSystem(sys)
    r2 = _real_roots_of(fsys.sextic_at(2, s0))
    r3 = _real_roots_of(fsys.sextic_at(3, s0))
    if not r2 or not r3:
        return None
    best = None
    for a in r2:
        for b in r3:
            res = fsys.mix_at(a, b, s0)
            if best is None or res < best[0]:
                best = (res, a, b)
    return best[1], best[2], best[0]


def unfold_u(ut: float) -> float:
    """The root of u - 1/u = ut with |u| <= 1 (sign(0) taken as +1)."""
    sign = -1.0 if ut < 0 else 1.0
    return ut / 2.0 - sign * math.sqrt((ut / 2.0) ** 2 + 1.0)


def cayley_from_tilde(
    ut: float, s0: float, quads: list[WQuadratic]
) -> tuple[float, float, float]:
    """(u, v, w) from the folded value: quadratic unfold, shared-angle
    substitution for v, and the two-constraint linear solve for w.

    quads are the camera's three w-quadratics; the (1,2) pair is used first
    and the (1,3), (2,3) pairs as fallbacks when the denominator vanishes.
    """
    u = unfold_u(ut)
    den_v = 1.0 + s0 * u
    if abs(den_v) < _TINY:
        raise DegenerateV("1 + s*u vanished while recovering v")
    v = (s0 - u) / den_v
    uname, vname = quads[0].a.vars[0], quads[0].a.vars[1]
    point = {uname: u, vname: v}
    evals = [q.eval_floats(point) for q in quads]
    for i, k in ((0, 1), (0, 2), (1, 2)):
        a1, b1, c1 = evals[i]
        a2, b2, c2 = evals[k]
        den = a1 * b2 - b1 * a2
        mag = abs(a1 * b2) + abs(b1 * a2) + _TINY
        if abs(den) > 1e-12 * mag:
            return u, v, -(a1 * c2 - c1 * a2) / den
    raise WDenominatorZero("all constraint pairs gave a vanishing denominator")


def _depth_p1(r: np.ndarray, t: np.ndarray, d: float) -> tuple[float, float]:
    """(z_P1, camera-2 depth expression) for the in-front screening."""
    r13, r33 = r[0, 2], r[2, 2]
    if abs(r33) < _TINY or abs(r13) < _TINY:
        raise NoCheiralConfig("degenerate first-point direction")
    xp21 = r13 / r33
    tnorm = float(np.linalg.norm(t))
    o = t * (d / tnorm)
    if abs(t[2]) < _TINY:
        raise NoCheiralConfig("baseline z-component vanished in screening")
    z_p1 = (t[0] - t[2] * xp21) / (0.0 - xp21) * o[2] / t[2]
    front2 = (-o[0]) * r[0, 2] + (-o[1]) * r[1, 2] + (z_p1 - o[2]) * r[2, 2]
    return z_p1, front2


def cheirality_select(
    r_plus: np.ndarray,
    r_minus: np.ndarray,
    t_plus: np.ndarray,
    d: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Pick the (R, t) branch that puts the first point in front of both
    cameras; the four candidates are (R+|t+), (R+|t-), (R-|t+), (R-|t-).

    Returns (R, t, branch index).  NoCheiralConfig when no branch passes.
    """
    branches = [
        (r_plus, t_plus),
        (r_plus, -t_plus),
        (r_minus, t_plus),
        (r_minus, -t_plus),
    ]
    passing = []
    for idx, (r, t) in enumerate(branches):
        try:
            z_p1, front2 = _depth_p1(r, t, d)
        except NoCheiralConfig:
            continue
        if z_p1 > 0 and front2 > 0:
            passing.append((idx, r, t))
    if not passing:
        raise NoCheiralConfig("no branch keeps the first point in front")
    idx, r, t = passing[0]
    return r, t, idx


def recover_structure(
    r2: np.ndarray,
    r3: np.ndarray,
    t: np.ndarray,
    sigma: int,
    norm: NormalizedProblem,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Camera centers and scene points from the closed-form depth ratios.

    Raises DegenerateTz when the baseline direction has (numerically) no z
    component and ParallelRays when a triangulation denominator vanishes.
    """
    d = float(norm.baseline)
    pts = norm.float_points()
    tnorm = float(np.linalg.norm(t))
    if abs(t[2]) < 1e-12 * tnorm:
        raise DegenerateTz("baseline z-component too small for the depth formulas")
    o2 = t * (d / tnorm)
    xp21 = r2[0, 2] / r2[2, 2]
    xp31 = r3[0, 2] / r3[2, 2]
    den3 = xp21 * (t[0] - t[2] * xp31)
    if abs(den3) < _TINY:
        raise DegenerateTz("third-camera depth denominator vanished")
    z_o3 = xp31 * (t[0] - t[2] * xp21) / den3 * o2[2]
    o3 = t / t[2] * z_o3
    points = np.zeros((4, 3))
    for i in range(4):
        x1, y1 = pts[0, i]
        h = r2 @ np.array([pts[1, i, 0], pts[1, i, 1], 1.0])
        xp2i = h[0] / h[2]
        if abs(x1 - xp2i) < _TINY:
            raise ParallelRays(f"point {i + 1}: x_1i equals x'_2i")
        z = (t[0] - t[2] * xp2i) / (x1 - xp2i) * o2[2] / t[2]
        points[i] = (x1 * z, y1 * z, z)
    return o2, o3, points


def reprojection_error(
    r2: np.ndarray,
    r3: np.ndarray,
    o2: np.ndarray,
    o3: np.ndarray,
    points: np.ndarray,
    norm: NormalizedProblem,
) -> float:
    """Sum of squared image-coordinate residuals over all three cameras.

    Raises BehindCamera if any reprojected depth is nonpositive (the
    candidate is disqualified)."""
    pts = norm.float_points()
    err = 0.0
    cams = (
        (np.eye(3), np.zeros(3)),
        (r2, o2),
        (r3, o3),
    )
    for j, (r, o) in enumerate(cams):
        for i in range(4):
            v = r.T @ (points[i] - o)
            if v[2] <= 0:
                raise BehindCamera(
                    f"reprojected point {i + 1} behind camera {j + 1}"
                )
            err += (pts[j, i, 0] - v[0] / v[2]) ** 2
            err += (pts[j, i, 1] - v[1] / v[2]) ** 2
    return float(err)


def _solve_normalized(
    norm: NormalizedProblem,
    sys: ReducedSystem | None = None,
    elim: Eliminant | None = None,
):
    """Candidate sweep in the normalized frame; returns the scored list."""
    if sys is None:
        sys = build_reduced_system(norm)
    if elim is None:
        elim = build_eliminant(sys, norm)
    roots = real_roots(elim.S, 1e-12)
    fsys = _FloatSystem(sys)
    y12 = float(norm.coord(1, 2)[1])
    y22 = float(norm.coord(2, 2)[1])
    y32 = float(norm.coord(3, 2)[1])
    quads2 = [build_fji(2, i, norm) for i in (1, 2, 3)]
    quads3 = [build_fji(3, i, norm) for i in (1, 2, 3)]
    ds = elim.S.derivative()
    d = float(norm.baseline)
    candidates = []
    for s0 in roots:
        if not extension_check(s0, sys):
            continue
        back = back_substitute(s0, sys, fsys)
        if back is None:
            continue
        u2t, u3t, mixres = back
        try:
            p2 = cayley_from_tilde(u2t, s0, quads2)
            p3 = cayley_from_tilde(u3t, s0, quads3)
            tw2 = twisted_counterpart(*p2, y12, y22)
            tw3 = twisted_counterpart(*p3, y12, y32)
        except (DegenerateV, WDenominatorZero, DegenerateTwist):
            continue
        cand = CandidateRoot(
            s0=s0,
            u2t=u2t,
            u3t=u3t,
            params2=p2,
            params3=p3,
            twisted2=tw2,
            twisted3=tw3,
            mix_residual=mixres,
        )
        try:
            scored = _score_candidate(cand, norm, d)
        except (
            BehindCamera,
            DegenerateTranslation,
            DegenerateTz,
            NoCheiralConfig,
            ParallelRays,
        ):
            continue
        eps, payload = scored
        # tie-break weight: residual over derivative magnitude at the root
        cond = abs(elim.S.eval_float(s0)) / max(abs(ds.eval_float(s0)), 1e-300)
        candidates.append((eps, cond, s0, payload))
    return candidates, len(roots)


def _score_candidate(cand: CandidateRoot, norm: NormalizedProblem, d: float):
    y12 = float(norm.coord(1, 2)[1])
    y22 = float(norm.coord(2, 2)[1])
    y32 = float(norm.coord(3, 2)[1])

    r2p = np.array(cayley_rotation(*cand.params2), dtype=float)
    r2m = np.array(cayley_rotation(*cand.twisted2), dtype=float)
    txz, tyx = translation_ratios(r2p, y12, y22)
    t2 = np.array([txz, tyx * txz, 1.0])
    r2, t_sel, _ = cheirality_select(r2p, r2m, t2, d)

    r3p = np.array(cayley_rotation(*cand.params3), dtype=float)
    r3m = np.array(cayley_rotation(*cand.twisted3), dtype=float)
    txz3, tyx3 = translation_ratios(r3p, y12, y32)
    t3 = np.array([txz3, tyx3 * txz3, 1.0])
    r3, t3_sel, _ = cheirality_select(r3p, r3m, t3, d)

    sigma = 1 if float(np.dot(t3_sel, t_sel)) >= 0 else -1
    o2, o3, points = recover_structure(r2, r3, t_sel, sigma, norm)
    if np.dot(o3, o2) * sigma < 0:
        # camera-3 cheirality and the closed-form position disagree
        raise NoCheiralConfig("inconsistent third-camera side")
    eps = reprojection_error(r2, r3, o2, o3, points, norm)
    return eps, (r2, r3, t_sel, sigma, o2, o3, points)


def solve(inst: ProblemInstance) -> PoseSolution:
    """Full pipeline: normalize, build and eliminate the constraint system,
    sweep the eliminant's real roots, and return the reprojection-error
    minimizer mapped back to the original frames.

    Raises NoSolution when no candidate survives back-substitution and the
    in-front screening.
    """
    norm = apply_normalization(inst)
    candidates, n_roots = _solve_normalized(norm)
    if not candidates:
        raise NoSolution(f"no candidate survived among {n_roots} real roots")
    candidates.sort(key=lambda c: (c[0], c[1]))
    best = candidates[0]
    if len(candidates) > 1 and candidates[1][0] - best[0] < 1e-14:
        # explicit tie: both within 1e-14, prefer the better-conditioned root
        pair = sorted(candidates[:2], key=lambda c: c[1])
        best = pair[0]
    runner_up = candidates[1][0] - best[0] if len(candidates) > 1 else None
    eps, _, s0, (r2, r3, t_sel, sigma, o2, o3, points) = best
    rho1 = norm.rho[0]
    r2_orig = rho1.T @ r2 @ norm.rho[1]
    r3_orig = rho1.T @ r3 @ norm.rho[2]
    t_orig = rho1.T @ (o2 - 0.0)
    return PoseSolution(
        r2=r2_orig,
        r3=r3_orig,
        t=t_orig,
        sigma=sigma,
        o2=rho1.T @ o2,
        o3=rho1.T @ o3,
        points=points @ rho1,
        reproj_error=eps,
        n_real_roots=n_roots,
        s0=s0,
        runner_up_gap=runner_up,
    )
