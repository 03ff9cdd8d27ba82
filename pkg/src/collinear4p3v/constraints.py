"""Symbolic constraint system for the collinear three-view pose problem.

Starting from a normalized instance this module builds, in exact rational
arithmetic:

  * the rational rotation parameterization R(u, v, w) and its inverse,
  * the translation-ratio formulas tying t to R and the second point,
  * the denominator-cleared coplanarity matrices Q per camera,
  * six per-camera quadratics-in-w f_i^(j) and the cross-camera polynomial
    f_mix, obtained from 3x3 minors after dividing out the known clearing
    factors (every division is checked exact),
  * their w-eliminated determinant conditions g^(j) and g_mix,
  * the shared-variable substitution v_j = (s - u_j)/(1 + s u_j), and
  * the reciprocal-symmetry reduction u_j -> u_j - 1/u_j that halves the
    degree, producing the three-variable system (h2t, h3t, hmix_t).

Variable names: u2 v2 w2 u3 v3 w3 for the rotation parameters, s for the
shared node-angle tangent, u2t/u3t for the folded variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import bincoef, mpq

import numpy as np

from .errors import (
    BadIndex,
    ClearingFailed,
    DegenerateTranslation,
    DegenerateTwist,
    DegreeMismatch,
    GimbalDegenerate,
    NotDivisible,
    NotSymmetric,
)
from .normalize import NormalizedProblem
from .poly import MPoly, Rat, UniPoly, exact_div

SVAR = "s"
UVARS = {2: "u2", 3: "u3"}
VVARS = {2: "v2", 3: "v3"}
WVARS = {2: "w2", 3: "w3"}
TVARS = {2: "u2t", 3: "u3t"}


# ---------------------------------------------------------------------------
# Cayley parameterization


def cayley_rotation(u, v, w):
    """Rotation matrix from the rational three-parameter form.

    Works elementwise over whatever field the inputs live in (exact
    rationals or floats); returns a 3x3 nested tuple.
    """
    u2, v2, w2 = u * u, v * v, w * w
    delta = 1 + u2 + w2 * (1 + v2)
    n = (
        (1 - u2 + w2 * (1 - v2), 2 * (v * w2 - u), 2 * w * (u + v)),
        (2 * (v * w2 + u), 1 - u2 - w2 * (1 - v2), 2 * w * (u * v - 1)),
        (2 * w * (u - v), 2 * w * (u * v + 1), 1 + u2 - w2 * (1 + v2)),
    )
    return tuple(tuple(x / delta for x in row) for row in n)


def cayley_from_rotation(r) -> tuple:
    """Inverse of cayley_rotation for a rotation that is inside the chart.

    Raises GimbalDegenerate for half-turns (trace -1) and for rotations
    about the z-axis (w = 0), which sit outside the parameterization's
    useful domain here.
    """
    tr = r[0][0] + r[1][1] + r[2][2]
    if tr == -1:
        raise GimbalDegenerate("half-turn rotation has no (u, v, w) chart")
    delta = 4 / (1 + tr)
    wq = (r[2][1] - r[1][2]) * delta / 4
    if wq == 0:
        raise GimbalDegenerate("w = 0 (rotation about the z-axis)")
    u = (r[1][0] - r[0][1]) * delta / 4
    v = (r[0][2] - r[2][0]) / (r[2][1] - r[1][2])
    return u, v, wq


@dataclass(frozen=True)
class CayleySymbolic:
    """Numerator matrix and denominator of R(u_j, v_j, w_j) as polynomials."""

    numerator: tuple  # 3x3 of MPoly
    delta: MPoly

    def check_identity(self) -> bool:
        """numerator @ numerator^T == delta^2 * I, as a polynomial identity."""
        n = self.numerator
        d2 = self.delta * self.delta
        for i in range(3):
            for k in range(3):
                acc = MPoly.zero(self.delta.vars)
                for l in range(3):
                    acc = acc + n[i][l] * n[k][l]
                if i == k:
                    acc = acc - d2
                if not acc.is_zero():
                    return False
        return True


@lru_cache(maxsize=None)
def cayley_symbolic(j: int) -> CayleySymbolic:
    vs = (UVARS[j], VVARS[j], WVARS[j])
    u = MPoly.var(vs, vs[0])
    v = MPoly.var(vs, vs[1])
    w = MPoly.var(vs, vs[2])
    one = MPoly.const(vs, 1)
    u2, v2, w2 = u * u, v * v, w * w
    delta = one + u2 + w2 * (one + v2)
    n = (
        (one - u2 + w2 * (one - v2), (v * w2 - u) * 2, w * (u + v) * 2),
        ((v * w2 + u) * 2, one - u2 - w2 * (one - v2), w * (u * v - one) * 2),
        (w * (u - v) * 2, w * (u * v + one) * 2, one + u2 - w2 * (one + v2)),
    )
    return CayleySymbolic(numerator=n, delta=delta)


def euler_from_cayley(u: float, v: float, w: float) -> tuple[float, float, float]:
    """Node-line Euler angles (phi, theta, psi) of R(u, v, w).

    phi and psi come from arctangents of (u +/- v) ratios; theta's sign
    branch is the one that makes the z-x-z recomposition reproduce
    cayley_rotation (fixed once by a property test).
    """
    du = 1.0 - u * v
    dv = 1.0 + u * v
    if abs(du) < 1e-300 or abs(dv) < 1e-300:
        raise GimbalDegenerate("u*v = +/-1 leaves an angle formula undefined")
    phi0 = math.atan((u + v) / du)
    psi0 = math.atan((u - v) / dv)
    th0 = 2.0 * math.atan(w * math.sqrt((1.0 + v * v) / (1.0 + u * u)))
    # the arctangents determine phi and psi only mod pi and theta up to
    # sign; pick the branch combination that recomposes to the rotation
    target = np.array(cayley_rotation(u, v, w), dtype=float)
    best = None
    for dphi in (0.0, math.pi):
        for sgn in (1.0, -1.0):
            for dpsi in (0.0, math.pi):
                cand = (phi0 + dphi, sgn * th0, psi0 + dpsi)
                err = float(
                    np.abs(euler_rotation_zxz(*cand) - target).max()
                )
                if best is None or err < best[0]:
                    best = (err, cand)
    if best[0] > 1e-9:
        raise GimbalDegenerate("no angle branch reproduces the rotation")
    return best[1]


def euler_rotation_zxz(phi: float, theta: float, psi: float) -> np.ndarray:
    """Compose Rz(phi) @ Rx(theta) @ Rz(psi)."""

    def rz(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def rx(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])

    return rz(phi) @ rx(theta) @ rz(psi)


# ---------------------------------------------------------------------------
# translation and the twisted pair


def translation_ratios(r, y12, yj2) -> tuple:
    """(t_x/t_z, t_y/t_x) for an essential matrix satisfying the first two
    epipolar constraints of camera j.

    `r` is a 3x3 rotation (indexable), y12/yj2 the second point's y
    coordinates in view 1 and view j.  Raises DegenerateTranslation when a
    denominator vanishes (e.g. rotations about the z-axis, R13 = R23 = 0).
    """
    r12, r13 = r[0][1], r[0][2]
    r22, r23 = r[1][1], r[1][2]
    r32, r33 = r[2][1], r[2][2]
    den = (r23 * r12 - r13 * r22) * yj2 + r13 * (r32 * yj2 + r33) * y12
    if r13 == 0 or den == 0:
        raise DegenerateTranslation("translation formula denominator vanished")
    tx_over_tz = r13 * (r12 * yj2 + r13) * y12 / den
    ty_over_tx = r23 / r13
    return tx_over_tz, ty_over_tx


def essential_matrix(u, v, w, y12, yj2):
    """[t]_x R with t = (t_x, t_y, 1) from the translation-ratio formulas."""
    r = cayley_rotation(u, v, w)
    tx_tz, ty_tx = translation_ratios(r, y12, yj2)
    tx = tx_tz
    ty = ty_tx * tx
    t = (tx, ty, 1)  # gauge t_z = 1
    e = []
    for i in range(3):
        row = []
        for k in range(3):
            # ([t]_x R)_ik = sum_l eps_{i l m} t_l ... expanded directly
            row.append(
                t[(i + 1) % 3] * r[(i + 2) % 3][k]
                - t[(i + 2) % 3] * r[(i + 1) % 3][k]
            )
        e.append(tuple(row))
    return tuple(e)


def twisted_counterpart(u, v, w, y12, yj2) -> tuple:
    """The parameter triple of the second pose producing the negated
    essential matrix.

    Requires u != 0 and v != 0 and a nonvanishing denominator; raises
    DegenerateTwist otherwise.
    """
    if u == 0 or v == 0:
        raise DegenerateTwist("u = 0 or v = 0 has no twisted counterpart")
    den = y12 * (v + u) - yj2 * (v - u) + 2 * y12 * yj2 * v * w
    if den == 0:
        raise DegenerateTwist("twisted-pair denominator vanished")
    num = y12 * w * (v + u) + yj2 * w * (v - u) - 2 * y12 * yj2 * u
    up = -1 / u
    vp = -1 / v
    wp = -(v / u) * num / den
    return up, vp, wp


# ---------------------------------------------------------------------------
# Q matrices and the seven polynomials


def _point_numerators(j: int, norm: NormalizedProblem, i: int):
    """N_j @ (x_ji, y_ji, 1) as a 3-vector of MPoly in (u_j, v_j, w_j)."""
    sym = cayley_symbolic(j)
    x, y = norm.coord(j, i)
    out = []
    for row in sym.numerator:
        out.append(row[0] * x + row[1] * y + row[2])
    return tuple(out)


def build_Q(j: int, norm: NormalizedProblem):
    """Denominator-cleared coplanarity matrix for camera j (4 rows x 3 cols).

    Row i is the translation-direction constraint from point i, scaled by
    that point's positive depth numerator, so entries are polynomials in
    (u_j, v_j, w_j).  For the normalized instance row 1 reduces to
    (n_y, -n_x, 0).
    """
    rows = []
    for i in range(1, 5):
        nx, ny, nz = _point_numerators(j, norm, i)
        x1, y1 = norm.coord(1, i)
        rows.append((ny - nz * y1, nz * x1 - nx, nx * y1 - ny * x1))
    return tuple(rows)


_TRIPLES = {1: (0, 1, 2), 2: (0, 1, 3), 3: (0, 2, 3)}


def _det3(rows) -> MPoly:
    (a1, b1, c1), (a2, b2, c2), (a3, b3, c3) = rows
    return (
        a1 * (b2 * c3 - b3 * c2)
        - b1 * (a2 * c3 - a3 * c2)
        + c1 * (a2 * b3 - a3 * b2)
    )


@dataclass(frozen=True)
class WQuadratic:
    """f = a*w^2 + b*w + c with a, b, c free of w."""

    a: MPoly
    b: MPoly
    c: MPoly
    wvar: str

    @staticmethod
    def from_poly(f: MPoly, wvar: str) -> "WQuadratic":
        if f.degree(wvar) != 2:
            raise DegreeMismatch(
                f"expected degree 2 in {wvar}, got {f.degree(wvar)}"
            )
        c, b, a = f.coeffs_wrt(wvar)
        return WQuadratic(a=a, b=b, c=c, wvar=wvar)

    def poly(self) -> MPoly:
        w = MPoly.var((self.wvar,), self.wvar)
        return self.a * w * w + self.b * w + self.c

    def eval_floats(self, point: dict) -> tuple[float, float, float]:
        """(a, b, c) at a float point, jointly scaled by one max-coefficient
        factor so ratios across the triple stay meaningful."""
        m = max(
            self.a.max_abs_coeff(),
            self.b.max_abs_coeff(),
            self.c.max_abs_coeff(),
        )
        if not m:
            return 0.0, 0.0, 0.0
        out = []
        for p in (self.a, self.b, self.c):
            acc = 0.0
            for e, c in p.terms.items():
                t = float(c / m)
                for v, k in zip(p.vars, e):
                    if k:
                        t *= point[v] ** k
                acc += t
            out.append(acc)
        return tuple(out)


def build_fji(j: int, i: int, norm: NormalizedProblem, q=None) -> WQuadratic:
    """Per-camera constraint i in (u_j, v_j, w_j): degree 6 total, degree 2
    in w_j, returned split by powers of w_j.

    The 3x3 minor of the cleared Q matrix is divided by the clearing factor
    Delta_j * w_j; ClearingFailed if that division is not exact.
    """
    if q is None:
        q = build_Q(j, norm)
    rows = [q[k] for k in _TRIPLES[i]]
    det = _det3(rows)
    sym = cayley_symbolic(j)
    wname = WVARS[j]
    try:
        f = exact_div(det, sym.delta)
        f = exact_div(f, MPoly.var(f.vars, wname), wname)
    except NotDivisible as exc:
        raise ClearingFailed(
            f"clearing factor of f^({j})_{i} did not divide"
        ) from exc
    f = f.primitive()
    # generic total degree is 6; the minors containing both structurally
    # sparse rows (i = 1, 2) drop to 5 on normalized data
    if not 5 <= f.total_degree() <= 6:
        raise DegreeMismatch(f"f^({j})_{i} total degree {f.total_degree()}")
    return WQuadratic.from_poly(f, wname)


def build_fmix(norm: NormalizedProblem, q2=None, q3=None) -> MPoly:
    """Cross-camera constraint from rows (2,1), (2,2), (3,2): total degree 7,
    degree 2 in w_2."""
    if q2 is None:
        q2 = build_Q(2, norm)
    if q3 is None:
        q3 = build_Q(3, norm)
    det = _det3([q2[0], q2[1], q3[1]])
    u2 = MPoly.var(("u2", "v2"), "u2")
    v2 = MPoly.var(("u2", "v2"), "v2")
    try:
        # clearing factor w2 * (u2 + v2): the first-point direction numerator
        f = exact_div(det, MPoly.var(det.vars, "w2"), "w2")
        f = exact_div(f, u2 + v2, "u2")
    except NotDivisible as exc:
        raise ClearingFailed("clearing factor of f_mix did not divide") from exc
    f = f.primitive()
    if f.total_degree() != 7:
        raise DegreeMismatch(f"f_mix total degree {f.total_degree()} != 7")
    if f.degree("w2") != 2:
        raise DegreeMismatch(f"f_mix w2-degree {f.degree('w2')} != 2")
    return f


def det3_condition(rows) -> MPoly:
    """Determinant of the 3x(a, b, c) coefficient matrix of three
    quadratics-in-w; zero exactly when they share a w-root structure."""
    mat = [(r.a, r.b, r.c) if isinstance(r, WQuadratic) else tuple(r) for r in rows]
    return _det3(mat)


def build_gj(j: int, norm: NormalizedProblem, fs=None) -> MPoly:
    """w-eliminated camera condition g^(j)(u_j, v_j), total degree 10."""
    if fs is None:
        fs = [build_fji(j, i, norm) for i in (1, 2, 3)]
    g = det3_condition(fs).primitive()
    if g.total_degree() != 10:
        raise DegreeMismatch(f"g^({j}) total degree {g.total_degree()} != 10")
    return g


def _mix_divisor(vars, y12: Rat, yj2: Rat, uname: str, vname: str) -> MPoly:
    u = MPoly.var(vars, uname)
    v = MPoly.var(vars, vname)
    a = y12 * y12 - yj2 * yj2
    b = 2 * (y12 * y12 + 2 * y12 * y12 * yj2 * yj2 + yj2 * yj2)
    return u * u * a + u * v * b + v * v * a


def mixed_chain(norm: NormalizedProblem, f2=None, f3=None, fmix=None) -> MPoly:
    """Eliminate w_2 then w_3 from the mixed constraint: returns
    g_mix(u2, v2, u3, v3).  Both stated quadratic divisors must divide
    exactly (NotDivisible otherwise, per the generic-instance assumption)."""
    if f2 is None:
        f2 = [build_fji(2, i, norm) for i in (1, 2, 3)]
    if f3 is None:
        f3 = [build_fji(3, i, norm) for i in (1, 2, 3)]
    if fmix is None:
        fmix = build_fmix(norm)
    y12 = norm.coord(1, 2)[1]
    y22 = norm.coord(2, 2)[1]
    y32 = norm.coord(3, 2)[1]
    fmix_q = WQuadratic.from_poly(fmix, "w2")
    det1 = det3_condition([f2[0], f2[1], fmix_q])
    div1 = _mix_divisor(det1.vars, y12, y22, "u2", "v2")
    fhat = exact_div(det1, div1).primitive()
    if fhat.degree("w3") != 2:
        raise DegreeMismatch(f"fhat_mix w3-degree {fhat.degree('w3')} != 2")
    fhat_q = WQuadratic.from_poly(fhat, "w3")
    det2 = det3_condition([f3[0], f3[1], fhat_q])
    div2 = _mix_divisor(det2.vars, y12, y32, "u3", "v3")
    gmix = exact_div(det2, div2).primitive()
    return gmix


# ---------------------------------------------------------------------------
# shared-variable substitution and symmetric reduction


def substitute_s(p: MPoly, cameras: tuple[int, ...], norm: NormalizedProblem) -> MPoly:
    """Replace v_j by (s - u_j)/(1 + s u_j) for each listed camera and clear
    denominators.

    For a single camera this produces h^(j)(u_j, s) = (1 + s u_j)^B g^(j)
    with B the v_j-degree; for the mixed polynomial both cameras are
    substituted and the known quartic divisor
    (1 + u2^2)(1 + u3^2)(x13 + y13 s)(x14 + y14 s) is divided out exactly.
    """
    vnames = {VVARS[j]: j for j in cameras}
    vars_out = tuple(
        sorted((set(p.vars) - set(vnames)) | {SVAR} | {UVARS[j] for j in cameras})
    )
    s = MPoly.var(vars_out, SVAR)
    one = MPoly.const(vars_out, 1)
    bdegs = {j: max(p.degree(VVARS[j]), 0) for j in cameras}
    # cached powers of (s - u_j) and (1 + s u_j)
    pows: dict = {}
    for j in cameras:
        u = MPoly.var(vars_out, UVARS[j])
        num = s - u
        den = one + s * u
        pn, pd = [one], [one]
        for _ in range(bdegs[j]):
            pn.append(pn[-1] * num)
            pd.append(pd[-1] * den)
        pows[j] = (pn, pd)
    vidx = {v: k for k, v in enumerate(p.vars)}
    out = MPoly.zero(vars_out)
    for e, c in p.terms.items():
        term = MPoly.const(vars_out, c)
        # every term picks up (s - u)^b (1 + s u)^(B - b), including b = 0
        for j in cameras:
            b = e[vidx[VVARS[j]]] if VVARS[j] in vidx else 0
            pn, pd = pows[j]
            term = term * pn[b] * pd[bdegs[j] - b]
        for k, v in enumerate(p.vars):
            if e[k] and v not in vnames:
                term = term * MPoly.var(vars_out, v) ** e[k]
        out = out + term
    if len(cameras) == 2:
        x13, y13 = norm.coord(1, 3)
        x14, y14 = norm.coord(1, 4)
        u2 = MPoly.var(vars_out, "u2")
        u3 = MPoly.var(vars_out, "u3")
        div = (
            (one + u2 * u2)
            * (one + u3 * u3)
            * (s * y13 + x13)
            * (s * y14 + x14)
        )
        out = exact_div(out, div)
    return out.primitive()


def kappa(i2: int, k2: int) -> int:
    """Expansion coefficient kappa_{i,k} = C(i+k, i-k) + C(i+k-1, i-k-1),
    with arguments doubled so half-integer indices stay integral.

    Convention: C(n, k) = 0 outside 0 <= k <= n, except C(-1, -1) = 1 (which
    makes kappa_{0,0} = 2, the constant pair u^0 + u^0).
    """
    if i2 < 0 or k2 < 0 or i2 < k2 or (i2 - k2) % 2:
        raise BadIndex(f"kappa indices 2i={i2}, 2k={k2} out of range")

    def c(n2: int, k2_: int) -> int:
        if n2 % 2 or k2_ % 2:
            raise BadIndex("binomial of a half-integer")
        n, k = n2 // 2, k2_ // 2
        if n == -1 and k == -1:
            return 1
        if k < 0 or n < 0 or k > n:
            return 0
        return int(bincoef(n, k))

    return c(i2 + k2, i2 - k2) + c(i2 + k2 - 2, i2 - k2 - 2)


@lru_cache(maxsize=None)
def _fold_expansion(m: int) -> tuple:
    """Laurent coefficients of (u - 1/u)^m: exponent offset -m..m step 2."""
    return tuple(
        (m - 2 * i, (-1) ** i * int(bincoef(m, i))) for i in range(m + 1)
    )


def _fold_once(p: MPoly, uvar: str, tname: str) -> MPoly:
    """Rewrite p = u^m * q(u - 1/u) as q; NotSymmetric if impossible."""
    iu = p.vars.index(uvar)
    if p.is_zero():
        return _rename_var(p, uvar, tname)
    val = min(e[iu] for e in p.terms)
    deg = max(e[iu] for e in p.terms)
    if (val + deg) % 2:
        raise NotSymmetric(f"{uvar}-support of width {deg - val} has no center")
    m = (val + deg) // 2
    # Laurent representation around the center
    rest_vars = p.vars[:iu] + p.vars[iu + 1 :]
    laurent: dict[int, dict] = {}
    for e, c in p.terms.items():
        ell = e[iu] - m
        laurent.setdefault(ell, {})[e[:iu] + e[iu + 1 :]] = c
    out_vars = tuple(sorted(set(rest_vars) | {tname}))
    it = out_vars.index(tname)
    out_terms: dict = {}
    top = max(laurent)
    for ell in range(top, 0, -1):
        coef = laurent.pop(ell, None)
        if not coef:
            continue
        for er, c in coef.items():
            out_terms[er[:it] + (ell,) + er[it:]] = c
        for off, w in _fold_expansion(ell):
            if off == ell:
                continue  # cancels exactly against the popped stratum
            tgt = laurent.setdefault(off, {})
            for er, c in coef.items():
                s = tgt.get(er, mpq(0)) - c * w
                if s:
                    tgt[er] = s
                elif er in tgt:
                    del tgt[er]
    for ell, coef in laurent.items():
        if ell == 0:
            for er, c in coef.items():
                out_terms[er[:it] + (0,) + er[it:]] = c
        elif coef:
            raise NotSymmetric(
                f"residual Laurent terms at {uvar}^{ell + m} break the pairing"
            )
    return MPoly(out_vars, out_terms)


def _rename_var(p: MPoly, old: str, new: str) -> MPoly:
    vs = tuple(sorted((set(p.vars) - {old}) | {new}))
    io = p.vars.index(old)
    perm = []
    for v in vs:
        perm.append(io if v == new else p.vars.index(v))
    return MPoly(vs, {tuple(e[i] for i in perm): c for e, c in p.terms.items()})


def symmetric_reduce(h: MPoly, cameras: tuple[int, ...]) -> MPoly:
    """Halve the degree using the reciprocal symmetry u_j <-> -1/u_j.

    Writes h as u_j^m times a polynomial in u_j - 1/u_j for each listed
    camera (NotSymmetric when the Laurent pairing fails) and returns the
    folded polynomial in the u_jt variables.
    """
    out = h
    for j in cameras:
        out = _fold_once(out, UVARS[j], TVARS[j])
    return out


# ---------------------------------------------------------------------------
# the reduced three-variable system


@dataclass(frozen=True)
class ReducedSystem:
    """The three folded polynomials in (u2t, u3t, s)."""

    h2: MPoly  # vars (u2t, s), degree 6 in u2t
    h3: MPoly  # vars (u3t, s), degree 6 in u3t
    hmix: MPoly  # vars (u2t, u3t, s), degree 2 in each u_jt

    def check_shapes(self) -> None:
        for j, h in ((2, self.h2), (3, self.h3)):
            t = TVARS[j]
            if h.degree(t) != 6:
                raise DegreeMismatch(f"h{j}t degree in {t} is {h.degree(t)} != 6")
            lead = h.coeffs_wrt(t)[6].as_unipoly(SVAR)
            if lead.degree > 6:
                raise DegreeMismatch(f"h{j}t leading s-degree {lead.degree} > 6")
            if lead[0] != 0 or lead[1] != 0:
                raise DegreeMismatch(
                    f"h{j}t leading coefficient lacks the s^2 factor"
                )
        for t in ("u2t", "u3t"):
            if self.hmix.degree(t) != 2:
                raise DegreeMismatch(
                    f"hmix degree in {t} is {self.hmix.degree(t)} != 2"
                )

    def leading_coefficient(self, j: int) -> UniPoly:
        h = self.h2 if j == 2 else self.h3
        return h.coeffs_wrt(TVARS[j])[6].as_unipoly(SVAR)


def build_reduced_system(norm: NormalizedProblem) -> ReducedSystem:
    """Full symbolic chain from a normalized instance to the three-variable
    system, with every shape assertion from the construction enforced."""
    q2 = build_Q(2, norm)
    q3 = build_Q(3, norm)
    f2 = [build_fji(2, i, norm, q2) for i in (1, 2, 3)]
    f3 = [build_fji(3, i, norm, q3) for i in (1, 2, 3)]
    fmix = build_fmix(norm, q2, q3)
    g2 = build_gj(2, norm, f2)
    g3 = build_gj(3, norm, f3)
    gmix = mixed_chain(norm, f2, f3, fmix)
    h2 = substitute_s(g2, (2,), norm)
    h3 = substitute_s(g3, (3,), norm)
    hmix = substitute_s(gmix, (2, 3), norm)
    h2t = symmetric_reduce(h2, (2,)).primitive()
    h3t = symmetric_reduce(h3, (3,)).primitive()
    hmixt = symmetric_reduce(hmix, (2, 3)).primitive()
    sys = ReducedSystem(h2=h2t, h3=h3t, hmix=hmixt)
    sys.check_shapes()
    return sys
