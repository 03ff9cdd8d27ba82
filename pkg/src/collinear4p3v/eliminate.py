"""Two-stage resultant elimination down to the degree-36 eliminant.

Stage 1 eliminates one folded variable from the camera polynomial against
the mixed polynomial by a Sylvester resultant (fraction-free Bareiss on the
8x8 matrix).  The resultant's content with respect to the remaining folded
variable carries the known factor (s^2+1)^6 times the square of a quartic;
content extraction, exact division and an exact polynomial square root
recover that quartic (S2 or S3) and the deflated bivariate cofactor r.

Stage 2 eliminates the remaining folded variable from the other camera
polynomial against r.  The resulting univariate polynomial in s factors as
the degree-36 eliminant S times a fully known deflation
(s^2+1)^36 s^4 (x13+y13 s)^4 (x14+y14 s)^4 S3^12.  Because that factor is
known pointwise, S is computed by exact evaluation--interpolation: the 18x18
Sylvester determinant is evaluated at small integers s_k (skipping values
that drop a leading coefficient or zero the deflation), divided by the
deflation value, and interpolated.  Verification at extra points -- all
bound+1 of them under full_verify -- turns the interpolation into an exact
identity check with zero remainder.  A fully symbolic route (Bareiss on the
polynomial Sylvester matrix, then exact division) is kept for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpq, mpz

from .constraints import SVAR, TVARS, ReducedSystem
from .errors import DegreeMismatch, NotDivisible, SolverError, ZeroInput
from .normalize import NormalizedProblem
from .poly import (
    MPoly,
    Rat,
    UniPoly,
    content,
    exact_div,
    interpolate_unipoly,
    poly_sqrt,
    sylvester_resultant,
    sylvester_resultant_interp,
)


@dataclass(frozen=True)
class Eliminant:
    """Degree-36 eliminant with the stage-1 quartic cofactors.

    r2 is the deflated stage-1 resultant from eliminating u2t (a polynomial
    in (u3t, s)); r3 the mirror-image one.  All polynomials are
    integer-primitive with positive leading coefficient.
    """

    S: UniPoly
    S2: UniPoly
    S3: UniPoly
    r2: MPoly
    r3: MPoly

    def __post_init__(self):
        if self.S.degree != 36:
            raise DegreeMismatch(f"eliminant degree {self.S.degree} != 36")


def _splus1_pow6(var: str = SVAR) -> UniPoly:
    return UniPoly(var, (1, 0, 1)) ** 6


def _poly_bareiss_det(m: list[list[list]]) -> list:
    """Fraction-free determinant of a matrix whose entries are integer
    coefficient lists (univariate polynomials)."""
    from .poly import _zp_divexact, _zp_mul, _zp_trim

    n = len(m)
    a = [[list(e) for e in row] for row in m]
    sign = 1
    prev: list | None = None
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return []
        piv = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                num = _zp_mul(piv, row_i[j])
                if aik and row_k[j]:
                    sub = _zp_mul(aik, row_k[j])
                    num = _zp_trim(
                        [
                            (num[t] if t < len(num) else mpz(0))
                            - (sub[t] if t < len(sub) else mpz(0))
                            for t in range(max(len(num), len(sub)))
                        ]
                    )
                row_i[j] = _zp_divexact(num, prev, check=False) if prev else num
            row_i[k] = []
        prev = piv
    det = a[n - 1][n - 1]
    if sign < 0:
        det = [-c for c in det]
    return det


def _stage1_resultant_fast(h: MPoly, hmix: MPoly, tvar: str, other: str) -> MPoly:
    """Sylvester resultant eliminating tvar, by s-evaluation: at each integer
    s the 8x8 determinant is taken over integer polynomials in the remaining
    folded variable, then every coefficient is interpolated exactly."""
    h_cols, den_h = _scaled_int_cols(h, tvar)  # per tvar power: int list in s
    dh = len(h_cols) - 1
    ds_h = max(len(c) for c in h_cols) - 1
    # hmix coefficients wrt tvar: dense in (other, s) with integer entries
    q_coeffs = hmix.coeffs_wrt(tvar)
    dq = len(q_coeffs) - 1
    den = mpz(1)
    for c in q_coeffs:
        for v in c.terms.values():
            den = gmpy2.lcm(den, v.denominator)
    q_cols = []  # [tvar power][other power] -> int list in s
    ds_q = 0
    dother = 0
    for c in q_coeffs:
        io = c.vars.index(other)
        isv = c.vars.index(SVAR)
        do = max((e[io] for e in c.terms), default=0)
        ds = max((e[isv] for e in c.terms), default=0)
        dother = max(dother, do)
        ds_q = max(ds_q, ds)
        arr = [[mpz(0)] * (ds + 1) for _ in range(do + 1)]
        for e, v in c.terms.items():
            arr[e[io]][e[isv]] = mpz(v * den)
        q_cols.append([_trimmed(row) for row in arr])
    dbound_s = dq * ds_h + dh * ds_q
    npts = dbound_s + 1
    points: list = []
    samples: list[list] = []  # per point: [other power] -> value
    k = 0
    attempts = 0
    while len(points) < npts:
        k = -k if k > 0 else -k + 1
        attempts += 1
        if attempts > 4 * npts + 100:
            raise SolverError("stage-1 interpolation points exhausted")
        hv = _eval_cols(h_cols, k)
        if len(hv) != dh + 1:
            continue
        qv = []
        for col in q_cols:
            qv.append(_trimmed([_horner_int(row, k) for row in col]))
        if not qv[-1]:
            continue
        # Sylvester matrix over Z[other]
        n = dh + dq
        zero: list = []
        m = [[zero] * n for _ in range(n)]
        for r_ in range(dq):
            for t in range(dh + 1):
                m[r_][r_ + t] = [hv[dh - t]] if hv[dh - t] else []
        for r_ in range(dh):
            for t in range(dq + 1):
                m[dq + r_][r_ + t] = qv[dq - t]
        det = _poly_bareiss_det(m)
        points.append(mpq(k))
        samples.append(det)
    terms: dict = {}
    vars_out = tuple(sorted((SVAR, other)))
    flip = vars_out.index(other) == 0
    # the row scalings multiplied the determinant by den_h^dq * den_q^dh
    unscale = mpq(1, den_h**dq * den**dh)
    max_other = max((len(d) for d in samples), default=0)
    for j in range(max_other):
        vals = [mpq(d[j]) if j < len(d) else mpq(0) for d in samples]
        if not any(vals):
            continue
        coef = interpolate_unipoly(SVAR, list(zip(points, vals)))
        for e, c in enumerate(coef.coeffs):
            if c:
                terms[(j, e) if flip else (e, j)] = c * unscale
    return MPoly(vars_out, terms)


def _trimmed(row: list) -> list:
    while row and not row[-1]:
        row.pop()
    return row


def _horner_int(c: list, k: int):
    acc = mpz(0)
    for coef in reversed(c):
        acc = acc * k + coef
    return acc


def stage1(sys: ReducedSystem, camera: int, route: str = "interp"):
    """Eliminate the camera's folded variable against the mixed polynomial.

    Returns (r, Sk): the deflated resultant cofactor r (free of the
    eliminated variable) and the quartic Sk recovered from the content by
    exact division by (s^2+1)^6 and a polynomial square root.

    route="interp" (default) evaluates over s and interpolates; it produces
    exactly the Bareiss determinant, as the cross-check tests assert, at a
    fraction of the cost.  route="bareiss" runs fraction-free elimination on
    the symbolic Sylvester matrix.
    """
    if camera not in (2, 3):
        raise ValueError("camera must be 2 or 3")
    h = sys.h2 if camera == 2 else sys.h3
    tvar = TVARS[camera]
    other = TVARS[5 - camera]
    if route == "bareiss":
        res = sylvester_resultant(h, sys.hmix, tvar)
    elif route == "interp":
        res = _stage1_resultant_fast(h, sys.hmix, tvar, other)
    else:
        raise ValueError(f"unknown stage-1 route {route!r}")
    if res.is_zero():
        raise ZeroInput("stage-1 resultant vanished identically")
    cont = content(res, other, known_factor=_splus1_pow6())
    core = cont.exact_div(_splus1_pow6())
    sk = poly_sqrt(core)
    if sk.degree != 4:
        raise DegreeMismatch(f"S{camera} degree {sk.degree} != 4")
    cols = res.coeffs_wrt(other)
    rcols = []
    for c in cols:
        rcols.append(c.as_unipoly(SVAR).exact_div(cont))
    terms: dict = {}
    for k, c in enumerate(rcols):
        for e, v in enumerate(c.coeffs):
            if v:
                terms[(e, k) if SVAR < other else (k, e)] = v
    vars_out = tuple(sorted((SVAR, other)))
    r = MPoly(vars_out, terms).primitive()
    return r, sk


def trailing_coefficient_closed_form(k: int, norm: NormalizedProblem) -> Rat:
    """Closed-form product proportional to the constant coefficient of Sk."""
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    x13, y13 = norm.coord(1, 3)
    x14, y14 = norm.coord(1, 4)
    y12 = norm.coord(1, 2)[1]
    yk2 = norm.coord(k, 2)[1]
    xk3, yk3 = norm.coord(k, 3)
    xk4, yk4 = norm.coord(k, 4)
    first = x14 * xk3 * (y12 - y13) * (yk2 - yk4) - x13 * xk4 * (y12 - y14) * (
        yk2 - yk3
    )
    second = x13 * (y12 - y14) * (
        xk4 * xk4 - xk3 * xk4 - yk3 * yk4 + yk4 * yk4
    ) + x14 * (y12 - y13) * (xk3 * xk3 - xk3 * xk4 - yk3 * yk4 + yk3 * yk3)
    return yk2 * yk2 * first * second


def _deflation_ints(
    norm: NormalizedProblem, s3: UniPoly, full: bool, s2: UniPoly | None
):
    """Per-point deflation evaluator D(s_k) for the stage-2 identity."""
    x13, y13 = norm.coord(1, 3)
    x14, y14 = norm.coord(1, 4)
    s3i = s3.int_coeffs()
    s2i = s2.int_coeffs() if s2 is not None else None

    def dev(k: int):
        kq = mpq(k)
        base = (kq * kq + 1) ** (72 if full else 36)
        base *= kq**4
        base *= (x13 + y13 * kq) ** 4
        base *= (x14 + y14 * kq) ** 4
        v3 = sum(c * mpz(k) ** e for e, c in enumerate(s3i))
        base *= mpq(v3) ** 12
        if full:
            v2 = sum(c * mpz(k) ** e for e, c in enumerate(s2i))
            base *= mpq(v2) ** 12
        return base

    return dev


def _int_bareiss_det(m: list[list]) -> "mpz":
    """Fraction-free determinant of a square mpz matrix."""
    n = len(m)
    a = [row[:] for row in m]
    sign = 1
    prev = mpz(1)
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return mpz(0)
        piv = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = gmpy2.divexact(piv * row_i[j] - aik * row_k[j], prev)
            row_i[k] = mpz(0)
        prev = piv
    return a[n - 1][n - 1] * sign


def _sylvester_det_int(pa: list, qa: list) -> "mpz":
    """Determinant of the Sylvester matrix of two integer coefficient lists
    (index = degree, leading nonzero)."""
    dp, dq = len(pa) - 1, len(qa) - 1
    n = dp + dq
    zero = mpz(0)
    m = [[zero] * n for _ in range(n)]
    for r in range(dq):
        for k in range(dp + 1):
            m[r][r + k] = pa[dp - k]
    for r in range(dp):
        for k in range(dq + 1):
            m[dq + r][r + k] = qa[dq - k]
    return _int_bareiss_det(m)


def _scaled_int_cols(p: MPoly, tvar: str):
    """Coefficients of p wrt tvar as integer lists in s, plus a common scale."""
    cols = [c.as_unipoly(SVAR) for c in p.coeffs_wrt(tvar)]
    den = mpz(1)
    for c in cols:
        for coef in c.coeffs:
            den = gmpy2.lcm(den, coef.denominator)
    out = []
    for c in cols:
        out.append([mpz(coef * den) for coef in c.coeffs])
    return out, den


def _eval_cols(cols: list, k: int):
    vals = []
    for c in cols:
        acc = mpz(0)
        for coef in reversed(c):
            acc = acc * k + coef
        vals.append(acc)
    while vals and not vals[-1]:
        vals.pop()
    return vals


def stage2(
    sys: ReducedSystem,
    r: MPoly,
    s3: UniPoly,
    norm: NormalizedProblem,
    route: str = "deflated",
    s2: UniPoly | None = None,
    verify_points: int = 3,
    full_verify: bool = False,
) -> UniPoly:
    """Recover the degree-36 eliminant S by pointwise-deflated interpolation.

    route="deflated" eliminates u3t from (h3, r); route="full" uses the full
    undeflated stage-1 resultant instead (requires s2), reproducing the
    two-resultant composition.  With full_verify=True the identity
    resultant == S * deflation is checked at degree-bound-plus-one points,
    which proves it exactly; otherwise `verify_points` extra points are
    checked.  Raises NotDivisible when verification fails and DegreeMismatch
    when the interpolated quotient does not have degree 36.
    """
    tvar = TVARS[3]
    if route == "deflated":
        second = r
        dev = _deflation_ints(norm, s3, full=False, s2=None)
    elif route == "full":
        if s2 is None:
            raise ValueError("full route needs the s2 quartic")
        second = sylvester_resultant(sys.h2, sys.hmix, TVARS[2])
        dev = _deflation_ints(norm, s3, full=True, s2=s2)
    else:
        raise ValueError(f"unknown stage-2 route {route!r}")

    h_cols, _ = _scaled_int_cols(sys.h3, tvar)
    r_cols, _ = _scaled_int_cols(second, tvar)
    du_h, du_r = len(h_cols) - 1, len(r_cols) - 1
    ds_h = max(len(c) for c in h_cols) - 1
    ds_r = max(len(c) for c in r_cols) - 1
    dbound = du_r * ds_h + du_h * ds_r

    npts = dbound + 1 if full_verify else 37 + max(verify_points, 0)
    points: list[tuple] = []
    k = 0
    attempts = 0
    while len(points) < npts:
        k = -k if k > 0 else -k + 1
        attempts += 1
        if attempts > 4 * npts + 100:
            raise SolverError("could not find enough valid evaluation points")
        hv = _eval_cols(h_cols, k)
        rv = _eval_cols(r_cols, k)
        if len(hv) != du_h + 1 or len(rv) != du_r + 1:
            continue  # a leading coefficient dropped; resultant degree falls
        dk = dev(k)
        if dk == 0:
            continue
        det = _sylvester_det_int(hv, rv)
        points.append((mpq(k), mpq(det) / dk))
    s_poly = interpolate_unipoly(SVAR, points[:37])
    if s_poly.degree != 36:
        raise DegreeMismatch(
            f"deflated stage-2 interpolant has degree {s_poly.degree} != 36"
        )
    for x, v in points[37:]:
        if s_poly(x) != v:
            raise NotDivisible(
                "stage-2 factorization failed verification at extra points"
            )
    return s_poly.primitive()


def stage2_symbolic(
    sys: ReducedSystem,
    r: MPoly,
    s3: UniPoly,
    norm: NormalizedProblem,
    route: str = "deflated",
    s2: UniPoly | None = None,
) -> UniPoly:
    """Fully symbolic stage 2: Bareiss resultant then exact division by the
    deflation polynomial.  Slow; used to cross-check the interpolated route."""
    x13, y13 = norm.coord(1, 3)
    x14, y14 = norm.coord(1, 4)
    lin3 = UniPoly(SVAR, (x13, y13))
    lin4 = UniPoly(SVAR, (x14, y14))
    s4 = UniPoly(SVAR, (0, 0, 0, 0, 1))
    if route == "deflated":
        second = r
        defl = (
            UniPoly(SVAR, (1, 0, 1)) ** 36 * s4 * lin3**4 * lin4**4 * s3**12
        )
    elif route == "full":
        if s2 is None:
            raise ValueError("full route needs the s2 quartic")
        second = sylvester_resultant(sys.h2, sys.hmix, TVARS[2])
        defl = (
            UniPoly(SVAR, (1, 0, 1)) ** 72
            * s4
            * lin3**4
            * lin4**4
            * s2**12
            * s3**12
        )
    else:
        raise ValueError(f"unknown stage-2 route {route!r}")
    res = sylvester_resultant(sys.h3, second, TVARS[3]).as_unipoly(SVAR)
    s_poly = res.exact_div(defl)
    if s_poly.degree != 36:
        raise DegreeMismatch(
            f"symbolic stage-2 quotient has degree {s_poly.degree} != 36"
        )
    return s_poly.primitive()


def extension_check(
    s_root: float, sys: ReducedSystem, s_poly: UniPoly | None = None
) -> bool:
    """Whether a real root of the eliminant extends to a system solution:
    the leading folded-variable coefficients of h2 and h3 must not both
    vanish there (within 1e-10 after max-coefficient scaling).

    If the eliminant is supplied, the precondition |S(s_root)| ~ 0 is
    enforced (ValueError otherwise).
    """
    if s_poly is not None:
        res = abs(s_poly.eval_float(float(s_root)))
        if res > 1e-6:
            raise ValueError(
                f"precondition violated: s={s_root!r} is not a root "
                f"(scaled residual {res:.3e})"
            )
    l2 = sys.leading_coefficient(2)
    l3 = sys.leading_coefficient(3)
    v2 = abs(l2.eval_float(float(s_root)))
    v3 = abs(l3.eval_float(float(s_root)))
    return not (v2 < 1e-10 and v3 < 1e-10)


def build_eliminant(
    sys: ReducedSystem,
    norm: NormalizedProblem,
    stage1_route: str = "interp",
    verify_points: int = 3,
    full_verify: bool = False,
) -> Eliminant:
    """Run both stage-1 eliminations and stage 2; package the results."""
    r2, s2 = stage1(sys, 2, route=stage1_route)
    r3, s3 = stage1(sys, 3, route=stage1_route)
    s_poly = stage2(
        sys,
        r2,
        s3,
        norm,
        route="deflated",
        verify_points=verify_points,
        full_verify=full_verify,
    )
    return Eliminant(S=s_poly, S2=s2, S3=s3, r2=r2, r3=r3)
