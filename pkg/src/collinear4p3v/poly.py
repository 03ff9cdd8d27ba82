"""Exact rational scalar and polynomial arithmetic.

Dense univariate (`UniPoly`) and sparse multivariate (`MPoly`) polynomials
over arbitrary-precision rationals (gmpy2.mpq), plus the operations the
elimination pipeline needs: Sylvester resultants by fraction-free Bareiss
elimination, an evaluation--interpolation resultant used for cross-checking,
content extraction, exact division, polynomial square roots, and real-root
isolation (sign-variation subdivision on exact coefficients, bisection plus
Newton refinement).

Heavy integer-polynomial products and exact divisions go through Kronecker
substitution: coefficients are packed into one big integer so gmpy2's fast
multiplication does the work.  All values are immutable after construction
and every operation is pure, so everything here is safe to share across
threads.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq, mpz

from .errors import NotASquare, NotDivisible, ZeroInput

Rat = mpq

_MPZ0 = mpz(0)
_MPZ1 = mpz(1)


def rat(x) -> Rat:
    """Exact conversion to a rational; floats convert with no rounding."""
    return mpq(x)


# ---------------------------------------------------------------------------
# dense integer-coefficient kernels (lists of mpz, index = degree)


def _zp_trim(c: list) -> list:
    while c and not c[-1]:
        c.pop()
    return c


def _zp_maxbits(c: Sequence) -> int:
    b = 0
    for x in c:
        if x:
            n = x.bit_length()
            if n > b:
                b = n
    return b


def _zp_pack(c: Sequence, width: int) -> "mpz":
    acc = _MPZ0
    for i in range(len(c) - 1, -1, -1):
        acc = (acc << width) + c[i]
    return acc


def _zp_unpack(n, width: int, nslots: int) -> list:
    full = _MPZ1 << width
    half = full >> 1
    mask = full - 1
    out = []
    for _ in range(nslots):
        d = n & mask
        n >>= width
        if d >= half:
            d -= full
            n += 1
        out.append(d)
    if n:
        raise ArithmeticError("kronecker unpack overflow; width too small")
    return _zp_trim(out)


def _zp_mul(a: Sequence, b: Sequence) -> list:
    """Exact product of integer coefficient lists (Kronecker packed)."""
    if not a or not b:
        return []
    if len(a) * len(b) <= 64:
        out = [_MPZ0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return _zp_trim(out)
    width = _zp_maxbits(a) + _zp_maxbits(b) + min(len(a), len(b)).bit_length() + 2
    prod = _zp_pack(a, width) * _zp_pack(b, width)
    return _zp_unpack(prod, width, len(a) + len(b) - 1)


def _zp_divexact(a: Sequence, b: Sequence, check: bool = True) -> list:
    """Quotient a/b in Z[x]; NotDivisible when the division is inexact.

    check=False skips the re-multiplication verification; callers use it only
    where divisibility is guaranteed (fraction-free elimination steps).
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = _zp_trim(list(a))
    if not a:
        return []
    dq = len(a) - len(b)
    if dq < 0:
        raise NotDivisible("degree of dividend below divisor")
    # Mignotte-style bound on the quotient coefficients
    width = _zp_maxbits(a) + dq + len(a).bit_length() + 8
    wb = _zp_maxbits(b) + 2
    if wb > width:
        width = wb
    q, r = gmpy2.f_divmod(_zp_pack(a, width), _zp_pack(list(b), width))
    if r:
        raise NotDivisible("inexact polynomial division")
    try:
        qc = _zp_unpack(q, width, dq + 1)
    except ArithmeticError as exc:
        raise NotDivisible("inexact polynomial division") from exc
    if check and _zp_mul(qc, list(b)) != a:
        raise NotDivisible("inexact polynomial division")
    return qc


def _zp_content(c: Sequence):
    g = _MPZ0
    for x in c:
        if x:
            g = gmpy2.gcd(g, x)
            if g == 1:
                return _MPZ1
    return g


def _zp_primitive(c: list) -> list:
    """Integer content divided out, leading coefficient made positive."""
    c = _zp_trim(c)
    if not c:
        return c
    g = _zp_content(c)
    if c[-1] < 0:
        g = -g
    if g != 1:
        c = [x // g for x in c]
    return c


def _zp_deriv(c: Sequence) -> list:
    return _zp_trim([k * c[k] for k in range(1, len(c))])


def _zp_prem(f: list, g: list) -> list:
    """Pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g."""
    dg = len(g) - 1
    lc = g[-1]
    r = list(f)
    for k in range(len(f) - len(g), -1, -1):
        if len(r) - 1 == dg + k:
            top = r[-1]
            r = [lc * x for x in r[:-1]]
            for i in range(dg):
                r[k + i] -= top * g[i]
            _zp_trim(r)
        else:
            r = [lc * x for x in r]
    return r


def _zp_gcd(a: Sequence, b: Sequence) -> list:
    """GCD in Z[x] by the primitive PRS, returned integer-primitive."""
    f = _zp_primitive(list(a))
    g = _zp_primitive(list(b))
    if not f:
        return g
    if not g:
        return f
    if len(f) < len(g):
        f, g = g, f
    while True:
        r = _zp_prem(f, g)
        if not r:
            return _zp_primitive(g)
        if len(r) == 1:
            return [_MPZ1]
        f, g = g, _zp_primitive(r)


def _zp_eval_scaled(c: Sequence, num, den):
    """p(num/den) * den**deg(p), exactly."""
    if not c:
        return _MPZ0
    acc = mpz(c[-1])
    dpow = _MPZ1
    for i in range(len(c) - 2, -1, -1):
        dpow *= den
        acc = acc * num + c[i] * dpow
    return acc


def _zp_sign_variations(c: Sequence) -> int:
    v = 0
    last = 0
    for x in c:
        s = 1 if x > 0 else (-1 if x < 0 else 0)
        if s and last and s != last:
            v += 1
        if s:
            last = s
    return v


def _zp_taylor_shift1(c: Sequence) -> list:
    """Coefficients of p(x + 1)."""
    out = list(c)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += out[j + 1]
    return out


def _primitive_with_content(coeffs: Sequence) -> tuple[list, Rat]:
    """Split into (integer-primitive list, rational content); p = content * prim."""
    den = _MPZ1
    for c in coeffs:
        den = gmpy2.lcm(den, c.denominator)
    ints = _zp_trim([mpz(c * den) for c in coeffs])
    if not ints:
        return [], mpq(0)
    g = _zp_content(ints)
    if ints[-1] < 0:
        g = -g
    return [x // g for x in ints], mpq(g, den)


# ---------------------------------------------------------------------------
# univariate polynomials over mpq


class UniPoly:
    """Dense univariate polynomial; coeffs[k] is the degree-k coefficient.

    Trailing zeros are trimmed, so the leading stored coefficient is nonzero
    and degree == len(coeffs) - 1 (the zero polynomial has degree -1).
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, var: str, coeffs: Iterable):
        cs = [mpq(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.var = var
        self.coeffs = tuple(cs)

    @staticmethod
    def zero(var: str) -> "UniPoly":
        return UniPoly(var, ())

    @staticmethod
    def const(var: str, c) -> "UniPoly":
        return UniPoly(var, (mpq(c),))

    @staticmethod
    def x(var: str) -> "UniPoly":
        return UniPoly(var, (0, 1))

    @staticmethod
    def from_roots(var: str, roots: Iterable) -> "UniPoly":
        p = UniPoly.const(var, 1)
        for r in roots:
            p = p * UniPoly(var, (-mpq(r), 1))
        return p

    # -- basics ------------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs and (
            self.var == other.var or not self.coeffs
        )

    def __hash__(self):
        return hash((self.var, self.coeffs))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            if k == 0:
                parts.append(f"{c}")
            else:
                xs = self.var if k == 1 else f"{self.var}^{k}"
                parts.append(f"{c}*{xs}")
        return " + ".join(parts)

    def lc(self) -> Rat:
        return self.coeffs[-1] if self.coeffs else mpq(0)

    def __getitem__(self, k: int) -> Rat:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return mpq(0)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly.const(self.var, other)

    def __add__(self, other) -> "UniPoly":
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return UniPoly(self.var or o.var, [self[k] + o[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "UniPoly":
        return UniPoly(self.var, [-c for c in self.coeffs])

    def __sub__(self, other) -> "UniPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "UniPoly":
        return (-self) + other

    def __mul__(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            if not self.coeffs or not other.coeffs:
                return UniPoly.zero(self.var or other.var)
            a, ca = _primitive_with_content(self.coeffs)
            b, cb = _primitive_with_content(other.coeffs)
            scale = ca * cb
            return UniPoly(self.var or other.var,
                           [c * scale for c in _zp_mul(a, b)])
        c = mpq(other)
        return UniPoly(self.var, [x * c for x in self.coeffs])

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "UniPoly":
        out = UniPoly.const(self.var, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q: list = [mpq(0)] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        db = other.degree
        lb = other.lc()
        while r and len(r) - 1 >= db:
            k = len(r) - 1 - db
            t = r[-1] / lb
            q[k] = t
            for i in range(db + 1):
                r[k + i] -= t * other.coeffs[i]
            while r and not r[-1]:
                r.pop()
        return UniPoly(self.var, q), UniPoly(self.var, r)

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        """Exact quotient over the rationals; NotDivisible otherwise.

        Gauss's lemma reduces the check to integer-primitive parts, so the
        division itself runs on integers.
        """
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return UniPoly.zero(self.var)
        a, ca = _primitive_with_content(self.coeffs)
        b, cb = _primitive_with_content(other.coeffs)
        qc = _zp_divexact(a, b)
        scale = ca / cb
        return UniPoly(self.var, [c * scale for c in qc])

    def __truediv__(self, other):
        if isinstance(other, UniPoly):
            return self.exact_div(other)
        c = mpq(other)
        return UniPoly(self.var, [x / c for x in self.coeffs])

    def derivative(self) -> "UniPoly":
        return UniPoly(
            self.var, [k * self.coeffs[k] for k in range(1, len(self.coeffs))]
        )

    def __call__(self, x):
        if isinstance(x, float):
            return self.eval_float(x)
        x = mpq(x)
        acc = mpq(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        """Evaluate at a float after max-|coeff| scaling (overflow-safe,
        result is scaled by 1/max|coeff|)."""
        acc = 0.0
        for c in reversed(self.float_coeffs()):
            acc = acc * x + c
        return acc

    def float_coeffs(self) -> list[float]:
        """Coefficients divided by max |coeff| and converted to float."""
        if not self.coeffs:
            return []
        m = max(abs(c) for c in self.coeffs)
        return [float(c / m) for c in self.coeffs]

    def primitive(self) -> "UniPoly":
        """Integer-primitive associate with positive leading coefficient."""
        ints, _ = _primitive_with_content(self.coeffs)
        return UniPoly(self.var, ints)

    def int_coeffs(self) -> list:
        """Coefficient list (mpz) of the integer-primitive associate."""
        ints, _ = _primitive_with_content(self.coeffs)
        return ints

    def shift_mul_x(self, k: int) -> "UniPoly":
        return UniPoly(self.var, (mpq(0),) * k + self.coeffs)


def unipoly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """GCD, integer-primitive with positive leading coefficient."""
    return UniPoly(a.var or b.var, _zp_gcd(a.int_coeffs(), b.int_coeffs()))


def interpolate_unipoly(var: str, points: Sequence[tuple]) -> UniPoly:
    """Newton interpolation through exact rational (x, y) pairs."""
    xs = [mpq(x) for x, _ in points]
    coefs = [mpq(y) for _, y in points]
    n = len(xs)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coefs[i] = (coefs[i] - coefs[i - 1]) / (xs[i] - xs[i - j])
    poly = UniPoly.const(var, coefs[-1])
    for i in range(n - 2, -1, -1):
        poly = poly * UniPoly(var, (-xs[i], 1)) + coefs[i]
    return poly


# ---------------------------------------------------------------------------
# sparse multivariate polynomials over mpq


class MPoly:
    """Sparse multivariate polynomial: exponent tuple -> nonzero mpq."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: dict):
        self.vars = tuple(vars)
        self.terms = {e: c for e, c in terms.items() if c}

    @staticmethod
    def zero(vars: Sequence[str]) -> "MPoly":
        return MPoly(vars, {})

    @staticmethod
    def const(vars: Sequence[str], c) -> "MPoly":
        c = mpq(c)
        if not c:
            return MPoly.zero(vars)
        return MPoly(vars, {(0,) * len(tuple(vars)): c})

    @staticmethod
    def var(vars: Sequence[str], name: str) -> "MPoly":
        vs = tuple(vars)
        e = [0] * len(vs)
        e[vs.index(name)] = 1
        return MPoly(vs, {tuple(e): mpq(1)})

    @staticmethod
    def from_unipoly(p: UniPoly, vars: Sequence[str] | None = None) -> "MPoly":
        vs = tuple(vars) if vars is not None else (p.var,)
        i = vs.index(p.var)
        terms = {}
        for k, c in enumerate(p.coeffs):
            if c:
                e = [0] * len(vs)
                e[i] = k
                terms[tuple(e)] = c
        return MPoly(vs, terms)

    # -- basics ----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        a, b = _aligned(self, other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.vars, tuple(sorted(self.terms.items()))))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mon = "*".join(
                f"{v}^{k}" if k > 1 else v for v, k in zip(self.vars, e) if k
            )
            parts.append(f"{c}*{mon}" if mon else f"{c}")
        return " + ".join(parts)

    def degree(self, name: str) -> int:
        if not self.terms:
            return -1
        if name not in self.vars:
            return 0
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degrees(self) -> tuple[int, ...]:
        if not self.terms:
            return (0,) * len(self.vars)
        return tuple(max(e[i] for e in self.terms) for i in range(len(self.vars)))

    def max_abs_coeff(self) -> Rat:
        return max((abs(c) for c in self.terms.values()), default=mpq(0))

    # -- arithmetic ---------------------------------------------------------------

    def __add__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            other = MPoly.const(self.vars, other)
        a, b = _aligned(self, other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return MPoly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            other = MPoly.const(self.vars, other)
        return self + (-other)

    def __rsub__(self, other) -> "MPoly":
        return (-self) + other

    def __mul__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            c = mpq(other)
            if not c:
                return MPoly.zero(self.vars)
            return MPoly(self.vars, {e: v * c for e, v in self.terms.items()})
        return mpoly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MPoly":
        out = MPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # -- structure -------------------------------------------------------------

    def coeffs_wrt(self, name: str) -> list["MPoly"]:
        """Coefficients as polynomials in the remaining variables (index = power)."""
        i = self.vars.index(name)
        rest = self.vars[:i] + self.vars[i + 1 :]
        d = max(self.degree(name), 0)
        out: list[dict] = [dict() for _ in range(d + 1)]
        for e, c in self.terms.items():
            out[e[i]][e[:i] + e[i + 1 :]] = c
        return [MPoly(rest, t) for t in out]

    def eval_partial(self, name: str, value) -> "MPoly":
        """Substitute an exact rational for one variable."""
        value = mpq(value)
        i = self.vars.index(name)
        rest = self.vars[:i] + self.vars[i + 1 :]
        terms: dict = {}
        powers = {0: mpq(1)}
        for e, c in self.terms.items():
            k = e[i]
            p = powers.get(k)
            if p is None:
                p = powers[k] = value**k
            ne = e[:i] + e[i + 1 :]
            s = terms.get(ne, mpq(0)) + c * p
            if s:
                terms[ne] = s
            elif ne in terms:
                del terms[ne]
        return MPoly(rest, terms)

    def eval(self, point: dict) -> Rat:
        acc = mpq(0)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(self.vars, e):
                if k:
                    t = t * mpq(point[v]) ** k
            acc += t
        return acc

    def eval_float_scaled(self, point: dict) -> float:
        """Value of p / max|coeff| at a float point (scale-free residuals)."""
        if not self.terms:
            return 0.0
        m = self.max_abs_coeff()
        acc = 0.0
        for e, c in self.terms.items():
            t = float(c / m)
            for v, k in zip(self.vars, e):
                if k:
                    t *= point[v] ** k
            acc += t
        return acc

    def as_unipoly(self, name: str | None = None) -> UniPoly:
        """Convert when at most one variable occurs with positive degree."""
        live = [v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms)]
        if len(live) > 1:
            raise ValueError(f"not univariate: {live}")
        v = name or (live[0] if live else (self.vars[0] if self.vars else "x"))
        if v not in self.vars:
            if live:
                raise ValueError(f"variable {v} not in {self.vars}")
            return UniPoly(v, [self.terms.get((), mpq(0))] if self.terms else [])
        i = self.vars.index(v)
        coeffs = [mpq(0)] * (max(self.degree(v), 0) + 1)
        for e, c in self.terms.items():
            coeffs[e[i]] = c
        return UniPoly(v, coeffs if self.terms else [])

    def primitive(self) -> "MPoly":
        """Integer-primitive associate, positive leading (lex) coefficient."""
        if not self.terms:
            return self
        den = _MPZ1
        for c in self.terms.values():
            den = gmpy2.lcm(den, c.denominator)
        g = _MPZ0
        for c in self.terms.values():
            g = gmpy2.gcd(g, mpz(c * den))
            if g == 1:
                break
        if self.terms[max(self.terms)] < 0:
            g = -g
        scale = mpq(den, g)
        return MPoly(self.vars, {e: c * scale for e, c in self.terms.items()})


def _relabel(p: MPoly, vs: tuple[str, ...]) -> MPoly:
    if p.vars == vs:
        return p
    dropped = [i for i, v in enumerate(p.vars) if v not in vs]
    for e in p.terms:
        for i in dropped:
            if e[i]:
                raise ValueError(f"cannot drop live variable {p.vars[i]}")
    idx = [p.vars.index(v) if v in p.vars else None for v in vs]
    terms = {}
    for e, c in p.terms.items():
        terms[tuple(e[i] if i is not None else 0 for i in idx)] = c
    return MPoly(vs, terms)


def _aligned(a: MPoly, b: MPoly) -> tuple[MPoly, MPoly]:
    """Bring two polynomials onto a shared (name-sorted) variable tuple."""
    if a.vars == b.vars:
        return a, b
    vs = tuple(sorted(set(a.vars) | set(b.vars)))
    return _relabel(a, vs), _relabel(b, vs)


def mpoly_mul(p: MPoly, q: MPoly) -> MPoly:
    """Exact product; variable universes are aligned by name."""
    p, q = _aligned(p, q)
    if not p.terms or not q.terms:
        return MPoly.zero(p.vars)
    if len(p.terms) * len(q.terms) <= 256:
        terms: dict = {}
        for e1, c1 in p.terms.items():
            for e2, c2 in q.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, mpq(0)) + c1 * c2
                if s:
                    terms[e] = s
                elif e in terms:
                    del terms[e]
        return MPoly(p.vars, terms)
    return _mpoly_mul_packed(p, q)


def _mpoly_mul_packed(p: MPoly, q: MPoly) -> MPoly:
    """Kronecker product: pack exponents onto a degree-bound box."""
    nv = len(p.vars)
    dp, dq = p.degrees(), q.degrees()
    bounds = [dp[i] + dq[i] + 1 for i in range(nv)]
    strides = [1] * nv
    for i in range(nv - 2, -1, -1):
        strides[i] = strides[i + 1] * bounds[i + 1]
    nslots = strides[0] * bounds[0] if nv else 1

    def pack(m: MPoly) -> tuple[dict, "mpz"]:
        den = _MPZ1
        for c in m.terms.values():
            den = gmpy2.lcm(den, c.denominator)
        return (
            {
                sum(e[i] * strides[i] for i in range(nv)): mpz(c * den)
                for e, c in m.terms.items()
            },
            den,
        )

    sp, denp = pack(p)
    sq, denq = pack(q)
    width = (
        max(x.bit_length() for x in sp.values())
        + max(x.bit_length() for x in sq.values())
        + min(len(sp), len(sq)).bit_length()
        + 2
    )
    np_, nq_ = _MPZ0, _MPZ0
    for s, v in sp.items():
        np_ += v << (s * width)
    for s, v in sq.items():
        nq_ += v << (s * width)
    flat = _zp_unpack(np_ * nq_, width, nslots)
    scale = mpq(1, denp * denq)
    terms = {}
    for slot, v in enumerate(flat):
        if not v:
            continue
        e = []
        rem = slot
        for i in range(nv):
            e.append(rem // strides[i])
            rem %= strides[i]
        terms[tuple(e)] = v * scale
    return MPoly(p.vars, terms)


def exact_div(p: MPoly, q: MPoly, var: str | None = None) -> MPoly:
    """Exact multivariate quotient p/q; NotDivisible on nonzero remainder.

    A Kronecker-packed integer division (verified by re-multiplication)
    handles the common case; inputs it cannot certify fall back to
    single-divisor term division with respect to a lex order (`var` moved to
    the front when given).  Exact quotients are unique, so the paths agree.
    """
    p, q = _aligned(p, q)
    if q.is_zero():
        raise ZeroInput("division by the zero polynomial")
    if p.is_zero():
        return MPoly.zero(p.vars)
    fast = _exact_div_packed(p, q)
    if fast is not None:
        return fast
    return _exact_div_terms(p, q, var)


def _exact_div_packed(p: MPoly, q: MPoly) -> MPoly | None:
    """Attempt the division by packing onto p's degree box.

    Returns the verified quotient, raises NotDivisible when the failure is
    certain (degree box or remainder), or returns None when the packed
    attempt is inconclusive (width too small for the quotient).
    """
    nv = len(p.vars)
    dp, dq = p.degrees(), q.degrees()
    if any(dq[i] > dp[i] for i in range(nv)):
        raise NotDivisible("divisor degree exceeds dividend in some variable")
    bounds = [dp[i] + 1 for i in range(nv)]
    strides = [1] * nv
    for i in range(nv - 2, -1, -1):
        strides[i] = strides[i + 1] * bounds[i + 1]
    nslots = strides[0] * bounds[0] if nv else 1

    # Gauss's lemma: the integer form of p is divisible by the primitive
    # part of q in Z[x...] exactly when q divides p over the rationals
    den_p = _MPZ1
    for c in p.terms.values():
        den_p = gmpy2.lcm(den_p, c.denominator)
    den_q = _MPZ1
    for c in q.terms.values():
        den_q = gmpy2.lcm(den_q, c.denominator)
    gq = _MPZ0
    for c in q.terms.values():
        gq = gmpy2.gcd(gq, mpz(c * den_q))
        if gq == 1:
            break
    cq = mpq(gq, den_q)  # q = cq * primitive(q)

    sp = {
        sum(e[i] * strides[i] for i in range(nv)): mpz(c * den_p)
        for e, c in p.terms.items()
    }
    sq = {
        sum(e[i] * strides[i] for i in range(nv)): mpz(c * den_q) // gq
        for e, c in q.terms.items()
    }
    bits_p = max(x.bit_length() for x in sp.values())
    bits_q = max(x.bit_length() for x in sq.values())
    width = bits_p + bits_q + nslots.bit_length() + 16
    np_, nq_ = _MPZ0, _MPZ0
    for s, v in sp.items():
        np_ += v << (s * width)
    for s, v in sq.items():
        nq_ += v << (s * width)
    quot, rem = gmpy2.f_divmod(np_, nq_)
    if rem:
        raise NotDivisible("inexact multivariate division")
    try:
        flat = _zp_unpack(quot, width, nslots)
    except ArithmeticError:
        return None  # quotient coefficients overflowed the width; fall back
    scale = 1 / (den_p * cq)
    terms = {}
    for slot, v in enumerate(flat):
        if not v:
            continue
        e = []
        rest = slot
        for i in range(nv):
            e.append(rest // strides[i])
            rest %= strides[i]
        if any(e[i] + dq[i] > dp[i] for i in range(nv)):
            return None
        terms[tuple(e)] = v * scale
    cand = MPoly(p.vars, terms)
    if mpoly_mul(cand, q) == p:
        return cand
    return None


def _exact_div_terms(p: MPoly, q: MPoly, var: str | None = None) -> MPoly:
    order = list(range(len(p.vars)))
    if var is not None and var in p.vars:
        i = p.vars.index(var)
        order.remove(i)
        order.insert(0, i)

    def key(e):
        return tuple(e[i] for i in order)

    qlead = max(q.terms, key=key)
    qlc = q.terms[qlead]
    rem = dict(p.terms)
    quot: dict = {}
    while rem:
        e = max(rem, key=key)
        c = rem[e]
        de = tuple(a - b for a, b in zip(e, qlead))
        if any(x < 0 for x in de):
            raise NotDivisible("inexact multivariate division")
        f = c / qlc
        quot[de] = quot.get(de, mpq(0)) + f
        for eq, cq in q.terms.items():
            et = tuple(a + b for a, b in zip(de, eq))
            s = rem.get(et, mpq(0)) - f * cq
            if s:
                rem[et] = s
            elif et in rem:
                del rem[et]
    return MPoly(p.vars, quot)


# ---------------------------------------------------------------------------
# Sylvester resultants


def sylvester_matrix(p: MPoly, q: MPoly, var: str) -> list[list[MPoly]]:
    p, q = _aligned(p, q)
    if p.is_zero() or q.is_zero():
        raise ZeroInput("Sylvester matrix of the zero polynomial")
    pa = p.coeffs_wrt(var)
    qa = q.coeffs_wrt(var)
    dp, dq = len(pa) - 1, len(qa) - 1
    n = dp + dq
    zero = MPoly.zero(pa[0].vars)
    m = [[zero] * n for _ in range(n)]
    for r in range(dq):
        for k in range(dp + 1):
            m[r][r + k] = pa[dp - k]
    for r in range(dp):
        for k in range(dq + 1):
            m[dq + r][r + k] = qa[dq - k]
    return m


def bareiss_determinant(m: list[list[MPoly]]) -> MPoly:
    """Fraction-free determinant of a matrix of polynomials."""
    n = len(m)
    if n == 0:
        raise ZeroInput("empty matrix")
    a = [row[:] for row in m]
    zero = MPoly.zero(a[0][0].vars)
    sign = 1
    prev: MPoly | None = None
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return zero
        piv = a[k][k]
        for i in range(k + 1, n):
            row_i, row_k = a[i], a[k]
            aik = row_i[k]
            if aik.is_zero():
                if prev is not None:
                    for j in range(k + 1, n):
                        row_i[j] = exact_div(piv * row_i[j], prev)
                else:
                    for j in range(k + 1, n):
                        row_i[j] = piv * row_i[j]
                continue
            for j in range(k + 1, n):
                num = piv * row_i[j] - aik * row_k[j]
                row_i[j] = exact_div(num, prev) if prev is not None else num
            row_i[k] = zero
        prev = piv
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def _drop_var(p: MPoly, var: str) -> MPoly:
    if var not in p.vars:
        return p
    return _relabel(p, tuple(v for v in p.vars if v != var))


def sylvester_resultant(p: MPoly, q: MPoly, var: str) -> MPoly:
    """Resultant eliminating `var` (Sylvester-matrix determinant via Bareiss).

    The result contains no `var` and lies in the first elimination ideal of
    the pair, so it vanishes at every common solution of p = q = 0.
    """
    p, q = _aligned(p, q)
    if p.is_zero() or q.is_zero():
        raise ZeroInput("resultant of the zero polynomial")
    dp, dq = p.degree(var), q.degree(var)
    if dp <= 0 and dq <= 0:
        return MPoly.const(tuple(v for v in p.vars if v != var), 1)
    if dp == 0:
        return _drop_var(p, var) ** dq
    if dq == 0:
        return _drop_var(q, var) ** dp
    return _drop_var(bareiss_determinant(sylvester_matrix(p, q, var)), var)


def sylvester_resultant_interp(p: MPoly, q: MPoly, var: str, at_var: str) -> MPoly:
    """Resultant by evaluation--interpolation over `at_var`.

    Specializes `at_var` at small integers (skipping values where either
    leading coefficient in `var` drops), computes each specialized resultant,
    and interpolates exactly.  Agrees bit for bit with sylvester_resultant;
    kept as an independent cross-check path.
    """
    p, q = _aligned(p, q)
    dp, dq = p.degree(var), q.degree(var)
    if dp <= 0 or dq <= 0:
        return sylvester_resultant(p, q, var)
    dbound = dp * max(q.degree(at_var), 0) + dq * max(p.degree(at_var), 0)
    lc_p = p.coeffs_wrt(var)[dp]
    lc_q = q.coeffs_wrt(var)[dq]
    npts = dbound + 1
    points: list = []
    samples: list[MPoly] = []
    t = 0
    while len(points) < npts:
        t = -t if t > 0 else -t + 1  # 1, -1, 2, -2, ...
        tv = mpq(t)
        if lc_p.eval_partial(at_var, tv).is_zero():
            continue
        if lc_q.eval_partial(at_var, tv).is_zero():
            continue
        r = sylvester_resultant(
            p.eval_partial(at_var, tv), q.eval_partial(at_var, tv), var
        )
        points.append(tv)
        samples.append(r)
    rest_vars = samples[0].vars
    out_vars = tuple(sorted(set(rest_vars) | {at_var}))
    ia = out_vars.index(at_var)
    keys = sorted({e for r in samples for e in r.terms})
    terms: dict = {}
    for e in keys:
        vals = [r.terms.get(e, mpq(0)) for r in samples]
        coef = interpolate_unipoly(at_var, list(zip(points, vals)))
        for k, c in enumerate(coef.coeffs):
            if c:
                terms[e[:ia] + (k,) + e[ia:]] = c
    return MPoly(out_vars, terms)


# ---------------------------------------------------------------------------
# content and square root


def content(p: MPoly, var: str, known_factor: UniPoly | None = None) -> UniPoly:
    """GCD of the coefficients of p viewed as a polynomial in `var`.

    The coefficients must involve at most one other variable.  The result is
    integer-primitive with positive leading coefficient.  `known_factor` is
    an optimization hint: a polynomial known to divide the content; it is
    divided out before the GCD chain and multiplied back afterwards
    (NotDivisible if it does not in fact divide every coefficient).
    """
    unis = [c.as_unipoly() for c in p.coeffs_wrt(var) if not c.is_zero()]
    if not unis:
        return UniPoly.zero("x")
    ovar = next((u.var for u in unis if u.degree > 0), unis[0].var)
    kf = known_factor.int_coeffs() if known_factor is not None else None
    ints = []
    for u in unis:
        ic = u.int_coeffs()
        if kf is not None:
            ic = _zp_divexact(ic, kf)
        ints.append(ic)
    g = ints[0]
    for ic in ints[1:]:
        if len(g) == 1:
            break
        g = _zp_gcd(g, ic)
    g = _zp_primitive(g)
    if kf is not None:
        g = _zp_primitive(_zp_mul(g, kf))
    return UniPoly(ovar, g)


def poly_sqrt(p: UniPoly) -> UniPoly:
    """q with q**2 == c*p for a positive rational scalar c; else NotASquare.

    q comes back integer-primitive with positive leading coefficient, and
    exactness is verified by re-squaring.
    """
    if p.is_zero():
        raise ZeroInput("square root of the zero polynomial")
    if p.degree % 2:
        raise NotASquare("odd degree")
    if p.lc() < 0:
        raise NotASquare("negative leading coefficient")
    m = p.degree // 2
    pm = UniPoly(p.var, [c / p.lc() for c in p.coeffs])
    q = [mpq(0)] * (m + 1)
    q[m] = mpq(1)
    for k in range(m - 1, -1, -1):
        acc = mpq(0)
        for i in range(k + 1, m):
            j = m + k - i
            if k < j <= m:
                acc += q[i] * q[j]
        q[k] = (pm[m + k] - acc) / 2
    qp = UniPoly(p.var, q)
    if not (qp * qp == pm):
        raise NotASquare("verification by re-squaring failed")
    return qp.primitive()


# ---------------------------------------------------------------------------
# real roots


def sturm_chain(p: UniPoly) -> list[UniPoly]:
    """Sturm sequence of p (classical rational remainders)."""
    chain = [p, p.derivative()]
    while not chain[-1].is_zero():
        _, r = chain[-2].divmod(chain[-1])
        chain.append(-r)
    chain.pop()
    return chain


def sturm_count(p: UniPoly, a, b) -> int:
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    chain = sturm_chain(p)

    def variations(x) -> int:
        v, last = 0, 0
        for f in chain:
            y = f(mpq(x))
            s = 1 if y > 0 else (-1 if y < 0 else 0)
            if s and last and s != last:
                v += 1
            if s:
                last = s
        return v

    return variations(mpq(a)) - variations(mpq(b))


_SQFREE_PRIMES = (2305843009213693951, 4611686018427387847, 9223372036854775783)


def _modular_coprime(a: Sequence, b: Sequence) -> bool:
    """True only if gcd(a, b) is certainly constant (checked modulo a prime).

    A unit gcd in GF(p)[x] for any prime that preserves both leading
    coefficients certifies coprimality over the rationals; a nontrivial
    modular gcd proves nothing, so False means "unknown"."""
    for p in _SQFREE_PRIMES:
        if a[-1] % p == 0 or b[-1] % p == 0:
            continue
        f = [int(x % p) for x in a]
        g = [int(x % p) for x in b]
        while g and len(g) > 1:
            inv = pow(g[-1], p - 2, p)
            dg = len(g) - 1
            while len(f) - 1 >= dg and f:
                k = len(f) - 1 - dg
                t = f[-1] * inv % p
                f = [
                    (f[i] - t * g[i - k]) % p if k <= i < k + dg else f[i]
                    for i in range(len(f) - 1)
                ]
                while f and not f[-1]:
                    f.pop()
            f, g = g, f
        return bool(g) and len(g) == 1
    return False


def _squarefree_decompose(c: list) -> list[tuple[list, int]]:
    """Yun's algorithm on an integer-primitive coefficient list."""
    d = _zp_deriv(c)
    if _modular_coprime(c, d):
        return [(c, 1)]
    g = _zp_gcd(c, d)
    if len(g) == 1:
        return [(c, 1)]
    out = []
    w = _zp_divexact(c, g, check=False)
    y = _zp_divexact(d, g, check=False)
    i = 1
    while len(w) > 1:
        wp = _zp_deriv(w)
        z = [y[k] - (wp[k] if k < len(wp) else _MPZ0) for k in range(len(y))]
        z = _zp_trim(z)
        if not z:
            out.append((w, i))
            break
        g = _zp_gcd(w, z)
        if len(g) > 1:
            out.append((g, i))
        w = _zp_divexact(w, g, check=False)
        y = _zp_divexact(z, g, check=False)
        i += 1
    return [(f, m) for f, m in out if len(f) > 1] or [(_zp_primitive(list(c)), 1)]


def _isolate_positive(c: list) -> list[tuple]:
    """Isolate the positive real roots of a squarefree integer polynomial
    with nonzero constant term.

    Returns ('exact', root) and ('open', lo, hi) items with exact rational
    endpoints.
    """
    n = len(c) - 1
    if n <= 0:
        return []
    lead_bits = c[-1].bit_length()
    excess = max((x.bit_length() - lead_bits for x in c[:-1] if x), default=0)
    bexp = max(excess + 2, 1)
    # f(t) = c(2^bexp * t): positive roots of c now lie in t in (0, 1)
    f = [c[i] << (bexp * i) for i in range(n + 1)]
    out: list[tuple] = []
    stack = [(_MPZ0, 0, f)]  # (offset numerator, depth, polynomial on (0,1))
    while stack:
        off, depth, g = stack.pop()
        v = _zp_sign_variations(_zp_taylor_shift1(list(reversed(g))))
        if v == 0:
            continue
        scale = mpq(_MPZ1 << bexp, _MPZ1 << depth)
        if v == 1:
            out.append(("open", off * scale, (off + 1) * scale))
            continue
        if depth > 512:
            raise ArithmeticError("root isolation failed to converge")
        gl = [g[i] << (len(g) - 1 - i) for i in range(len(g))]  # g(t/2)*2^n
        gr = _zp_taylor_shift1(gl)  # gl(t+1)
        if not gr[0]:
            out.append(("exact", (2 * off + 1) * scale / 2))
            gr = gr[1:]
        stack.append((2 * off, depth + 1, _zp_trim(gl)))
        stack.append((2 * off + 1, depth + 1, _zp_trim(gr)))
    return out


def _sign_at(c: list, x: Rat) -> int:
    v = _zp_eval_scaled(c, mpz(x.numerator), mpz(x.denominator))
    return 1 if v > 0 else (-1 if v < 0 else 0)


def _rel_residual(c: list, x: Rat) -> float:
    """|p(x)| over the sum of absolute term magnitudes at x."""
    num, den = mpz(x.numerator), mpz(x.denominator)
    fv = _zp_eval_scaled(c, num, den)
    mag = abs(mpz(c[-1]))
    dpow = _MPZ1
    anum = abs(num)
    for i in range(len(c) - 2, -1, -1):
        dpow *= den
        mag = mag * anum + abs(c[i]) * dpow
    if not mag:
        return 0.0
    return float(mpq(abs(fv), mag))


def _polish_root(c: list, lo: Rat, hi: Rat, tol: float) -> float:
    dcoef = _zp_deriv(c)
    width = mpq(1, _MPZ1 << 44)
    slo = _sign_at(c, lo)
    for _ in range(6):
        # bisection on exact signs
        while hi - lo > width:
            mid = (lo + hi) / 2
            sm = _sign_at(c, mid)
            if sm == 0:
                return float(mid)
            if sm == slo:
                lo = mid
            else:
                hi = mid
        x = (lo + hi) / 2
        for _ in range(2):
            num, den = mpz(x.numerator), mpz(x.denominator)
            fv = _zp_eval_scaled(c, num, den)
            dv = _zp_eval_scaled(dcoef, num, den)
            if not dv:
                break
            # p(x) = fv/den^d, p'(x) = dv/den^(d-1) => step = fv/(dv*den)
            x = x - mpq(fv, dv * den)
            x = mpq(rat(float(x)))  # keep the representation small
        if _rel_residual(c, x) <= tol:
            return float(x)
        width = width / (_MPZ1 << 16)
    return float(x)


def real_roots(p: UniPoly, tol: float = 1e-12, with_multiplicity: bool = False) -> list:
    """All real roots of p, each distinct root reported once.

    Roots are isolated by exact sign-variation subdivision on the
    integer-primitive coefficients, refined by bisection, then polished with
    Newton steps using exact evaluation until the relative residual
    |p(r)| / sum_k |c_k r^k| drops below `tol`.  Repeated roots are collapsed
    onto the squarefree part; with_multiplicity=True returns (root, mult)
    pairs instead of bare floats.
    """
    if p.is_zero():
        raise ZeroInput("real_roots of the zero polynomial")
    c = p.int_coeffs()
    val = 0
    while c and not c[0]:
        c.pop(0)
        val += 1
    found: list[tuple[float, int]] = []
    if val:
        found.append((0.0, val))
    if len(c) > 1:
        for fac, mult in _squarefree_decompose(c):
            neg = [(-x if i % 2 else x) for i, x in enumerate(fac)]
            for sign, poly in ((1, fac), (-1, neg)):
                for item in _isolate_positive(poly):
                    if item[0] == "exact":
                        found.append((sign * float(item[1]), mult))
                    else:
                        r = _polish_root(poly, item[1], item[2], tol)
                        found.append((sign * r, mult))
    found.sort()
    if with_multiplicity:
        return found
    return [r for r, _ in found]
