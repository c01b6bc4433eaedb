"""Exact truncated Laurent series over the Gaussian rationals.

Everything here is exact: coefficients are :class:`GaussianRational`
values built from :class:`fractions.Fraction`, exponents live in the
half-integer lattice, and every series carries an explicit exclusive
truncation order (``math.inf`` for a Laurent polynomial known exactly).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

INF = math.inf

Number = Union[int, Fraction, "GaussianRational"]


class GaussianRational:
    """An element ``re + im*i`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        if isinstance(re, float) or isinstance(im, float):
            raise TypeError("floating point values are not allowed in exact arithmetic")
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x, 0)
        if isinstance(x, Rational):
            return GaussianRational(Fraction(x.numerator, x.denominator))
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if o.im == 0:
            return GaussianRational(self.re * o.re, self.im * o.re)
        if self.im == 0:
            return GaussianRational(self.re * o.re, self.re * o.im)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if o.im == 0:
            if o.re == 0:
                raise ZeroDivisionError("GaussianRational division by zero")
            return GaussianRational(self.re / o.re, self.im / o.re)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.inverse() ** (-n)
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"


I = GaussianRational(0, 1)
ZERO = GaussianRational(0)
ONE = GaussianRational(1)


def gq(x) -> GaussianRational:
    """Coerce an int, Fraction, numeric string or GaussianRational."""
    if isinstance(x, str):
        return GaussianRational(Fraction(x))
    return GaussianRational.coerce(x)


def _half_units(e) -> int:
    """Exponent ``e`` in half-units (2e), checking it lies in (1/2)Z."""
    f = Fraction(e)
    twice = 2 * f
    if twice.denominator != 1:
        raise ValueError(f"exponent {e} is not in (1/2)Z")
    return int(twice)


def _order_half_units(order) -> Union[int, float]:
    if order is None or order == INF:
        return INF
    f = Fraction(order)
    # an order between lattice points is rounded up: exponents below it are the same set
    return math.ceil(2 * f)


def _from_half(h) -> Union[Fraction, float]:
    if h == INF:
        return INF
    return Fraction(h, 2)


class TruncatedSeries:
    """Laurent series ``sum c_e x^e`` in one variable (``"q"`` or ``"u"``).

    Coefficients with exponent ``>= order`` are unknown; everything below
    is exact. Zero coefficients are never stored, so two series compare
    equal iff they have the same variable, order and nonzero terms.
    """

    __slots__ = ("variable", "_terms", "_order2")

    def __init__(self, variable: str, terms: Optional[Mapping] = None, order=INF):
        if variable not in ("q", "u"):
            raise ValueError(f"unknown variable tag {variable!r}")
        order2 = _order_half_units(order)
        clean: Dict[int, GaussianRational] = {}
        for e, c in (terms or {}).items():
            h = _half_units(e)
            c = gq(c)
            if not c or h >= order2:
                continue
            clean[h] = clean[h] + c if h in clean else c
            if not clean[h]:
                del clean[h]
        object.__setattr__(self, "variable", variable)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_order2", order2)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    def __reduce__(self):
        return (TruncatedSeries._raw, (self.variable, self._terms, self._order2))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @classmethod
    def _raw(cls, variable: str, terms2: Dict[int, GaussianRational], order2) -> "TruncatedSeries":
        obj = object.__new__(cls)
        object.__setattr__(obj, "variable", variable)
        object.__setattr__(obj, "_terms", {h: c for h, c in terms2.items() if c and h < order2})
        object.__setattr__(obj, "_order2", order2)
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_coefficients(cls, variable: str, coeffs: Sequence, start=0, order=None) -> "TruncatedSeries":
        """Integer-step coefficients ``coeffs[n]`` of ``x^(start+n)``.

        Without an explicit order the data is taken as known exactly up
        to and including the last listed coefficient.
        """
        start = Fraction(start)
        if order is None:
            order = start + len(coeffs)
        return cls(variable, {start + n: c for n, c in enumerate(coeffs)}, order)

    @classmethod
    def one(cls, variable: str) -> "TruncatedSeries":
        return cls(variable, {0: 1})

    @classmethod
    def zero(cls, variable: str, order=INF) -> "TruncatedSeries":
        return cls(variable, {}, order)

    @classmethod
    def monomial(cls, variable: str, exponent, coeff=1, order=INF) -> "TruncatedSeries":
        return cls(variable, {exponent: coeff}, order)

    # -- accessors ------------------------------------------------------------

    @property
    def order(self):
        return _from_half(self._order2)

    @property
    def terms(self) -> Dict[Fraction, GaussianRational]:
        return {Fraction(h, 2): c for h, c in sorted(self._terms.items())}

    def items(self) -> Iterator[Tuple[Fraction, GaussianRational]]:
        for h in sorted(self._terms):
            yield Fraction(h, 2), self._terms[h]

    def coefficient(self, exponent) -> GaussianRational:
        h = _half_units(exponent)
        if h >= self._order2:
            raise ValueError(f"coefficient of {self.variable}^{exponent} is beyond the truncation order {self.order}")
        return self._terms.get(h, ZERO)

    def __getitem__(self, exponent) -> GaussianRational:
        return self.coefficient(exponent)

    @property
    def valuation(self):
        """Lowest stored exponent; for a zero series, its truncation order."""
        if self._terms:
            return Fraction(min(self._terms), 2)
        return self.order

    def _val2(self):
        return min(self._terms) if self._terms else self._order2

    @property
    def is_exact(self) -> bool:
        return self._order2 == INF

    def is_zero(self) -> bool:
        return not self._terms

    def has_integer_exponents(self) -> bool:
        return all(h % 2 == 0 for h in self._terms)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.variable != self.variable:
            raise ValueError(f"variable mismatch: {self.variable} vs {other.variable}")

    def _lift(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return TruncatedSeries(self.variable, {0: gq(other)})

    def __add__(self, other):
        other = self._lift(other)
        order2 = min(self._order2, other._order2)
        out = {h: c for h, c in self._terms.items() if h < order2}
        for h, c in other._terms.items():
            if h >= order2:
                continue
            if h in out:
                s = out[h] + c
                if s:
                    out[h] = s
                else:
                    del out[h]
            else:
                out[h] = c
        return TruncatedSeries._raw(self.variable, out, order2)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.variable, {h: -c for h, c in self._terms.items()}, self._order2)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "TruncatedSeries":
        c = gq(c)
        if not c:
            return TruncatedSeries._raw(self.variable, {}, self._order2)
        return TruncatedSeries._raw(self.variable, {h: v * c for h, v in self._terms.items()}, self._order2)

    def shift(self, exponent) -> "TruncatedSeries":
        """Multiply by ``x^exponent`` (exact, moves the order too)."""
        d = _half_units(exponent)
        return TruncatedSeries._raw(
            self.variable, {h + d: c for h, c in self._terms.items()}, self._order2 + d
        )

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        order2 = min(self._order2 + other._val2(), other._order2 + self._val2())
        out: Dict[int, GaussianRational] = {}
        for ha, ca in self._terms.items():
            for hb, cb in other._terms.items():
                h = ha + hb
                if h >= order2:
                    continue
                p = ca * cb
                out[h] = out[h] + p if h in out else p
        return TruncatedSeries._raw(self.variable, out, order2)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.invert()
        return self.scale(gq(other).inverse())

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        result = TruncatedSeries.one(self.variable)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def invert(self, order=None) -> "TruncatedSeries":
        """Multiplicative inverse.

        The result is determined below ``order(a) - 2*val(a)``; ``order``
        may lower that bound, and is required when ``self`` is an exact
        polynomial that is not a monomial.
        """
        if not self._terms:
            raise ZeroDivisionError("cannot invert a zero (or fully unknown) series")
        v2 = min(self._terms)
        lead = self._terms[v2]
        if len(self._terms) == 1 and self._order2 == INF and order is None:
            return TruncatedSeries._raw(self.variable, {-v2: lead.inverse()}, INF)
        out_order2 = self._order2 - 2 * v2
        if order is not None:
            out_order2 = min(out_order2, _order_half_units(order))
        if out_order2 == INF:
            raise ValueError("inverse of a non-monomial exact series needs an explicit order")
        n_terms = out_order2 + v2  # relative precision in half-units
        inv_lead = lead.inverse()
        rest = [(h - v2, c) for h, c in self._terms.items() if h != v2]
        b: Dict[int, GaussianRational] = {}
        for n in range(max(n_terms, 0)):
            if n == 0:
                b[0] = inv_lead
                continue
            s = ZERO
            for j, c in rest:
                if j > n:
                    continue
                bj = b.get(n - j)
                if bj:
                    s = s + c * bj
            if s:
                b[n] = -(s * inv_lead)
        return TruncatedSeries._raw(self.variable, {n - v2: c for n, c in b.items()}, out_order2)

    def truncate(self, order) -> "TruncatedSeries":
        order2 = min(self._order2, _order_half_units(order))
        return TruncatedSeries._raw(self.variable, dict(self._terms), order2)

    def with_order(self, order) -> "TruncatedSeries":
        """Declare a (possibly larger) truncation order for known data.

        Only used when the caller knows the stored terms are complete up
        to ``order`` (e.g. an exact polynomial listed in a file).
        """
        return TruncatedSeries._raw(self.variable, dict(self._terms), _order_half_units(order))

    def map_coefficients(self, f) -> "TruncatedSeries":
        return TruncatedSeries._raw(self.variable, {h: gq(f(c)) for h, c in self._terms.items()}, self._order2)

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            if self._order2 != INF:
                return NotImplemented
            try:
                other = self._lift(other)
            except TypeError:
                return NotImplemented
        return (
            self.variable == other.variable
            and self._order2 == other._order2
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.variable, self._order2, frozenset(self._terms.items())))

    def agrees_with(self, other: "TruncatedSeries", order=None) -> bool:
        """Coefficientwise equality below ``order`` (default: common order)."""
        self._check(other)
        bound = min(self._order2, other._order2)
        if order is not None:
            bound = min(bound, _order_half_units(order))
        keys = {h for h in self._terms if h < bound} | {h for h in other._terms if h < bound}
        return all(self._terms.get(h, ZERO) == other._terms.get(h, ZERO) for h in keys)

    def differences(self, other: "TruncatedSeries", order=None):
        self._check(other)
        bound = min(self._order2, other._order2)
        if order is not None:
            bound = min(bound, _order_half_units(order))
        keys = sorted({h for h in self._terms if h < bound} | {h for h in other._terms if h < bound})
        return [
            (Fraction(h, 2), self._terms.get(h, ZERO), other._terms.get(h, ZERO))
            for h in keys
            if self._terms.get(h, ZERO) != other._terms.get(h, ZERO)
        ]

    # -- display ---------------------------------------------------------------

    def __repr__(self):
        return f"TruncatedSeries({self.variable!r}, {{{', '.join(f'{e}: {c}' for e, c in self.items())}}}, order={self.order})"

    def __str__(self):
        out = ""
        for e, c in self.items():
            if e == 0:
                mono = ""
            elif e == 1:
                mono = self.variable
            else:
                mono = f"{self.variable}^{e}"
            negative = (c.im == 0 and c.re < 0) or (c.re == 0 and c.im < 0)
            mag = -c if negative else c
            cs = f"({mag})" if mag.im != 0 and mag.re != 0 else str(mag)
            if mono:
                body = mono if mag == 1 else f"{cs}*{mono}"
            else:
                body = cs
            if not out:
                out = f"-{body}" if negative else body
            else:
                out += f" - {body}" if negative else f" + {body}"
        out = out or "0"
        if self._order2 == INF:
            return out
        return f"{out} + O({self.variable}^{self.order})"


def add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def invert(a: TruncatedSeries, order=None) -> TruncatedSeries:
    return a.invert(order)


def exp_linear(c, t, order, variable: str = "u") -> TruncatedSeries:
    """``exp(c*t*x)`` truncated below ``order``."""
    a = gq(c) * Fraction(t)
    terms = {}
    term = ONE
    n = 0
    while n < order:
        terms[n] = term
        n += 1
        term = term * a / n
    return TruncatedSeries(variable, terms, order)


def neg_q_power(exponent, u_order) -> TruncatedSeries:
    """``(-q)^exponent`` after ``-q = e^{iu}``, i.e. ``exp(i*exponent*u)``."""
    return exp_linear(I, exponent, u_order)


def neg_iu_power(n: int) -> TruncatedSeries:
    """The exact monomial ``(-i u)^n``."""
    return TruncatedSeries.monomial("u", n, (-I) ** n)


def _q_power_in_u(exponent: Fraction, u_order) -> TruncatedSeries:
    # q = -e^{iu} = e^{i(u + pi)} on the principal branch, so
    # q^e = i^{2e} e^{ieu}; for integer e this is (-1)^e e^{ieu}.
    return exp_linear(I, exponent, u_order).scale(I ** int(2 * exponent))


def substitute_q(a: TruncatedSeries, u_order, require_exact: bool = True) -> TruncatedSeries:
    """Apply ``q = -e^{iu}`` to a Laurent polynomial in q.

    Every q-power feeds every u-coefficient, so a truncated q-series has
    no exact image; such input is rejected unless ``require_exact`` is
    False, in which case the stored terms are treated as the whole
    polynomial. Rational data should go through
    :meth:`RationalFunction.substitute` instead.
    """
    if a.variable != "q":
        raise ValueError("substitute_q expects a series in q")
    if require_exact and not a.is_exact:
        raise ValueError(
            "cannot substitute a truncated q-series exactly; reconstruct a rational function first"
        )
    out = TruncatedSeries.zero("u", u_order)
    for e, c in a.items():
        out = out + _q_power_in_u(e, u_order).scale(c)
    return out


# ---------------------------------------------------------------------------
# polynomials over Q(i): dict exponent -> coefficient, nonnegative exponents
# ---------------------------------------------------------------------------

Poly = Dict[int, GaussianRational]


def _pnorm(p: Mapping[int, GaussianRational]) -> Poly:
    return {k: gq(v) for k, v in p.items() if v}


def _pdeg(p: Poly) -> int:
    return max(p) if p else -1


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, ZERO) + x * y
    return {k: v for k, v in out.items() if v}


def _pdivmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = dict(a)
    db = _pdeg(b)
    lead_inv = b[db].inverse()
    quot: Poly = {}
    while a and _pdeg(a) >= db:
        da = _pdeg(a)
        f = a[da] * lead_inv
        quot[da - db] = f
        for k, v in b.items():
            nk = da - db + k
            nv = a.get(nk, ZERO) - f * v
            if nv:
                a[nk] = nv
            else:
                a.pop(nk, None)
    return quot, a


def _pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if not a:
        return {}
    lead = a[_pdeg(a)].inverse()
    return {k: v * lead for k, v in a.items()}


class RationalFunction:
    """``q^shift * num(q) / den(q)`` with ``den(0) = 1`` and coprime parts."""

    __slots__ = ("numerator", "denominator", "shift")

    def __init__(self, numerator: Mapping[int, object], denominator: Mapping[int, object] = None, shift: int = 0):
        num = _pnorm(numerator)
        den = _pnorm(denominator if denominator is not None else {0: 1})
        if not den:
            raise ZeroDivisionError("zero denominator")
        # pull powers of q out of both parts into the shift
        if num:
            m = min(num)
            num = {k - m: v for k, v in num.items()}
            shift += m
        else:
            shift = 0
        m = min(den)
        den = {k - m: v for k, v in den.items()}
        shift -= m
        g = _pgcd(num, den) if num else {0: ONE}
        if _pdeg(g) > 0:
            num, _ = _pdivmod(num, g)
            den, _ = _pdivmod(den, g)
        c0 = den[0].inverse()
        num = {k: v * c0 for k, v in num.items() if v}
        den = {k: v * c0 for k, v in den.items() if v}
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "shift", shift if num else 0)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    @property
    def numerator_laurent(self) -> Dict[int, GaussianRational]:
        return {k + self.shift: v for k, v in self.numerator.items()}

    def degrees(self) -> Tuple[int, int]:
        """Degrees of the polynomial numerator and denominator of the reduced form."""
        if self.shift >= 0:
            return _pdeg(self.numerator) + self.shift, _pdeg(self.denominator)
        return _pdeg(self.numerator), _pdeg(self.denominator) - self.shift

    def expand(self, order) -> TruncatedSeries:
        """Laurent expansion in q, exact below ``order``."""
        if not self.numerator:
            return TruncatedSeries.zero("q", order)
        rel = _order_half_units(order) // 2 - self.shift
        num = TruncatedSeries("q", self.numerator)
        den = TruncatedSeries("q", self.denominator)
        if rel <= 0:
            return TruncatedSeries.zero("q", order)
        core = (num * den.invert(order=rel)).truncate(rel)
        return core.shift(self.shift).truncate(order)

    def substitute(self, u_order) -> TruncatedSeries:
        """``f(-e^{iu})`` as a u-series exact below ``u_order``."""
        if not self.numerator:
            return TruncatedSeries.zero("u", u_order)
        num_q = TruncatedSeries("q", self.numerator_laurent)
        den_q = TruncatedSeries("q", self.denominator)
        extra = 2
        while True:
            work = u_order + extra
            n = substitute_q(num_q, work)
            d = substitute_q(den_q, work)
            if d.is_zero():
                extra *= 2
                continue
            result = n * d.invert()
            if result.order >= u_order:
                return result.truncate(u_order)
            extra *= 2

    def __call__(self, value):
        x = gq(value)
        num = sum((v * x ** k for k, v in self.numerator.items()), ZERO)
        den = sum((v * x ** k for k, v in self.denominator.items()), ZERO)
        return num * x ** self.shift / den

    def _cross(self):
        return self.numerator_laurent, self.denominator

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (
            self.numerator == other.numerator
            and self.denominator == other.denominator
            and self.shift == other.shift
        )

    def __hash__(self):
        return hash((frozenset(self.numerator.items()), frozenset(self.denominator.items()), self.shift))

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        s = min(self.shift, other.shift)
        a = _pmul({k + self.shift - s: v for k, v in self.numerator.items()}, other.denominator)
        b = _pmul({k + other.shift - s: v for k, v in other.numerator.items()}, self.denominator)
        num = {k: a.get(k, ZERO) + b.get(k, ZERO) for k in set(a) | set(b)}
        return RationalFunction(num, _pmul(self.denominator, other.denominator), s)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            _pmul(self.numerator, other.numerator),
            _pmul(self.denominator, other.denominator),
            self.shift + other.shift,
        )

    def __str__(self):
        def fmt(p, var_shift=0):
            s = str(TruncatedSeries("q", {k + var_shift: v for k, v in p.items()}))
            return s
        num = fmt(self.numerator, self.shift)
        den = fmt(self.denominator)
        if den == "1":
            return num
        return f"({num})/({den})"

    def __repr__(self):
        return f"RationalFunction({self})"


def _solve_linear(rows, rhs):
    """Exact Gaussian elimination; returns a solution (free vars = 0) or None."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = aug[r][c].inverse()
        aug[r] = [x * inv for x in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for i in range(r, n_rows):
        if aug[i][-1]:
            return None
    sol = [ZERO] * n_cols
    for i, c in enumerate(pivots):
        sol[c] = aug[i][-1]
    return sol


def rational_reconstruct(a: TruncatedSeries, num_deg: int, den_deg: int) -> Optional[RationalFunction]:
    """Find ``N/D`` with ``deg N <= num_deg``, ``deg D <= den_deg`` matching every known coefficient.

    Returns None when no such function exists (rationality is then
    merely unconfirmed at this order). Raises ValueError when fewer than
    ``num_deg + den_deg + 1`` coefficients are known past the valuation.
    """
    if a.variable != "q":
        raise ValueError("rational reconstruction works on q-series")
    if not a.has_integer_exponents() or (not a.is_exact and Fraction(a.order).denominator != 1):
        raise ValueError("rational reconstruction needs integer exponents")
    if a.is_zero():
        if a.is_exact:
            return RationalFunction({})
        raise ValueError("series has no known nonzero coefficient")
    v = int(a.valuation)
    if a.is_exact:
        top = int(max(a.terms))
        known = top - v + 1 + num_deg + den_deg + 1
    else:
        known = int(a.order) - v
    # f = q^v * A(q); numerator q^v * P with deg P <= num_deg - v when v >= 0,
    # denominator q^{-v} * Q with deg Q <= den_deg + v when v < 0.
    if v >= 0:
        m, n = num_deg - v, den_deg
    else:
        m, n = num_deg, den_deg + v
    if m < 0 or n < 0:
        return None
    if known < m + n + 1:
        raise ValueError(
            f"need at least {m + n + 1} known coefficients past the valuation, have {known}"
        )
    A = [a.coefficient(v + k) for k in range(known)]
    # unknowns Q_1..Q_n; equations k = m+1 .. known-1: sum_j Q_j A_{k-j} = -A_k
    rows, rhs = [], []
    for k in range(m + 1, known):
        rows.append([A[k - j] if k - j >= 0 else ZERO for j in range(1, n + 1)])
        rhs.append(-A[k])
    if n == 0:
        if any(rhs):
            return None
        q_coeffs = [ONE]
    else:
        sol = _solve_linear(rows, rhs) if rows else [ZERO] * n
        if sol is None:
            return None
        q_coeffs = [ONE] + sol
    p_coeffs = {}
    for k in range(m + 1):
        s = ZERO
        for j in range(min(k, n) + 1):
            s = s + q_coeffs[j] * A[k - j]
        if s:
            p_coeffs[k] = s
    f = RationalFunction(p_coeffs, {j: c for j, c in enumerate(q_coeffs)}, v)
    # re-verify against every known coefficient
    check = f.expand(v + known)
    if not check.agrees_with(a.truncate(v + known)):
        return None
    return f


def reconstruct_auto(a: TruncatedSeries, max_den_deg: Optional[int] = None, min_checks: int = 2) -> Optional[RationalFunction]:
    """Rational reconstruction with degree bounds chosen from the data.

    Tries denominator degrees 0, 1, ... with the numerator bound as large
    as the known coefficients allow while keeping ``min_checks``
    coefficients unused by the fit as confirmation.
    """
    if a.is_exact:
        return rational_reconstruct(a, int(max(a.terms)) if a.terms else 0, 0)
    v = int(a.valuation)
    known = int(a.order) - v
    budget = known - 1 - min_checks
    if budget < 0:
        return None
    limit = budget if max_den_deg is None else min(budget, max_den_deg)
    for n in range(limit + 1):
        m = budget - n
        num_deg = m + max(v, 0)
        den_deg = n + max(-v, 0)
        f = rational_reconstruct(a, num_deg, den_deg)
        if f is not None:
            return f
    return None


def _laurent_mul(a: Mapping[int, GaussianRational], b: Mapping[int, GaussianRational]):
    return _pmul(dict(a), dict(b))


def check_q_inverse_symmetry(f: RationalFunction) -> bool:
    """True iff ``f(q) == f(1/q)`` as rational functions."""
    num = f.numerator_laurent
    den = f.denominator
    # f(1/q) = num(1/q) / den(1/q); compare num(q)*den(1/q) with num(1/q)*den(q)
    num_inv = {-k: v for k, v in num.items()}
    den_inv = {-k: v for k, v in den.items()}
    lhs = _laurent_mul(num, den_inv)
    rhs = _laurent_mul(num_inv, den)
    return lhs == rhs


def series_from_records(records: Iterable[Sequence], trunc_order, variable: str) -> TruncatedSeries:
    """Build a series from ``[exp_num, exp_den, re, im]`` records."""
    terms: Dict[Fraction, GaussianRational] = {}
    for rec in records:
        if len(rec) != 4:
            raise ValueError(f"series record must have 4 fields, got {rec!r}")
        en, ed, re, im = rec
        if int(ed) not in (1, 2):
            raise ValueError(f"exponent denominator must be 1 or 2, got {ed}")
        e = Fraction(int(en), int(ed))
        c = GaussianRational(Fraction(str(re)), Fraction(str(im)))
        terms[e] = terms.get(e, ZERO) + c
    order = INF if trunc_order is None else Fraction(str(trunc_order))
    return TruncatedSeries(variable, terms, order)


def series_to_records(s: TruncatedSeries):
    recs = []
    for e, c in s.items():
        recs.append([e.numerator, e.denominator, str(c.re), str(c.im)])
    order = None if s.is_exact else str(s.order)
    return recs, order
