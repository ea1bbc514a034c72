"""Exact rational arithmetic, q-series primitives, signatures, and a small
algebra of products of affine factors.

Everything downstream (vertex weights, symmetric rational functions, residue
sums) is built on the types here. All arithmetic is exact: scalars are GMP
rationals, and factored expressions keep enough structure to extract residues
at poles of any finite order without expanding to dense polynomials.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Tuple, Union

from gmpy2 import mpq, mpz

__all__ = [
    "ExactScalar",
    "ZERO",
    "ONE",
    "as_exact",
    "exact_str",
    "prod",
    "q_pochhammer",
    "q_binomial",
    "Signature",
    "signatures_bounded",
    "geometric_poly_tail",
    "LinearFactorExpression",
    "PoleOrderError",
]

ExactScalar = mpq
Rationalish = Union[int, str, Fraction, mpq]

ZERO = mpq(0)
ONE = mpq(1)


class PoleOrderError(ArithmeticError):
    """A residue extraction met a pole of order two or more."""


def as_exact(x: Rationalish) -> mpq:
    """Coerce ``x`` to an exact rational.

    Accepts ints, GMP integers/rationals, ``fractions.Fraction``, and strings
    like ``"p/q"`` or ``"p"``. Floats are rejected: silently rationalizing a
    binary float would defeat the point of the exact layer.
    """
    if isinstance(x, mpq):
        return x
    if isinstance(x, (int, mpz)):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(x.strip())
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


def exact_str(x: Rationalish) -> str:
    """Serialize as ``"p"`` or ``"p/q"`` with positive reduced denominator."""
    x = as_exact(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def prod(values: Iterable[Rationalish]) -> mpq:
    out = ONE
    for v in values:
        out = out * as_exact(v)
    return out


def q_pochhammer(z: Rationalish, q: Rationalish, n: int) -> mpq:
    """The shifted factorial (z; q)_n for any integer n.

    n > 0: prod_{k=0}^{n-1} (1 - z q^k); n = 0: 1; n < 0: the reciprocal
    product prod_{k=0}^{-n-1} (1 - z q^{n+k})^{-1}, so that
    (z; q)_{n+1} = (z; q)_n (1 - z q^n) holds across all of Z.
    """
    z = as_exact(z)
    q = as_exact(q)
    n = int(n)
    out = ONE
    if n >= 0:
        for k in range(n):
            out *= ONE - z * q**k
        return out
    for k in range(-n):
        factor = ONE - z * q ** (n + k)
        if factor == 0:
            raise ZeroDivisionError(
                f"(z;q)_{n} undefined: factor 1 - z*q^{n + k} vanishes"
            )
        out /= factor
    return out


def q_binomial(n: int, k: int, q: Rationalish) -> mpq:
    """Gaussian binomial coefficient, exact in q."""
    n = int(n)
    k = int(k)
    if not 0 <= k <= n:
        raise ValueError(f"q_binomial needs 0 <= k <= n, got n={n}, k={k}")
    q = as_exact(q)
    return q_pochhammer(q, q, n) / (q_pochhammer(q, q, k) * q_pochhammer(q, q, n - k))


class Signature:
    """A nonincreasing tuple of nonnegative integers.

    Both the parts view and the multiplicity view (n_k = number of parts equal
    to k) are supported; transfer-matrix code consumes multiplicities, residue
    code consumes parts.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int]):
        ps = tuple(int(p) for p in parts)
        for a, b in zip(ps, ps[1:]):
            if a < b:
                raise ValueError(f"signature parts must be nonincreasing: {ps}")
        if ps and ps[-1] < 0:
            raise ValueError(f"signature parts must be nonnegative: {ps}")
        self.parts = ps

    @classmethod
    def from_multiplicities(cls, mult: Mapping[int, int]) -> "Signature":
        parts = []
        for value in sorted(mult, reverse=True):
            count = mult[value]
            if count < 0:
                raise ValueError("multiplicities must be nonnegative")
            parts.extend([value] * count)
        return cls(parts)

    def multiplicity(self, value: int) -> int:
        return sum(1 for p in self.parts if p == value)

    def multiplicities(self) -> dict:
        out: dict = {}
        for p in self.parts:
            out[p] = out.get(p, 0) + 1
        return out

    def height(self, x: int) -> int:
        """Number of parts >= x."""
        return sum(1 for p in self.parts if p >= x)

    def weight(self) -> int:
        return sum(self.parts)

    def shifted(self, r: int) -> "Signature":
        """All parts shifted by r (r may be negative if no part drops below 0)."""
        return Signature(tuple(p + r for p in self.parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Signature) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"Signature{self.parts}"


def signatures_bounded(length: int, max_part: int, min_part: int = 0):
    """Yield every signature of the given length with parts in [min_part, max_part]."""
    if length == 0:
        yield Signature(())
        return

    def rec(prefix, bound):
        if len(prefix) == length:
            yield Signature(prefix)
            return
        for p in range(bound, min_part - 1, -1):
            yield from rec(prefix + (p,), p)

    yield from rec((), max_part)


def geometric_poly_tail(rho: Rationalish, degree: int, start: int) -> mpq:
    """Exact value of sum_{W >= start} (W+1)^degree * rho^W, for 0 <= rho < 1.

    Truncated-sum certificates bound their discarded tails by sums of this
    shape (polynomial counting factor times a geometric decay), so this has to
    be exact rather than a float estimate. Uses sum_{m>=0} m^k rho^m =
    N_k(rho)/(1-rho)^(k+1) where the N_k follow the Eulerian-polynomial
    recurrence N_k = rho(1-rho)N_{k-1}' + k rho N_{k-1}.
    """
    rho = as_exact(rho)
    degree = int(degree)
    start = int(start)
    if not (0 <= rho < 1):
        raise ValueError(f"need 0 <= rho < 1 for a convergent tail, got {rho}")
    if degree < 0 or start < 0:
        raise ValueError("degree and start must be nonnegative")

    # Coefficient lists for N_k, index = power of rho.
    coeffs = [ONE]
    power_sums = []
    one_minus = ONE - rho
    for k in range(degree + 1):
        val = ZERO
        for j, c in enumerate(coeffs):
            val += c * rho**j
        power_sums.append(val / one_minus ** (k + 1))
        if k == degree:
            break
        deriv = [coeffs[j] * j for j in range(1, len(coeffs))]
        nxt = [ZERO] * (len(coeffs) + 1)
        for j, c in enumerate(deriv):
            nxt[j + 1] += c
            nxt[j + 2] -= c
        for j, c in enumerate(coeffs):
            nxt[j + 1] += (k + 1) * c
        coeffs = nxt

    shift = start + 1
    total = ZERO
    binom = 1
    for k in range(degree + 1):
        # binom = C(degree, k)
        total += binom * as_exact(shift) ** (degree - k) * power_sums[k]
        binom = binom * (degree - k) // (k + 1)
    return rho**start * total


# ---------------------------------------------------------------------------
# Products of affine factors.
#
# A term is  coeff * prod_f (sum_v a_v v + b)^e  with exact coefficients. The
# representation is closed under products, substitution of a variable by a
# scalar, and residue extraction at simple poles, which is all the residue
# schedules need. Factors affine in several variables (the cross factors
# w_a - q w_b) never vanish identically at a scalar pole of one variable, so
# the simple-pole logic stays clean.
# ---------------------------------------------------------------------------

# factor base: (((var, coeff), ...sorted by var), const); factor: (base, exponent)
_Base = Tuple[Tuple[Tuple[str, mpq], ...], mpq]
_Factor = Tuple[_Base, int]
_Term = Tuple[mpq, Tuple[_Factor, ...]]


def _make_base(linear: Mapping[str, Rationalish], const: Rationalish) -> _Base:
    items = tuple(
        sorted((str(v), as_exact(c)) for v, c in linear.items() if as_exact(c) != 0)
    )
    return items, as_exact(const)


def _merge_factors(factors: Iterable[_Factor]) -> Tuple[_Factor, ...]:
    acc: dict = {}
    for base, exp in factors:
        if exp == 0:
            continue
        acc[base] = acc.get(base, 0) + exp
    return tuple(sorted(((b, e) for b, e in acc.items() if e != 0), key=repr))


def _poly_mul_trunc(a, b, cap):
    """Product of two expression-coefficient polynomials, dropping degree > cap."""
    out = [LinearFactorExpression(()) for _ in range(cap + 1)]
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b):
            if i + j > cap:
                break
            out[i + j] = out[i + j] + ai * bj
    return out


class LinearFactorExpression:
    """A sum of terms, each an exact coefficient times a product of integer
    powers of affine forms in named variables."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[_Term]):
        combined: dict = {}
        for coeff, factors in terms:
            if coeff == 0:
                continue
            key = _merge_factors(factors)
            combined[key] = combined.get(key, ZERO) + coeff
        self.terms = tuple(
            (c, f) for f, c in sorted(combined.items(), key=lambda kv: repr(kv[0]))
            if c != 0
        )

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c: Rationalish) -> "LinearFactorExpression":
        return cls([(as_exact(c), ())])

    @classmethod
    def factor(
        cls,
        alpha: Rationalish,
        variable: str,
        beta: Rationalish,
        exponent: int = 1,
    ) -> "LinearFactorExpression":
        """The univariate affine factor (alpha*variable + beta)^exponent."""
        return cls.linear({variable: alpha}, beta, exponent)

    @classmethod
    def linear(
        cls,
        coeffs: Mapping[str, Rationalish],
        const: Rationalish,
        exponent: int = 1,
    ) -> "LinearFactorExpression":
        exponent = int(exponent)
        if exponent == 0:
            return cls.constant(1)
        base = _make_base(coeffs, const)
        if not base[0]:
            c = base[1]
            if c == 0 and exponent < 0:
                raise ZeroDivisionError("constant zero factor with negative exponent")
            return cls.constant(c**exponent if c != 0 else ZERO)
        return cls([(ONE, ((base, exponent),))])

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "LinearFactorExpression") -> "LinearFactorExpression":
        return LinearFactorExpression(self.terms + other.terms)

    def __sub__(self, other: "LinearFactorExpression") -> "LinearFactorExpression":
        return self + other.scale(-1)

    def __mul__(self, other: "LinearFactorExpression") -> "LinearFactorExpression":
        out = []
        for c1, f1 in self.terms:
            for c2, f2 in other.terms:
                out.append((c1 * c2, f1 + f2))
        return LinearFactorExpression(out)

    def scale(self, c: Rationalish) -> "LinearFactorExpression":
        c = as_exact(c)
        return LinearFactorExpression([(c * tc, tf) for tc, tf in self.terms])

    def __pow__(self, exponent: int) -> "LinearFactorExpression":
        exponent = int(exponent)
        if exponent >= 0:
            out = LinearFactorExpression.constant(1)
            for _ in range(exponent):
                out = out * self
            return out
        if len(self.terms) != 1:
            raise ValueError("negative powers need a single-term expression")
        coeff, factors = self.terms[0]
        inverted = tuple((base, -e) for base, e in factors)
        return LinearFactorExpression([(ONE / coeff, inverted)]) ** (-exponent)

    # -- queries ------------------------------------------------------------

    def variables(self) -> set:
        out: set = set()
        for _, factors in self.terms:
            for (linear, _const), _e in factors:
                out.update(v for v, _ in linear)
        return out

    def degree(self, variable: str) -> int:
        """Max over terms of the total exponent of factors involving variable."""
        if not self.terms:
            return 0
        degs = []
        for _, factors in self.terms:
            d = 0
            for (linear, _const), e in factors:
                if any(v == variable for v, _ in linear):
                    d += e
            degs.append(d)
        return max(degs)

    # -- substitution and evaluation ----------------------------------------

    def substitute(self, variable: str, value: Rationalish) -> "LinearFactorExpression":
        value = as_exact(value)
        out = []
        for coeff, factors in self.terms:
            new_factors = []
            dead = False
            for (linear, const), e in factors:
                hit = dict(linear).get(variable)
                if hit is None:
                    new_factors.append(((linear, const), e))
                    continue
                rest = tuple((v, c) for v, c in linear if v != variable)
                newconst = const + hit * value
                if rest:
                    new_factors.append(((rest, newconst), e))
                elif newconst == 0:
                    if e < 0:
                        raise ZeroDivisionError(
                            f"substitution {variable}={value} hits a pole"
                        )
                    dead = True
                    break
                else:
                    coeff = coeff * newconst**e
            if not dead:
                out.append((coeff, tuple(new_factors)))
        return LinearFactorExpression(out)

    def evaluate(self, assignment: Mapping[str, Rationalish]) -> mpq:
        expr = self
        for v in sorted(self.variables()):
            if v not in assignment:
                raise KeyError(f"no value for variable {v}")
            expr = expr.substitute(v, assignment[v])
        total = ZERO
        for coeff, factors in expr.terms:
            assert not factors
            total += coeff
        return total

    # -- residues ------------------------------------------------------------

    def residue_at_simple_pole(
        self, variable: str, pole: Rationalish
    ) -> "LinearFactorExpression":
        """Residue in ``variable`` at the scalar point ``pole``.

        Per term, the factors that vanish at the pole must be supported on
        ``variable`` alone (a factor involving other variables cannot vanish
        identically there); their total exponent decides everything. Exponent
        >= 0 means the term is regular and contributes nothing, -1 gives the
        residue, <= -2 raises.
        """
        pole = as_exact(pole)
        out = []
        for coeff, factors in self.terms:
            vanish_coeff = ONE
            vanish_order = 0
            kept = []
            for (linear, const), e in factors:
                lin = dict(linear)
                if set(lin) == {variable} and lin[variable] * pole + const == 0:
                    vanish_coeff *= lin[variable] ** e
                    vanish_order += e
                else:
                    kept.append(((linear, const), e))
            if vanish_order >= 0:
                continue
            if vanish_order < -1:
                raise PoleOrderError(
                    f"pole of order {-vanish_order} at {variable}={pole}"
                )
            residual = LinearFactorExpression(
                [(coeff * vanish_coeff, tuple(kept))]
            ).substitute(variable, pole)
            out.extend(residual.terms)
        return LinearFactorExpression(out)

    def pole_order(self, variable: str, pole: Rationalish) -> int:
        """Upper bound for the pole order at ``variable = pole`` (0 if none).

        Only factors supported on ``variable`` alone can vanish there, so the
        bound is the worst total negative exponent over terms; cancellations
        between terms can only lower the true order.
        """
        pole = as_exact(pole)
        worst = 0
        for _, factors in self.terms:
            order = 0
            for (linear, const), e in factors:
                lin = dict(linear)
                if set(lin) == {variable} and lin[variable] * pole + const == 0:
                    order += e
            worst = min(worst, order)
        return -worst

    def residue_at_pole(
        self, variable: str, pole: Rationalish
    ) -> "LinearFactorExpression":
        """Residue in ``variable`` at ``pole`` for a pole of any finite order.

        Per term, the vanishing factors (necessarily supported on ``variable``
        alone) set the order p; the residue is the coefficient of z^(p-1) in
        the product of the remaining factors expanded around the pole. Each
        factor (A + a z)^e has expansion coefficients binom(e, m) a^m A^(e-m)
        with A affine in the other variables, so the result is again a sum of
        products of affine factors.
        """
        pole = as_exact(pole)
        out = []
        for coeff, factors in self.terms:
            vanish_coeff = ONE
            vanish_order = 0
            involved = []
            kept = []
            for (linear, const), e in factors:
                lin = dict(linear)
                if variable not in lin:
                    kept.append(((linear, const), e))
                elif set(lin) == {variable} and lin[variable] * pole + const == 0:
                    vanish_coeff *= lin[variable] ** e
                    vanish_order += e
                else:
                    involved.append(((linear, const), e))
            if vanish_order >= 0:
                continue
            need = -vanish_order - 1
            poly = [LinearFactorExpression.constant(1)]
            poly += [LinearFactorExpression(()) for _ in range(need)]
            for (linear, const), e in involved:
                lin = dict(linear)
                a = lin[variable]
                rest = {v: c for v, c in linear if v != variable}
                shifted = const + a * pole
                fpoly = []
                binom = ONE
                for m in range(need + 1):
                    if rest:
                        piece = LinearFactorExpression.linear(rest, shifted, e - m)
                    else:
                        # a factor on variable alone that does not vanish
                        piece = LinearFactorExpression.constant(shifted ** (e - m))
                    fpoly.append(piece.scale(binom * a**m))
                    binom = binom * (e - m) / (m + 1)
                poly = _poly_mul_trunc(poly, fpoly, need)
            residual = poly[need].scale(coeff * vanish_coeff) * LinearFactorExpression(
                [(ONE, tuple(kept))]
            )
            out.extend(residual.terms)
        return LinearFactorExpression(out)

    # -- misc ----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> mpq:
        if self.variables():
            raise ValueError("expression still has free variables")
        return self.evaluate({})

    def __repr__(self) -> str:
        if not self.terms:
            return "LFE(0)"

        def fmt_base(base):
            linear, const = base
            bits = [f"{exact_str(c)}*{v}" for v, c in linear]
            if const != 0 or not bits:
                bits.append(exact_str(const))
            return " + ".join(bits)

        parts = []
        for coeff, factors in self.terms:
            frag = [exact_str(coeff)]
            frag += [f"({fmt_base(b)})^{e}" for b, e in factors]
            parts.append(" * ".join(frag))
        return "LFE[" + " + ".join(parts) + "]"
