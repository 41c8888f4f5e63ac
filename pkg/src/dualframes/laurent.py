"""Sparse Laurent polynomials representing 2pi-periodic trigonometric polynomials.

A polynomial ``p`` with coefficients ``c(k)`` stands for the symbol

    p(xi) = sum_k c(k) exp(-i k xi)

Coefficients live either in exact mode (complex numbers with rational real
and imaginary parts) or float mode (complex doubles).  The two modes never
mix silently.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Iterator, Mapping, NamedTuple

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_FLOAT_TOL = 1e-12


class ModeError(TypeError):
    """Raised when exact and float quantities are combined."""


class RationalComplex:
    """Complex number with arbitrary-precision rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    @classmethod
    def coerce(cls, value: Any) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        if isinstance(value, (int, Rational)) and not isinstance(value, bool):
            return cls(value, 0)
        raise ModeError(f"cannot use {type(value).__name__} {value!r} as an exact coefficient")

    def __add__(self, other):
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return RationalComplex(num.re / den, num.im / den)

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def conjugate(self) -> "RationalComplex":
        return RationalComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def abs_upper(self) -> Fraction | float:
        """Upper bound for the modulus; exact when the number is real or imaginary."""
        if self.im == 0:
            return abs(self.re)
        if self.re == 0:
            return abs(self.im)
        return math.nextafter(math.sqrt(float(self.abs2())), math.inf)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        o = _coerce_exact(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _as_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return Fraction(x)
    raise ModeError(f"exact arithmetic requires rational parts, got {type(x).__name__}")


def _coerce_exact(value: Any) -> RationalComplex | None:
    try:
        return RationalComplex.coerce(value)
    except ModeError:
        return None


def _coerce(value: Any, mode: str):
    if mode == EXACT:
        return RationalComplex.coerce(value)
    if isinstance(value, RationalComplex):
        raise ModeError("exact coefficient passed to a float-mode polynomial")
    if isinstance(value, (int, float, complex, Rational)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, np.number):
        return complex(value)
    raise ModeError(f"cannot use {type(value).__name__} as a float coefficient")


def check_dilation(d: Any) -> int:
    """Validate an integer dilation factor with ``|d| >= 2``."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise ValueError(f"dilation must be an integer, got {d!r}")
    d = int(d)
    if abs(d) < 2:
        raise ValueError(f"dilation must satisfy |d| >= 2, got {d}")
    return d


class SupNorm(NamedTuple):
    upper: Fraction | float
    grid_estimate: float


class LaurentPoly:
    """Immutable finitely supported coefficient sequence ``{k: c(k)}``.

    Zero coefficients are never stored.  In float mode "zero" means exactly
    0.0; tolerance-based comparisons go through :meth:`max_abs_coeff`.
    """

    __slots__ = ("_coeffs", "mode", "_arrays")

    def __init__(self, coeffs: Mapping[int, Any] | Iterable[tuple[int, Any]] | None = None,
                 mode: str = EXACT):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else (coeffs or ())
        store: dict[int, Any] = {}
        for k, c in items:
            if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
                raise TypeError(f"indices must be integers, got {k!r}")
            c = _coerce(c, mode)
            k = int(k)
            if k in store:
                c = store[k] + c
            store[k] = c
        self._coeffs = {k: store[k] for k in sorted(store) if store[k]}
        self.mode = mode
        self._arrays = None

    # construction helpers

    @classmethod
    def zero(cls, mode: str = EXACT) -> "LaurentPoly":
        return cls({}, mode)

    @classmethod
    def constant(cls, c: Any = 1, mode: str = EXACT) -> "LaurentPoly":
        return cls({0: c}, mode)

    @classmethod
    def monomial(cls, k: int, c: Any = 1, mode: str = EXACT) -> "LaurentPoly":
        return cls({k: c}, mode)

    @classmethod
    def from_sequence(cls, values: Iterable[Any], start: int = 0, mode: str = EXACT) -> "LaurentPoly":
        return cls({start + i: v for i, v in enumerate(values)}, mode)

    # basic protocol

    @property
    def coeffs(self) -> dict[int, Any]:
        return dict(self._coeffs)

    def items(self) -> Iterator[tuple[int, Any]]:
        return iter(self._coeffs.items())

    def __getitem__(self, k: int):
        return self._coeffs.get(k, RationalComplex(0) if self.mode == EXACT else 0j)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def support(self) -> tuple[int, int] | None:
        if not self._coeffs:
            return None
        ks = list(self._coeffs)
        return ks[0], ks[-1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.mode == other.mode and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.mode, tuple(self._coeffs.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{c!r}@{k}" for k, c in self._coeffs.items())
        return f"LaurentPoly({{{body}}}, mode={self.mode!r})"

    def _check_mode(self, other: "LaurentPoly") -> None:
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"expected LaurentPoly, got {type(other).__name__}")
        if other.mode != self.mode:
            raise ModeError(f"cannot combine {self.mode} and {other.mode} polynomials")

    # arithmetic

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_mode(other)
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentPoly(out, self.mode)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({k: -c for k, c in self._coeffs.items()}, self.mode)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return self.scale(other)
        self._check_mode(other)
        out: dict[int, Any] = {}
        for k1, c1 in self._coeffs.items():
            for k2, c2 in other._coeffs.items():
                k = k1 + k2
                term = c1 * c2
                out[k] = out[k] + term if k in out else term
        return LaurentPoly(out, self.mode)

    def __rmul__(self, other) -> "LaurentPoly":
        return self.scale(other)

    def scale(self, c: Any) -> "LaurentPoly":
        c = _coerce(c, self.mode)
        return LaurentPoly({k: v * c for k, v in self._coeffs.items()}, self.mode)

    def conj_reflect(self) -> "LaurentPoly":
        """Coefficient at ``k`` becomes ``conj(c(-k))``: the symbol of ``conj(p(xi))``."""
        return LaurentPoly({-k: c.conjugate() for k, c in self._coeffs.items()}, self.mode)

    def conj_coeffs(self) -> "LaurentPoly":
        return LaurentPoly({k: c.conjugate() for k, c in self._coeffs.items()}, self.mode)

    def upsample(self, d: int) -> "LaurentPoly":
        """Symbol of ``p(d xi)``: coefficient at ``k`` moves to ``d k``."""
        if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d == 0:
            raise ValueError(f"upsampling factor must be a nonzero integer, got {d!r}")
        return LaurentPoly({int(d) * k: c for k, c in self._coeffs.items()}, self.mode)

    def downsample(self, d: int) -> "LaurentPoly":
        """Sequence ``w(k) = c(d k)``."""
        d = check_dilation(d)
        return LaurentPoly({k // d: c for k, c in self._coeffs.items() if k % d == 0}, self.mode)

    def coset(self, gamma: int, d: int) -> "LaurentPoly":
        """Keep exactly the coefficients with ``k = gamma (mod |d|)``."""
        d = check_dilation(d)
        m = abs(d)
        if not 0 <= gamma < m:
            raise ValueError(f"coset index must lie in [0, {m}), got {gamma}")
        return LaurentPoly({k: c for k, c in self._coeffs.items() if k % m == gamma}, self.mode)

    def to_float(self) -> "LaurentPoly":
        if self.mode == FLOAT:
            return self
        return LaurentPoly({k: complex(c) for k, c in self._coeffs.items()}, FLOAT)

    # evaluation and norms

    def _coeff_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            ks = np.fromiter(self._coeffs.keys(), dtype=float, count=len(self._coeffs))
            cs = np.array([complex(c) for c in self._coeffs.values()], dtype=complex)
            self._arrays = (ks, cs)
        return self._arrays

    def evaluate(self, xi):
        """Evaluate the symbol at real ``xi`` (scalar or array) in double precision."""
        ks, cs = self._coeff_arrays()
        x = np.asarray(xi, dtype=float)
        if ks.size == 0:
            out = np.zeros(x.shape, dtype=complex)
        else:
            out = np.exp(-1j * np.multiply.outer(x, ks)) @ cs
        if np.ndim(xi) == 0:
            return complex(out)
        return out

    __call__ = evaluate

    def degree(self) -> int:
        """``max(|kmin|, |kmax|)``; undefined for the zero polynomial."""
        if not self._coeffs:
            raise ValueError("the zero polynomial has no degree")
        lo, hi = self.support
        return max(abs(lo), abs(hi))

    def coefficient_sum(self):
        """Value of the symbol at ``xi = 0``."""
        total = RationalComplex(0) if self.mode == EXACT else 0j
        for c in self._coeffs.values():
            total = total + c
        return total

    def l1_norm(self) -> Fraction | float:
        """``sum_k |c(k)|``, rounded upward when not exactly representable."""
        if self.mode == EXACT:
            parts = [c.abs_upper() for c in self._coeffs.values()]
            if all(isinstance(p, Fraction) for p in parts):
                return sum(parts, Fraction(0))
            return math.nextafter(math.fsum(float(p) for p in parts), math.inf) if parts else 0.0
        total = math.fsum(abs(c) for c in self._coeffs.values())
        return math.nextafter(total, math.inf) if total else 0.0

    def sup_norm_upper(self, samples: int = 4096) -> SupNorm:
        """Certified upper bound ``sum |c(k)|`` plus a grid estimate of ``max |p|``."""
        grid = np.linspace(-np.pi, np.pi, samples + 1)
        est = float(np.max(np.abs(self.evaluate(grid)))) if self._coeffs else 0.0
        return SupNorm(self.l1_norm(), est)

    def max_abs_coeff(self) -> float:
        if not self._coeffs:
            return 0.0
        return max(abs(complex(c)) for c in self._coeffs.values())

    def is_negligible(self, tol: float = DEFAULT_FLOAT_TOL) -> bool:
        """Exact mode: is the zero polynomial.  Float mode: every coefficient below ``tol``."""
        if self.mode == EXACT:
            return self.is_zero
        return self.max_abs_coeff() < tol


# functional aliases


def add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p + q


def mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p * q


def conj_reflect(p: LaurentPoly) -> LaurentPoly:
    return p.conj_reflect()


def upsample(p: LaurentPoly, d: int) -> LaurentPoly:
    return p.upsample(d)


def coset_extract(p: LaurentPoly, gamma: int, d: int) -> LaurentPoly:
    return p.coset(gamma, d)


def evaluate(p: LaurentPoly, xi):
    return p.evaluate(xi)


def degree(p: LaurentPoly) -> int:
    return p.degree()


def sup_norm_upper(p: LaurentPoly) -> SupNorm:
    return p.sup_norm_upper()


def sum_polys(polys: Iterable[LaurentPoly], mode: str = EXACT) -> LaurentPoly:
    total = None
    for p in polys:
        total = p if total is None else total + p
    return LaurentPoly.zero(mode) if total is None else total


def coeff_to_json(c) -> list:
    """Exact coefficients as ``[[num, den], [num, den]]``; floats as ``[re, im]`` strings."""
    if isinstance(c, RationalComplex):
        return [[c.re.numerator, c.re.denominator], [c.im.numerator, c.im.denominator]]
    c = complex(c)
    return [repr(c.real), repr(c.imag)]


def poly_to_json(p: LaurentPoly) -> list:
    return [[k, *coeff_to_json(c)] for k, c in p.items()]
