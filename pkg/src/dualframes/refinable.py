"""Frequency-based standard refinable functions as truncated infinite products.

Stationary:      phi(xi) = prod_{n>=1} a(d^-n xi)
Nonstationary:   phi^j(xi) = prod_{n>=1} a^{j+n}(lambda_{j+n} / lambda_j * xi)

Truncating after ``M`` factors leaves the error

    |phi(xi) - P_M(xi)| = |P_M(xi)| |1 - prod_{n>M}(...)|
                        <= |P_M(xi)| exp(|xi| T_M) |xi| T_M

with ``T_M = sum_{m>M} |lambda_m| deg(a^m) ||a^m||_1`` (relative scales).  The
estimate rests on ``|1 - a(xi)| <= |xi| deg(a) ||a||`` (Bernstein) and
``|z| <= exp(|1 - z|)``.  Every value carries that bound plus a rounding term.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .filterbank import FilterBank, NonstationaryBank, scaled_mask_sum
from .laurent import DEFAULT_FLOAT_TOL, EXACT, LaurentPoly, check_dilation

DEFAULT_TRUNCATION = 30
EXP_LIMIT = 700.0
_EPS = np.finfo(float).eps


class RefinableRangeError(ValueError):
    """Raised when ``exp(C |xi|)`` would overflow for the requested frequencies."""


@dataclass(frozen=True)
class CertifiedValue:
    value: np.ndarray | complex
    tail_bound: np.ndarray | float

    def __iter__(self):
        yield self.value
        yield self.tail_bound


def _mask_is_normalized(p: LaurentPoly) -> bool:
    total = p.coefficient_sum()
    if p.mode == EXACT:
        return total == 1
    return abs(total - 1) < DEFAULT_FLOAT_TOL


@dataclass(frozen=True)
class RefinableSpec:
    """Either ``(a, d)`` for the stationary product or ``(bank, level)`` for the nonstationary one.

    ``tilde`` selects the dual masks of a nonstationary bank.
    """

    a: LaurentPoly | None = None
    d: int | None = None
    bank: NonstationaryBank | None = None
    level: int = 0
    truncation: int = DEFAULT_TRUNCATION
    tilde: bool = False

    def __post_init__(self):
        if (self.a is None) == (self.bank is None):
            raise ValueError("give either a stationary mask or a nonstationary bank")
        if self.truncation < 1:
            raise ValueError("truncation must be a positive integer")
        if self.a is not None:
            object.__setattr__(self, "d", check_dilation(self.d))
            if not _mask_is_normalized(self.a):
                raise ValueError("mask must satisfy sum_k a(k) = 1")
        else:
            if self.level < 0:
                raise ValueError("level must be nonnegative")
            if self.bank.tail_rule is None:
                raise ValueError("nonstationary refinable functions need a declared tail_rule")
            last = max(self.bank.n_levels, self.level + 1)
            for j in range(self.level + 1, last + 1):
                if not _mask_is_normalized(self._mask(j)):
                    raise ValueError(f"mask at level {j} must satisfy sum_k a(k) = 1")

    @classmethod
    def stationary(cls, a: LaurentPoly, d: int, truncation: int = DEFAULT_TRUNCATION) -> "RefinableSpec":
        return cls(a=a, d=d, truncation=truncation)

    @classmethod
    def nonstationary(cls, bank: NonstationaryBank, level: int = 0, truncation: int = DEFAULT_TRUNCATION,
                      tilde: bool = False) -> "RefinableSpec":
        return cls(bank=bank, level=level, truncation=truncation, tilde=tilde)

    @property
    def stationary_kind(self) -> bool:
        return self.a is not None

    def _mask(self, j: int) -> LaurentPoly:
        lv = self.bank.level(j)
        return lv.a_tilde if self.tilde else lv.a

    def with_truncation(self, m: int) -> "RefinableSpec":
        return RefinableSpec(self.a, self.d, self.bank, self.level, m, self.tilde)

    def factors(self, m: int | None = None) -> list[tuple[LaurentPoly, Fraction]]:
        """``(mask, scale)`` pairs; the truncated product is ``prod mask(scale * xi)``."""
        m = self.truncation if m is None else m
        if self.stationary_kind:
            return [(self.a, Fraction(1, self.d ** n)) for n in range(1, m + 1)]
        return [(self._mask(self.level + n), self.bank.lam_ratio(self.level, n)) for n in range(1, m + 1)]

    def constant(self) -> float:
        """``C = sum_{n>=1} |scale_n| deg ||mask||_1``."""
        return float(self._tail(0))

    def tail(self, m: int | None = None) -> float:
        """``T_M``: the same sum restricted to ``n > M``."""
        return float(self._tail(self.truncation if m is None else m))

    def _tail(self, m: int):
        if self.stationary_kind:
            w = self.a.degree() * self.a.l1_norm()
            d = abs(self.d)
            return w * Fraction(1, d ** m) / (d - 1)
        which = "a_tilde" if self.tilde else "a"
        return scaled_mask_sum(self.bank, self.level + m + 1, which, base=self.level)

    @property
    def refine_dilation(self) -> int:
        return self.d if self.stationary_kind else self.bank.dilation(self.level + 1)

    @property
    def refine_mask(self) -> LaurentPoly:
        return self.a if self.stationary_kind else self._mask(self.level + 1)

    def child(self) -> "RefinableSpec":
        """Product description on the right-hand side of the refinement equation."""
        if self.stationary_kind:
            return self
        return RefinableSpec(bank=self.bank, level=self.level + 1, truncation=self.truncation, tilde=self.tilde)


def eval_truncated(spec: RefinableSpec, xi) -> CertifiedValue:
    """Truncated product with a certified bound on ``|phi(xi) - value|``."""
    x = np.asarray(xi, dtype=float)
    ax = np.abs(x)
    c = spec.constant()
    if x.size and c * float(np.max(ax)) > EXP_LIMIT:
        raise RefinableRangeError(
            f"|xi| up to {float(np.max(ax)):.6g} exceeds the certified range {EXP_LIMIT / c:.6g}")
    val = np.ones(x.shape, dtype=complex)
    running = np.ones(x.shape)
    rel_round = np.zeros(x.shape)
    factors = spec.factors()
    for mask, sc in factors:
        s = float(sc)
        val = val * mask.evaluate(s * x)
        running = np.maximum(running, np.abs(val))
        deg = mask.degree()
        rel_round = rel_round + 4 * _EPS * float(mask.l1_norm()) * (1.0 + deg * abs(s) * ax)
    t = spec.tail()
    bound = np.abs(val) * np.exp(ax * t) * ax * t + len(factors) * 4 * _EPS * running + rel_round * running
    bound = np.where(ax == 0, 0.0, bound)
    if np.ndim(xi) == 0:
        return CertifiedValue(complex(val), float(bound))
    return CertifiedValue(val, bound)


# generators


@dataclass(frozen=True)
class Generator:
    """``g(xi) = multiplier(xi/scale) * phi(xi/scale)`` with ``phi`` given by ``spec``.

    ``scale = 1`` gives ``theta * phi``; ``scale = d`` gives ``psi`` with
    ``psi(d xi) = b(xi) phi(xi)``.
    """

    multiplier: LaurentPoly
    spec: RefinableSpec
    scale: int = 1
    label: str = ""

    support = None

    def evaluate(self, xi) -> CertifiedValue:
        x = np.asarray(xi, dtype=float)
        y = x / self.scale
        phi, pb = eval_truncated(self.spec, y)
        m = self.multiplier.evaluate(y)
        slack = 4 * _EPS * float(self.multiplier.l1_norm())
        val = m * phi
        bound = (np.abs(m) + slack) * pb + slack * np.abs(phi)
        return CertifiedValue(val, bound)

    def __call__(self, xi):
        return self.evaluate(xi).value


def eval_generator(gen, xi) -> CertifiedValue:
    """Generic entry point; non-certified callables get a zero bound."""
    if hasattr(gen, "evaluate"):
        return gen.evaluate(xi)
    v = np.asarray(gen(xi), dtype=complex)
    return CertifiedValue(v, np.zeros(v.shape))


@dataclass(frozen=True)
class FunctionGenerator:
    """Wraps an explicit function of ``xi``; ``support`` is an optional closed interval."""

    fn: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] | None = None
    label: str = ""

    def evaluate(self, xi) -> CertifiedValue:
        x = np.asarray(xi, dtype=float)
        v = np.asarray(self.fn(x), dtype=complex) * np.ones(x.shape)
        return CertifiedValue(v, np.zeros(x.shape))

    def __call__(self, xi):
        return self.evaluate(xi).value


def constant_generator(c: complex = 1.0) -> FunctionGenerator:
    support = (0.0, 0.0) if c == 0 else None
    return FunctionGenerator(lambda x: np.full(np.shape(x), c, dtype=complex), support,
                             label=f"const({c})")


def zero_generator() -> FunctionGenerator:
    return constant_generator(0.0)


@dataclass(frozen=True)
class GeneratorSet:
    phi: tuple
    psi: tuple
    phi_tilde: tuple
    psi_tilde: tuple

    def __post_init__(self):
        for name in ("phi", "psi", "phi_tilde", "psi_tilde"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.phi) != len(self.phi_tilde) or len(self.psi) != len(self.psi_tilde):
            raise ValueError("primal and dual generator lists must have equal lengths")


def generator_set(bank: FilterBank, truncation: int = DEFAULT_TRUNCATION) -> GeneratorSet:
    """``phi^l = theta^l phi``, ``psi^l(d .) = b^l phi`` and their duals."""
    spec = RefinableSpec.stationary(bank.a, bank.d, truncation)
    spec_t = RefinableSpec.stationary(bank.a_tilde, bank.d, truncation)
    th, tht = bank.theta_factors()
    return GeneratorSet(
        phi=[Generator(t, spec, 1, f"phi{i + 1}") for i, t in enumerate(th)],
        psi=[Generator(b, spec, bank.d, f"psi{i + 1}") for i, b in enumerate(bank.b)],
        phi_tilde=[Generator(t, spec_t, 1, f"phi~{i + 1}") for i, t in enumerate(tht)],
        psi_tilde=[Generator(b, spec_t, bank.d, f"psi~{i + 1}") for i, b in enumerate(bank.b_tilde)],
    )


def nonstationary_phi_layer(bank: NonstationaryBank, j: int, truncation: int = DEFAULT_TRUNCATION):
    """``Phi^j = {theta^{j+1,l} phi^j}`` and its dual."""
    spec = RefinableSpec.nonstationary(bank, j, truncation)
    spec_t = RefinableSpec.nonstationary(bank, j, truncation, tilde=True)
    lv = bank.levels[j] if j < bank.n_levels else None
    if lv is not None and lv.theta_pairs is not None:
        th = [p for p, _ in lv.theta_pairs]
        tht = [q for _, q in lv.theta_pairs]
    else:
        th, tht = [LaurentPoly.constant(1, bank.mode)], [bank.theta(j + 1)]
    return ([Generator(t, spec, 1, f"phi^{j},{i + 1}") for i, t in enumerate(th)],
            [Generator(t, spec_t, 1, f"phi~^{j},{i + 1}") for i, t in enumerate(tht)])


def nonstationary_psi_layer(bank: NonstationaryBank, j: int, truncation: int = DEFAULT_TRUNCATION):
    """``psi^{j,l}(d_{j+1} .) = b^{j+1,l} phi^{j+1}`` and its dual."""
    lv = bank.level(j + 1)
    spec = RefinableSpec.nonstationary(bank, j + 1, truncation)
    spec_t = RefinableSpec.nonstationary(bank, j + 1, truncation, tilde=True)
    return ([Generator(b, spec, lv.d, f"psi^{j},{i + 1}") for i, b in enumerate(lv.b)],
            [Generator(b, spec_t, lv.d, f"psi~^{j},{i + 1}") for i, b in enumerate(lv.b_tilde)])


# checks and sampling


@dataclass(frozen=True)
class RefinementCheck:
    residual: float
    bound: float
    pointwise_ok: bool

    @property
    def ok(self) -> bool:
        return self.pointwise_ok


def verify_refinement(spec: RefinableSpec, xi) -> RefinementCheck:
    """``max |phi(d xi) - a(xi) phi_child(xi)|`` against the propagated certificates."""
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    d = spec.refine_dilation
    lhs, lb = eval_truncated(spec, d * x)
    rhs, rb = eval_truncated(spec.child(), x)
    m = spec.refine_mask.evaluate(x)
    res = np.abs(lhs - m * rhs)
    bound = lb + np.abs(m) * rb + 8 * _EPS * (np.abs(lhs) + np.abs(m * rhs))
    return RefinementCheck(float(np.max(res)), float(np.max(bound)), bool(np.all(res <= bound)))


@dataclass(frozen=True)
class FrequencySample:
    xi: np.ndarray
    values: np.ndarray
    tail_bound: np.ndarray

    def rows(self):
        for x, v, b in zip(self.xi, self.values, self.tail_bound):
            yield float(x), float(v.real), float(v.imag), float(b)

    def to_csv(self, fh=None) -> str | None:
        """Columns ``xi, re, im, tail_bound``; returns the text when no handle is given."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "re", "im", "tail_bound"])
        for row in self.rows():
            w.writerow([repr(v) for v in row])
        return buf.getvalue() if fh is None else None


def sample_grid(obj, xi_min: float, xi_max: float, n: int) -> FrequencySample:
    """Uniform grid of ``n`` points on ``[xi_min, xi_max]`` with per-point certificates."""
    if n < 2:
        raise ValueError("need at least two samples")
    if not xi_min < xi_max:
        raise ValueError("xi_min must be smaller than xi_max")
    xi = np.linspace(xi_min, xi_max, n)
    if isinstance(obj, RefinableSpec):
        v, b = eval_truncated(obj, xi)
    else:
        v, b = eval_generator(obj, xi)
    return FrequencySample(xi, np.asarray(v), np.asarray(b))


def support_of(gen) -> tuple[float, float] | None:
    return getattr(gen, "support", None)


__all__: Sequence[str] = (
    "CertifiedValue", "FrequencySample", "FunctionGenerator", "Generator", "GeneratorSet",
    "RefinableRangeError", "RefinableSpec", "RefinementCheck", "constant_generator",
    "eval_generator", "eval_truncated", "generator_set", "nonstationary_phi_layer",
    "nonstationary_psi_layer", "sample_grid", "support_of", "verify_refinement", "zero_generator",
)
