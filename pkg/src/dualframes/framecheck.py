"""Numerical validation of frequency-based dual wavelet frames in the distribution space.

Test functions are smooth bumps; pairings, series, partial sums and the
characterization identities are evaluated with trapezoid quadrature on dyadically
refined grids.  Generators come from :mod:`refinable` and contribute their
certified bounds to every reported uncertainty.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np
from scipy.signal import czt

from .filterbank import FilterBank, NonstationaryBank
from .refinable import (
    DEFAULT_TRUNCATION,
    FunctionGenerator,
    GeneratorSet,
    eval_generator,
    generator_set,
    nonstationary_phi_layer,
    nonstationary_psi_layer,
)

QUAD_TOL = 1e-9
MAX_POINTS = 2 ** 22
SHELL_TOL = 1e-10
BRACKET_TOL = 1e-7
CHAR_TOL = 1e-8
_BLOCK = 2048
_TWO_PI = 2 * math.pi


class QuadratureError(RuntimeError):
    """Raised when dyadic refinement reaches the point limit without converging."""


class RationalityError(ValueError):
    """Raised when a real dilation has no declared rationality structure."""


# test functions


@dataclass(frozen=True)
class TestFunction:
    """Product of bumps ``exp(1 - 1/(1 - ((xi - c)/r)^2))`` times a constant weight."""

    __test__ = False

    bumps: tuple[tuple[float, float], ...]
    weight: complex = 1.0

    @classmethod
    def bump(cls, center: float, radius: float) -> "TestFunction":
        if not radius > 0:
            raise ValueError("bump radius must be positive")
        return cls(((float(center), float(radius)),))

    @classmethod
    def product(cls, *factors: "TestFunction") -> "TestFunction":
        bumps = tuple(b for f in factors for b in f.bumps)
        weight = 1.0
        for f in factors:
            weight *= f.weight
        return cls(bumps, weight)

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls((), 0.0)

    @classmethod
    def parse(cls, text: str) -> "TestFunction":
        """``bump:c,r`` or ``bump:c,r*bump:c2,r2`` or ``zero``."""
        text = text.strip()
        if text == "zero":
            return cls.zero()
        parts = []
        for piece in text.split("*"):
            kind, _, args = piece.partition(":")
            if kind.strip() != "bump":
                raise ValueError(f"unknown test function {piece!r}")
            try:
                c, r = (float(v) for v in args.split(","))
            except ValueError as exc:
                raise ValueError(f"bump needs 'bump:center,radius', got {piece!r}") from exc
            parts.append(cls.bump(c, r))
        return cls.product(*parts)

    @property
    def is_zero(self) -> bool:
        return self.weight == 0 or self.support is None

    @property
    def support(self) -> tuple[float, float] | None:
        if self.weight == 0:
            return None
        if not self.bumps:
            raise ValueError("a test function needs at least one bump")
        lo = max(c - r for c, r in self.bumps)
        hi = min(c + r for c, r in self.bumps)
        return (lo, hi) if lo < hi else None

    def evaluate(self, xi) -> np.ndarray:
        x = np.asarray(xi, dtype=float)
        out = np.full(x.shape, complex(self.weight))
        if self.weight == 0:
            return out
        for c, r in self.bumps:
            t = (x - c) / r
            inside = np.abs(t) < 1
            val = np.zeros(x.shape)
            ti = t[inside]
            val[inside] = np.exp(1 - 1 / (1 - ti * ti))
            out = out * val
        return out

    __call__ = evaluate


# quadrature


@dataclass(frozen=True)
class QuadResult:
    values: np.ndarray
    error: float
    points: int


def _fourier_sums(hw: np.ndarray, lo: float, dx: float, omega: float, k_first: int, count: int) -> np.ndarray:
    """``sum_n hw_n exp(i omega k x_n)`` with ``x_n = lo + n dx`` for consecutive ``k``."""
    n = np.arange(hw.size)
    ks = k_first + np.arange(count)
    if omega == 0 or count == 1 and k_first == 0:
        return np.full(count, hw.sum())
    if hw.size * count <= 1 << 18:
        ph = np.exp(1j * omega * np.outer(ks, lo + n * dx))
        return ph @ hw
    out = np.empty(count, dtype=complex)
    w = np.exp(1j * omega * dx)
    for start in range(0, count, _BLOCK):
        m = min(_BLOCK, count - start)
        kb = k_first + start
        y = hw * np.exp(1j * omega * kb * (n * dx))
        out[start:start + m] = czt(y, m=m, w=w, a=1.0)
    return out * np.exp(1j * omega * ks * lo)


def modulated_trapezoid(integrand: Callable, interval: tuple[float, float], omega: float = 0.0,
                        k_first: int = 0, count: int = 1, tol: float = QUAD_TOL,
                        max_points: int = MAX_POINTS) -> QuadResult:
    """``int h(xi) exp(i omega k xi) dxi`` over ``interval`` for ``k = k_first .. k_first + count - 1``.

    ``integrand(x)`` returns ``(values, abs_error_bound)``.  The grid is halved
    until successive estimates differ by less than ``tol`` for every ``k``; the
    reported error adds that difference to the integrated bound.
    """
    lo, hi = interval
    width = hi - lo
    kmax = max(abs(k_first), abs(k_first + count - 1))
    # start at least at Nyquist for the fastest modulation
    n = 64
    while n < 4 * abs(omega) * kmax * width / _TWO_PI:
        n *= 2
    prev = None
    while True:
        if n + 1 > max_points:
            raise QuadratureError(f"trapezoid did not converge to {tol:g} with {max_points} points")
        x = np.linspace(lo, hi, n + 1)
        dx = width / n
        wts = np.full(n + 1, dx)
        wts[0] = wts[-1] = dx / 2
        val, err = integrand(x)
        cur = _fourier_sums(np.asarray(val, dtype=complex) * wts, lo, dx, omega, k_first, count)
        if prev is not None:
            diff = float(np.max(np.abs(cur - prev))) if count else 0.0
            if diff < tol:
                bound = float(np.sum(np.asarray(err) * wts))
                return QuadResult(cur, diff + bound, n + 1)
        prev = cur
        n *= 2


def _gen_values(gen, x):
    v, b = eval_generator(gen, x)
    return np.asarray(v, dtype=complex), np.asarray(b, dtype=float)


def _pairing_integrand(f: TestFunction, g, lam: float, shift: float):
    def h(x):
        if isinstance(g, TestFunction):
            gv, gb = g(lam * x - shift), 0.0
        else:
            gv, gb = _gen_values(g, lam * x - shift)
        fv = f(x)
        return fv * np.conj(gv), np.abs(fv) * gb
    return h


def pairing_series(f: TestFunction, g, lam, ks_first: int, count: int, translation: float = 0.0,
                   tol: float = QUAD_TOL) -> QuadResult:
    """``<f, g_{lam; t, n}>`` for ``n = ks_first .. ks_first + count - 1`` at fixed translation ``t``."""
    lam = float(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if f.is_zero or _is_zero_gen(g):
        return QuadResult(np.zeros(count, dtype=complex), 0.0, 0)
    q = modulated_trapezoid(_pairing_integrand(f, g, lam, translation), f.support, lam, ks_first, count, tol)
    s = math.sqrt(abs(lam))
    return QuadResult(q.values * s, q.error * s, q.points)


def pairing(f: TestFunction, g, lam, k: float = 0, n: int = 0, tol: float = QUAD_TOL) -> complex:
    """``<f, g_{lam;k,n}> = int f(xi) conj(|lam|^(1/2) exp(-i n lam xi) g(lam xi - k)) dxi``."""
    return complex(pairing_series(f, g, lam, n, 1, translation=k, tol=tol).values[0])


def _is_zero_gen(g) -> bool:
    if isinstance(g, TestFunction):
        return g.is_zero
    mult = getattr(g, "multiplier", None)
    if mult is not None and mult.is_zero:
        return True
    sup = getattr(g, "support", None)
    return sup is not None and sup[0] == sup[1]


# series over k


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    last_term: float
    error: float
    kmax: int

    def __complex__(self):
        return complex(self.value)


def _layer_terms(f, g, gen, gen_t, lam, kmax, tol):
    pf = pairing_series(f, gen, lam, -kmax, 2 * kmax + 1, tol=tol)
    pg = pairing_series(g, gen_t, lam, -kmax, 2 * kmax + 1, tol=tol)
    terms = pf.values * np.conj(pg.values)
    err = np.abs(pf.values) * pg.error + pf.error * np.abs(pg.values) + pf.error * pg.error
    return terms, err


def bracket_series(f: TestFunction, g: TestFunction, psi, psi_tilde, lam, kmax: int,
                   tol: float = QUAD_TOL) -> SeriesResult:
    """``sum_{|k| <= kmax} <f, psi_{lam;0,k}> <psi~_{lam;0,k}, g>``."""
    if float(lam) == 0:
        raise ValueError("lambda must be nonzero")
    terms, err = _layer_terms(f, g, psi, psi_tilde, lam, int(kmax), tol)
    last = float(abs(terms[0]) + abs(terms[-1])) if kmax > 0 else float(abs(terms[0]))
    return SeriesResult(complex(terms.sum()), last, float(err.sum()), int(kmax))


@dataclass(frozen=True)
class LayerSum:
    value: complex
    error: float
    kmax: int


def layer_sum(f, g, gens: Sequence, gens_t: Sequence, lam, tol: float = QUAD_TOL,
              shell_tol: float = SHELL_TOL) -> LayerSum:
    """Sum of ``sum_k <f, g_{lam;0,k}> <g~_{lam;0,k}, g>`` over a generator layer.

    ``kmax`` doubles until ``patience`` consecutive outer shells ``{k, -k}`` each
    contribute less than ``shell_tol * min(1, |lam|)``; with ``patience =
    max(8, ceil(1/|lam|))`` this covers the stretch of ``k`` over which the
    pairings change appreciably at scale ``lam``.
    """
    lam_f = float(lam)
    if lam_f == 0:
        raise ValueError("lambda must be nonzero")
    total, error, reach = 0j, 0.0, 0
    if f.is_zero or g.is_zero:
        return LayerSum(0j, 0.0, 0)
    threshold = shell_tol * min(1.0, abs(lam_f))
    patience = max(8, math.ceil(1 / abs(lam_f)))
    for gen, gen_t in zip(gens, gens_t):
        if _is_zero_gen(gen) or _is_zero_gen(gen_t):
            continue
        kmax = max(2 * patience, math.ceil(16 / abs(lam_f)))
        while True:
            terms, err = _layer_terms(f, g, gen, gen_t, lam_f, kmax, tol)
            mag = np.abs(terms)
            shells = mag[kmax:][1:] + mag[:kmax][::-1]
            if np.all(shells[-patience:] < threshold):
                break
            kmax *= 2
            if 2 * kmax + 1 > MAX_POINTS:
                raise QuadratureError("k-series did not settle within the point limit")
        total += terms.sum()
        error += float(err.sum()) + patience * threshold
        reach = max(reach, kmax)
    return LayerSum(complex(total), error, reach)


def _shift_range(f_sup, g_sup, lam: float) -> range:
    # supp f meets supp g - 2 pi k / lam
    s_lo, s_hi = g_sup[0] - f_sup[1], g_sup[1] - f_sup[0]
    a, b = sorted((s_lo * lam / _TWO_PI, s_hi * lam / _TWO_PI))
    return range(math.ceil(a), math.floor(b) + 1)


def bracket_integral(f: TestFunction, g: TestFunction, psi, psi_tilde, lam,
                     tol: float = QUAD_TOL) -> SeriesResult:
    """``2 pi int sum_k f(xi) conj(g(xi + 2 pi k/lam)) conj(psi(lam xi)) psi~(lam xi + 2 pi k) dxi``.

    Only the finitely many ``k`` for which the supports of ``f`` and the shifted
    ``g`` meet enter the sum.
    """
    lam = float(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if f.is_zero or g.is_zero:
        return SeriesResult(0j, 0.0, 0.0, 0)
    ks = _shift_range(f.support, g.support, lam)
    if not ks:
        return SeriesResult(0j, 0.0, 0.0, 0)

    def h(x):
        pv, pb = _gen_values(psi, lam * x)
        fv = f(x)
        tot = np.zeros(x.shape, dtype=complex)
        err = np.zeros(x.shape)
        for k in ks:
            gv = g(x + _TWO_PI * k / lam)
            qv, qb = _gen_values(psi_tilde, lam * x + _TWO_PI * k)
            tot += fv * np.conj(gv) * np.conj(pv) * qv
            err += np.abs(fv * gv) * (np.abs(pv) * qb + pb * np.abs(qv) + pb * qb)
        return tot, err

    q = modulated_trapezoid(h, f.support, tol=tol)
    return SeriesResult(complex(_TWO_PI * q.values[0]), 0.0, _TWO_PI * q.error, max(abs(ks[0]), abs(ks[-1])))


@dataclass(frozen=True)
class BracketReport:
    series: complex
    integral: complex
    difference: float
    tolerance: float
    uncertainty: float
    passed: bool

    def to_dict(self) -> dict:
        return {"series": [self.series.real, self.series.imag],
                "integral": [self.integral.real, self.integral.imag],
                "difference": self.difference, "tolerance": self.tolerance,
                "uncertainty": self.uncertainty, "verdict": "pass" if self.passed else "fail"}


def check_bracket_identity(f, g, psi, psi_tilde, lam, kmax: int, tol: float = BRACKET_TOL) -> BracketReport:
    s = bracket_series(f, g, psi, psi_tilde, lam, kmax)
    i = bracket_integral(f, g, psi, psi_tilde, lam)
    diff = abs(s.value - i.value)
    unc = s.error + i.error
    return BracketReport(s.value, i.value, diff, tol, unc, diff < max(tol, unc))


# systems


def _as_scale(d):
    if isinstance(d, (int, Fraction)):
        return Fraction(d)
    return float(d)


class SystemSpec:
    """Nonhomogeneous wavelet system: ``Phi`` at scale ``lambda_J`` and ``Psi^j`` at ``lambda_j``, ``j >= J``.

    Stationary systems use ``lambda_j = d^-j`` and fixed generator lists;
    nonstationary ones take ``lambda_j`` and the layers from a
    :class:`NonstationaryBank`.
    """

    def __init__(self, scale_fn: Callable[[int], Any], phi_fn: Callable[[int], tuple],
                 psi_fn: Callable[[int], tuple], d=None, irrational: bool = False,
                 stationary: bool = True, min_level: int | None = None, name: str = ""):
        self._scale = scale_fn
        self._phi = phi_fn
        self._psi = psi_fn
        self.d = d
        self.irrational = irrational
        self.is_stationary = stationary
        self.min_level = min_level
        self.name = name

    @classmethod
    def stationary(cls, gens: GeneratorSet, d, irrational: bool = False, name: str = "") -> "SystemSpec":
        d = _as_scale(d)
        if not abs(d) > 1:
            raise ValueError("the dilation must satisfy |d| > 1")
        phi = (list(gens.phi), list(gens.phi_tilde))
        psi = (list(gens.psi), list(gens.psi_tilde))
        return cls(lambda j: d ** (-j), lambda j: phi, lambda j: psi, d=d, irrational=irrational,
                   name=name)

    @classmethod
    def from_bank(cls, bank: FilterBank, truncation: int = DEFAULT_TRUNCATION) -> "SystemSpec":
        return cls.stationary(generator_set(bank, truncation), bank.d, name=bank.name)

    @classmethod
    def nonstationary(cls, bank: NonstationaryBank, truncation: int = DEFAULT_TRUNCATION) -> "SystemSpec":
        if bank.tail_rule is None:
            raise ValueError("a nonstationary system needs a declared tail_rule")
        cache: dict = {}

        def memo(kind, j, fn):
            key = (kind, j)
            if key not in cache:
                cache[key] = fn(bank, j, truncation)
            return cache[key]

        return cls(bank.lam,
                   lambda j: memo("phi", j, nonstationary_phi_layer),
                   lambda j: memo("psi", j, nonstationary_psi_layer),
                   stationary=False, min_level=0, name=bank.name)

    def _check_level(self, j: int):
        if self.min_level is not None and j < self.min_level:
            raise ValueError(f"levels start at {self.min_level}, got {j}")

    def scale(self, j: int):
        self._check_level(j)
        return self._scale(j)

    def phi_layer(self, j: int) -> tuple[list, list]:
        self._check_level(j)
        return self._phi(j)

    def psi_layer(self, j: int) -> tuple[list, list]:
        self._check_level(j)
        return self._psi(j)

    def self_dual(self) -> "SystemSpec":
        phi, psi = self._phi, self._psi
        return SystemSpec(self._scale, lambda j: (phi(j)[0], phi(j)[0]), lambda j: (psi(j)[0], psi(j)[0]),
                          d=self.d, irrational=self.irrational, stationary=self.is_stationary,
                          min_level=self.min_level, name=self.name)

    def zeroed(self) -> "SystemSpec":
        """Same scales with every generator replaced by zero."""
        z = FunctionGenerator(lambda x: np.zeros(np.shape(x)), (0.0, 0.0), "zero")

        def blank(layer):
            return [z] * len(layer[0]), [z] * len(layer[1])

        phi, psi = self._phi, self._psi
        return SystemSpec(self._scale, lambda j: blank(phi(j)), lambda j: blank(psi(j)), d=self.d,
                          irrational=self.irrational, stationary=self.is_stationary,
                          min_level=self.min_level, name=self.name)


def indicator(lo: float, hi: float, holes: Sequence[tuple[float, float]] = ()) -> FunctionGenerator:
    """Characteristic function of ``[lo, hi]`` minus the given open intervals."""
    def fn(x):
        v = ((x >= lo) & (x <= hi)).astype(float)
        for a, b in holes:
            v[(x > a) & (x < b)] = 0.0
        return v
    return FunctionGenerator(fn, (lo, hi), f"chi[{lo:g},{hi:g}]")


def shannon_system(d, irrational: bool = False) -> SystemSpec:
    """``phi = chi_[-pi, pi]``, ``psi = chi_[-d pi, d pi] \\ [-pi, pi]`` for ``1 < d <= 2``."""
    df = float(d)
    if not 1 < df <= 2:
        raise ValueError("the Shannon-type pair needs 1 < d <= 2")
    phi = indicator(-math.pi, math.pi)
    psi = indicator(-df * math.pi, df * math.pi, holes=[(-math.pi, math.pi)])
    gens = GeneratorSet([phi], [psi], [phi], [psi])
    return SystemSpec.stationary(gens, d, irrational=irrational, name=f"shannon(d={d})")


# partial sums and duality


@dataclass(frozen=True)
class PartialSum:
    value: complex
    error: float


def _layers(system: SystemSpec, f, g, J: int, j_stop: int, tol: float):
    lam = system.scale(J)
    phi, phit = system.phi_layer(J)
    first = layer_sum(f, g, phi, phit, lam, tol)
    yield first
    for j in range(J, j_stop):
        psi, psit = system.psi_layer(j)
        yield layer_sum(f, g, psi, psit, system.scale(j), tol)


def partial_sum(system: SystemSpec, f, g, J: int, J_prime: int, tol: float = QUAD_TOL) -> PartialSum:
    """``S_J^{J'}(f, g)``: the ``Phi`` layer at ``lambda_J`` plus ``Psi`` layers ``J .. J'-1``."""
    if not J_prime > J:
        raise ValueError("J' must exceed J")
    total, err = 0j, 0.0
    for layer in _layers(system, f, g, J, J_prime, tol):
        total += layer.value
        err += layer.error
    return PartialSum(total, err)


def inner_product(f: TestFunction, g: TestFunction, tol: float = QUAD_TOL) -> complex:
    """``<f, g> = int f conj(g)``."""
    if f.is_zero or g.is_zero:
        return 0j
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if not lo < hi:
        return 0j
    q = modulated_trapezoid(lambda x: (f(x) * np.conj(g(x)), np.zeros(x.shape)), (lo, hi), tol=tol)
    return complex(q.values[0])


@dataclass(frozen=True)
class ConvergenceRow:
    j_prime: int
    s: complex
    target: complex
    abs_err: float
    uncertainty: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    tolerance: float
    verdict: str = "fail"
    J: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def errors(self) -> list[float]:
        return [r.abs_err for r in self.rows]

    def to_csv(self, fh=None) -> str | None:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["J_prime", "S_re", "S_im", "target_re", "target_im", "abs_err"])
        for r in self.rows:
            w.writerow([r.j_prime, repr(r.s.real), repr(r.s.imag), repr(r.target.real),
                        repr(r.target.imag), repr(r.abs_err)])
        return buf.getvalue() if fh is None else None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "tolerance": self.tolerance, "J": self.J,
                "rows": [{"J_prime": r.j_prime, "S": [r.s.real, r.s.imag],
                          "target": [r.target.real, r.target.imag], "abs_err": r.abs_err,
                          "uncertainty": r.uncertainty} for r in self.rows]}


def check_duality(system: SystemSpec, f, g, J: int, J_prime_max: int, tol: float = 1e-6,
                  quad_tol: float = QUAD_TOL) -> ConvergenceTable:
    """Tabulate ``S_J^{J'}`` for ``J' = J+1 .. J'_max`` against ``2 pi <f, g>``.

    Pass iff the last error is below ``tol`` and the errors of the last three
    rows do not increase beyond their uncertainty.
    """
    if not J_prime_max > J:
        raise ValueError("J'_max must exceed J")
    target = _TWO_PI * inner_product(f, g, quad_tol)
    rows = []
    total, err = 0j, 0.0
    layers = _layers(system, f, g, J, J_prime_max, quad_tol)
    first = next(layers)
    total, err = first.value, first.error
    for jp, layer in zip(range(J + 1, J_prime_max + 1), layers):
        total += layer.value
        err += layer.error
        rows.append(ConvergenceRow(jp, total, target, abs(total - target), err))
    last = rows[-3:]
    settled = all(b.abs_err <= a.abs_err + b.uncertainty for a, b in zip(last, last[1:]))
    ok = rows[-1].abs_err < tol and settled
    return ConvergenceTable(rows, tol, "pass" if ok else "fail", J)


# characterization residuals


@dataclass
class CheckEntry:
    identity: str
    k: Any
    max_abs: float
    uncertainty: float
    passed: bool
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {"identity": self.identity, "k": str(self.k), "max_abs": self.max_abs,
                "uncertainty": self.uncertainty, "passed": self.passed, "vacuous": self.vacuous}


@dataclass
class CharacterizationReport:
    verdict: str
    entries: list[CheckEntry]
    probe: list[tuple[int, float]]
    probe_status: str
    tolerance: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def max_residual(self, identity: str | None = None) -> float:
        vals = [e.max_abs for e in self.entries if identity is None or e.identity == identity]
        return max(vals, default=0.0)

    def residual(self, identity: str, k) -> float:
        for e in self.entries:
            if e.identity == identity and e.k == k:
                return e.max_abs
        raise KeyError((identity, k))

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "tolerance": self.tolerance, "probe_status": self.probe_status,
                "probe": [[j, v] for j, v in self.probe], "notes": list(self.notes),
                "entries": [e.to_dict() for e in self.entries]}


def default_grid(n: int = 512, lo: float = -math.pi, hi: float = math.pi) -> np.ndarray:
    """``n`` midpoints of a uniform partition of ``[lo, hi]`` (avoids the endpoints and 0)."""
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5)


def _bracket(gens, gens_t, x, y):
    tot = np.zeros(np.shape(x), dtype=complex)
    err = np.zeros(np.shape(x))
    for g, gt in zip(gens, gens_t):
        u, bu = _gen_values(g, x)
        v, bv = _gen_values(gt, y)
        tot += np.conj(u) * v
        err += np.abs(u) * bv + bu * np.abs(v) + bu * bv
    return tot, err


def _entry(identity, k, res, err, tol) -> CheckEntry:
    m = float(np.max(np.abs(res))) if np.size(res) else 0.0
    u = float(np.max(err)) if np.size(err) else 0.0
    return CheckEntry(identity, k, m, u, m <= max(tol, u))


def _probe_status(values: Sequence[float]) -> str:
    if all(b <= a for a, b in zip(values, values[1:])):
        return "decreasing"
    if values and values[-1] > values[0]:
        return "growing"
    return "inconclusive"


def _limit_probe(phi, phit, scale_fn, grid, jmax):
    out = []
    for j in range(1, jmax + 1):
        x = float(scale_fn(j)) * grid
        v, _ = _bracket(phi, phit, x, x)
        out.append((j, float(np.max(np.abs(v - 1)))))
    return out


def _finish(entries, probe, tol, notes=None) -> CharacterizationReport:
    status = _probe_status([v for _, v in probe])
    ok = all(e.passed for e in entries) and status != "growing"
    notes = list(notes or [])
    if status == "inconclusive":
        notes.append("limit probe is not monotone; inconclusive for the distributional limit")
    return CharacterizationReport("pass" if ok else "fail", entries, probe, status, tol, notes)


def check_characterization(system: SystemSpec, grid=None, kmax: int = 8, j_probe_max: int = 8,
                           tol: float = CHAR_TOL) -> CharacterizationReport:
    """Residuals of the two-scale bracket identities for an integer dilation.

    ``eq2``: ``[Phi,Phi~](d xi, d(xi+2 pi k)) + [Psi,Psi~](...) = [Phi,Phi~](xi, xi+2 pi k)`` for ``|k| <= kmax``.
    ``eq3``: ``[Phi,Phi~](xi, xi+2 pi k) + [Psi,Psi~](xi, xi+2 pi k) = 0`` for ``k`` not in ``dZ``.
    The limit probe tabulates ``max |[Phi,Phi~](d^-j xi, d^-j xi) - 1|``.
    """
    d = system.d
    if not system.is_stationary or d is None or Fraction(d).denominator != 1 or abs(d) < 2:
        raise ValueError("check_characterization needs a stationary system with integer |d| >= 2")
    d = int(d)
    x = default_grid() if grid is None else np.asarray(grid, dtype=float)
    phi, phit = system.phi_layer(0)
    psi, psit = system.psi_layer(0)
    entries = []
    for k in range(-kmax, kmax + 1):
        y = x + _TWO_PI * k
        lhs1, e1 = _bracket(phi, phit, d * x, d * y)
        lhs2, e2 = _bracket(psi, psit, d * x, d * y)
        rhs, e3 = _bracket(phi, phit, x, y)
        entries.append(_entry("eq2", k, lhs1 + lhs2 - rhs, e1 + e2 + e3, tol))
    for k in range(-kmax, kmax + 1):
        if k % d == 0:
            continue
        y = x + _TWO_PI * k
        a, e1 = _bracket(phi, phit, x, y)
        b, e2 = _bracket(psi, psit, x, y)
        entries.append(_entry("eq3", k, a + b, e1 + e2, tol))
    probe = _limit_probe(phi, phit, system.scale, x, j_probe_max)
    return _finish(entries, probe, tol)


def integer_multiples(d, m: int, irrational: bool) -> bool:
    """Whether ``m`` lies in ``Z`` intersected with ``dZ``."""
    if irrational:
        return m == 0
    return (Fraction(m) / Fraction(d)).denominator == 1


def check_characterization_real(system: SystemSpec, grid=None, kmax: int = 8, j_probe_max: int = 8,
                                tol: float = CHAR_TOL) -> CharacterizationReport:
    """Residuals for a real dilation ``|d| > 1`` with declared rationality.

    ``I1``: for ``k`` in ``Z`` and ``dZ``,
    ``[Phi](xi, xi+2 pi k) + [Psi](xi, xi+2 pi k) = [Phi](xi/d, (xi+2 pi k)/d)``;
    ``I2``: for ``k`` in ``Z \\ dZ`` the left side vanishes;
    ``I3``: for ``dm`` not an integer, ``[Phi](xi, xi + 2 pi m) = 0``.
    For rational ``d = p/q`` the sets are ``pZ``, ``Z \\ pZ`` and ``m`` not in ``qZ``;
    an irrational ``d`` gives ``{0}``, ``Z \\ {0}`` and ``m != 0``.
    """
    d = system.d
    if d is None or not system.is_stationary:
        raise ValueError("check_characterization_real needs a stationary system")
    irrational = system.irrational
    if not isinstance(d, Fraction) and not irrational:
        raise RationalityError("declare the dilation as an exact rational or as irrational")
    x = default_grid() if grid is None else np.asarray(grid, dtype=float)
    df = float(d)
    phi, phit = system.phi_layer(0)
    psi, psit = system.psi_layer(0)
    entries = []
    for k in range(-kmax, kmax + 1):
        y = x + _TWO_PI * k
        a, e1 = _bracket(phi, phit, x, y)
        b, e2 = _bracket(psi, psit, x, y)
        if integer_multiples(d, k, irrational):
            c, e3 = _bracket(phi, phit, x / df, y / df)
            entries.append(_entry("I1", k, a + b - c, e1 + e2 + e3, tol))
        else:
            entries.append(_entry("I2", k, a + b, e1 + e2, tol))
    for m in range(-kmax, kmax + 1):
        if irrational:
            if m == 0:
                continue
        elif (Fraction(d) * m).denominator == 1:
            continue
        a, e1 = _bracket(phi, phit, x, x + _TWO_PI * m)
        entries.append(_entry("I3", m, a, e1, tol))
    probe = _limit_probe(phi, phit, system.scale, x, j_probe_max)
    return _finish(entries, probe, tol)


def _is_integer(v) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    return float(v).is_integer()


def lattice_points(system: SystemSpec, J: int, kmax: int, max_levels: int = 64) -> list:
    """Points ``k`` of ``Lambda \\ {0}`` (union of ``lambda_j^-1 Z``, ``j >= J``) with ``|lambda_J k| <= kmax``."""
    lam_j = system.scale(J)
    exact = isinstance(lam_j, Fraction)
    pts = set()
    for j in range(J, J + max_levels):
        lam = system.scale(j)
        ratio = lam_j / lam
        if abs(ratio) > kmax:
            break
        for m in range(-kmax, kmax + 1):
            if m == 0:
                continue
            k = Fraction(m) / lam if exact else m / float(lam)
            if abs(lam_j * k) <= kmax:
                pts.add(k)
    return sorted(pts)


def check_nonstationary(system: SystemSpec, grid=None, J: int = 0, kmax: int = 8, j_probe_max: int = 8,
                        tol: float = CHAR_TOL, max_levels: int = 64) -> CharacterizationReport:
    """Residuals of ``I_Phi^{lambda_J k}(lambda_J xi) + sum_j I_{Psi^j}^{lambda_j k}(lambda_j xi)``
    for ``k`` in ``Lambda \\ {0}``, plus a tabulated probe of the ``k = 0`` partial sums.

    ``I^k`` vanishes unless ``k`` is an integer, so each sum has finitely
    many terms.  Exact scales decide integrality by rational arithmetic;
    floating scales are treated as pairwise incommensurable.
    """
    x = default_grid() if grid is None else np.asarray(grid, dtype=float)
    lam_J = system.scale(J)
    exact = isinstance(lam_J, Fraction)
    entries = []
    for k in lattice_points(system, J, kmax, max_levels):
        res = np.zeros(x.shape, dtype=complex)
        err = np.zeros(x.shape)
        terms = 0
        t = lam_J * k
        if _is_integer(t) if exact else abs(t - round(t)) < 1e-12:
            phi, phit = system.phi_layer(J)
            xs = float(lam_J) * x
            v, e = _bracket(phi, phit, xs, xs + _TWO_PI * int(round(t)))
            res += v
            err += e
            terms += 1
        for j in range(J, J + max_levels):
            lam = system.scale(j)
            t = lam * k
            if abs(t) < 1:
                break
            integral = _is_integer(t) if exact else j == _origin_level(system, J, k, kmax, max_levels)
            if not integral:
                continue
            psi, psit = system.psi_layer(j)
            xs = float(lam) * x
            v, e = _bracket(psi, psit, xs, xs + _TWO_PI * int(round(float(t))))
            res += v
            err += e
            terms += 1
        entry = _entry("ns_eq1", k, res, err, tol)
        entry.vacuous = terms == 0
        entries.append(entry)

    probe = []
    phi, phit = system.phi_layer(J)
    xs = float(lam_J) * x
    acc, _ = _bracket(phi, phit, xs, xs)
    for jp in range(J + 1, J + j_probe_max + 1):
        psi, psit = system.psi_layer(jp - 1)
        xs = float(system.scale(jp - 1)) * x
        v, _ = _bracket(psi, psit, xs, xs)
        acc = acc + v
        probe.append((jp, float(np.max(np.abs(acc - 1)))))
    return _finish(entries, probe, tol)


def _origin_level(system, J, k, kmax, max_levels):
    # the level whose lattice produced k when scales are incommensurable
    for j in range(J, J + max_levels):
        t = float(system.scale(j)) * float(k)
        if abs(t - round(t)) < 1e-9 and t != 0:
            return j
    return None
