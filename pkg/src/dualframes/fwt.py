"""Multi-level nonhomogeneous fast framelet transform on finitely supported sequences.

One analysis step correlates with each filter and keeps every ``d``-th sample;
one synthesis step upsamples, filters and multiplies by ``|d|``.  With the
coarse channel convolved by ``Theta`` before synthesis, a bank satisfying the
OEP identities reconstructs ``Theta * v``.  For nonstationary banks the coarsest
step uses level 1 and the finest step level ``L``, so the result is
``Theta^{L+1} * v``.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

from .filterbank import FilterBank, NonstationaryBank, theta_of
from .laurent import EXACT, FLOAT, LaurentPoly, RationalComplex, check_dilation

Signal = LaurentPoly

PR_FLOAT_TOL = 1e-10


class PyramidError(ValueError):
    """Raised when a pyramid does not fit its bank."""


def transition(v: Signal, p: LaurentPoly, d: int) -> Signal:
    """``w(k) = sum_n v(n) conj(p(n - d k))``."""
    d = check_dilation(d)
    return (v * p.conj_reflect()).downsample(d)


def subdivision(w: Signal, q: LaurentPoly, d: int) -> Signal:
    """``r(n) = |d| sum_k w(k) q(n - d k)``."""
    d = check_dilation(d)
    return (w.upsample(d) * q).scale(abs(d))


def _step_banks(bank, levels: int) -> list[FilterBank]:
    """Banks for analysis steps, finest first."""
    if levels < 1:
        raise ValueError("the number of levels must be at least 1")
    if isinstance(bank, FilterBank):
        return [bank] * levels
    if levels > bank.n_levels:
        if bank.tail_rule is None:
            raise ValueError(f"{levels} levels requested but only {bank.n_levels} are provided "
                             "and no tail_rule is declared")
        if bank.tail_rule == "terminate":
            raise ValueError("levels beyond a terminated bank carry no high-pass filters")
    return [bank.level(levels - i) for i in range(levels)]


def coarse_theta(bank, levels: int) -> LaurentPoly:
    """Theta applied to the coarsest channel before synthesis."""
    if isinstance(bank, FilterBank):
        return theta_of(bank)
    return bank.theta(1)


def reconstruction_theta(bank, levels: int) -> LaurentPoly:
    """The sequence ``synthesize(analyze(v))`` is convolved with."""
    if isinstance(bank, FilterBank):
        return theta_of(bank)
    return bank.theta(levels + 1)


@dataclass
class Pyramid:
    """``coarse`` after ``levels`` steps and ``details[i][l]`` for step ``i`` (finest first)."""

    coarse: Signal
    details: list[list[Signal]]
    levels: int
    bank: FilterBank | NonstationaryBank = field(repr=False)

    def __post_init__(self):
        banks = _step_banks(self.bank, self.levels)
        if len(self.details) != self.levels:
            raise PyramidError(f"expected {self.levels} detail levels, got {len(self.details)}")
        for i, (chans, lv) in enumerate(zip(self.details, banks)):
            if len(chans) != lv.s:
                raise PyramidError(f"step {i + 1} needs {lv.s} detail channels, got {len(chans)}")

    @property
    def mode(self) -> str:
        return self.coarse.mode

    def signals(self) -> Iterable[Signal]:
        yield self.coarse
        for chans in self.details:
            yield from chans

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pyramid):
            return NotImplemented
        return (self.levels == other.levels and self.coarse == other.coarse
                and self.details == other.details)


def analyze(v: Signal, bank, levels: int) -> Pyramid:
    banks = _step_banks(bank, levels)
    details = []
    c = v
    for lv in banks:
        details.append([transition(c, b, lv.d) for b in lv.b])
        c = transition(c, lv.a, lv.d)
    return Pyramid(c, details, levels, bank)


def synthesize(pyr: Pyramid) -> Signal:
    banks = _step_banks(pyr.bank, pyr.levels)
    c = pyr.coarse * coarse_theta(pyr.bank, pyr.levels)
    for lv, chans in zip(reversed(banks), reversed(pyr.details)):
        r = subdivision(c, lv.a_tilde, lv.d)
        for w, bt in zip(chans, lv.b_tilde):
            r = r + subdivision(w, bt, lv.d)
        c = r
    return c


# perfect reconstruction harness


@dataclass
class PRReport:
    verdict: str
    trials: int
    failures: int
    max_defect: float
    mode: str
    seed: int
    worst: dict | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "trials": self.trials, "failures": self.failures,
                "max_defect": self.max_defect, "mode": self.mode, "seed": self.seed,
                "worst": self.worst}


def random_signal(rng: random.Random, maxlen: int, mode: str = EXACT) -> Signal:
    """Random finitely supported signal with support length at most ``maxlen``."""
    n = rng.randint(1, maxlen)
    start = rng.randint(-maxlen, maxlen)
    vals = []
    for _ in range(n):
        if mode == EXACT:
            re = Fraction(rng.randint(-99, 99), rng.randint(1, 32))
            im = Fraction(rng.randint(-99, 99), rng.randint(1, 32)) if rng.random() < 0.5 else 0
            vals.append(RationalComplex(re, im))
        else:
            vals.append(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
    return LaurentPoly.from_sequence(vals, start, mode)


def pr_test(bank, trials: int = 100, maxlen: int = 64, levels: int = 4, seed: int = 0,
            tol: float = PR_FLOAT_TOL) -> PRReport:
    """Check ``synthesize(analyze(v)) = Theta * v`` on random signals with ``1 <= L <= levels``.

    Exact banks get exact rational signals and coefficientwise equality; float
    banks get random float signals and a ``tol`` bound on the defect.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    if trials < 1 or maxlen < 1:
        raise ValueError("trials and maxlen must be positive")
    mode = bank.mode
    rng = random.Random(seed)
    failures, max_defect, worst = 0, 0.0, None
    for t in range(trials):
        L = rng.randint(1, levels)
        v = random_signal(rng, maxlen, mode)
        out = synthesize(analyze(v, bank, L))
        diff = out - v * reconstruction_theta(bank, L)
        defect = diff.max_abs_coeff()
        bad = not diff.is_zero if mode == EXACT else defect > tol
        if bad:
            failures += 1
        if defect > max_defect or worst is None and bad:
            max_defect = max(max_defect, defect)
            worst = {"trial": t, "levels": L, "support": list(v.support), "defect": defect}
    return PRReport("pass" if failures == 0 else "fail", trials, failures, max_defect, mode, seed,
                    worst if failures else None)


# CSV


def _coeff_cells(c, mode: str) -> list[str]:
    if mode == EXACT:
        return [str(c.re.numerator), str(c.re.denominator), str(c.im.numerator), str(c.im.denominator)]
    c = complex(c)
    return [repr(c.real), repr(c.imag)]


def _header(mode: str) -> list[str]:
    return ["index", "re_num", "re_den", "im_num", "im_den"] if mode == EXACT else ["index", "re", "im"]


def signal_to_csv(v: Signal, fh: TextIO | None = None) -> str | None:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_header(v.mode))
    for k, c in v.items():
        w.writerow([k, *_coeff_cells(c, v.mode)])
    return buf.getvalue() if fh is None else None


def _parse_coeff(cells: list[str], mode: str):
    if mode == EXACT:
        rn, rd, im_n, im_d = (int(x) for x in cells)
        return RationalComplex(Fraction(rn, rd), Fraction(im_n, im_d))
    re, im = (float(x) for x in cells)
    return complex(re, im)


def _mode_from_header(header: list[str], prefix: list[str]) -> str:
    rest = header[len(prefix):]
    if rest == _header(EXACT):
        return EXACT
    if rest == _header(FLOAT):
        return FLOAT
    raise ValueError(f"unrecognized CSV header {','.join(header)!r}")


def signal_from_csv(text: str | TextIO) -> Signal:
    rows = list(csv.reader(io.StringIO(text) if isinstance(text, str) else text))
    if not rows:
        raise ValueError("empty CSV")
    mode = _mode_from_header(rows[0], [])
    coeffs = {}
    for row in rows[1:]:
        if not row:
            continue
        k = int(row[0])
        if k in coeffs:
            raise ValueError(f"duplicate index {k}")
        coeffs[k] = _parse_coeff(row[1:], mode)
    return LaurentPoly(coeffs, mode)


_PYR_PREFIX = ["band", "level", "channel"]


def pyramid_to_csv(pyr: Pyramid, fh: TextIO | None = None) -> str | None:
    """Rows ``band, level, channel, index, ...``; ``level`` counts steps from the finest (1)."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_PYR_PREFIX + _header(pyr.mode))
    for k, c in pyr.coarse.items():
        w.writerow(["coarse", pyr.levels, 0, k, *_coeff_cells(c, pyr.mode)])
    for i, chans in enumerate(pyr.details):
        for ch, sig in enumerate(chans):
            for k, c in sig.items():
                w.writerow(["detail", i + 1, ch, k, *_coeff_cells(c, pyr.mode)])
    return buf.getvalue() if fh is None else None


def pyramid_from_csv(text: str | TextIO, bank, levels: int) -> Pyramid:
    rows = list(csv.reader(io.StringIO(text) if isinstance(text, str) else text))
    if not rows:
        raise PyramidError("empty CSV")
    try:
        mode = _mode_from_header(rows[0], _PYR_PREFIX)
    except ValueError as exc:
        raise PyramidError(str(exc)) from exc
    if mode != bank.mode:
        raise PyramidError(f"pyramid is {mode} but the bank is {bank.mode}")
    banks = _step_banks(bank, levels)
    coarse: dict[int, object] = {}
    details: list[list[dict]] = [[{} for _ in range(lv.s)] for lv in banks]
    for row in rows[1:]:
        if not row:
            continue
        try:
            band, lvl, ch, k = row[0], int(row[1]), int(row[2]), int(row[3])
            c = _parse_coeff(row[4:], mode)
        except (ValueError, IndexError) as exc:
            raise PyramidError(f"bad pyramid row {row!r}") from exc
        if band == "coarse":
            if lvl != levels or ch != 0:
                raise PyramidError(f"coarse row must have level {levels} and channel 0: {row!r}")
            coarse[k] = c
        elif band == "detail":
            if not 1 <= lvl <= levels or not 0 <= ch < len(details[lvl - 1]):
                raise PyramidError(f"detail row outside the pyramid: {row!r}")
            details[lvl - 1][ch][k] = c
        else:
            raise PyramidError(f"unknown band {band!r}")
    return Pyramid(LaurentPoly(coarse, mode), [[LaurentPoly(d, mode) for d in chans] for chans in details],
                   levels, bank)
