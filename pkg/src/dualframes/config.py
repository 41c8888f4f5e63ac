"""JSON configuration documents for filter banks and systems.

Coefficient lists are ``[[k, re, im], ...]`` with the imaginary part optional.
Exact mode writes each part as ``[num, den]``; float mode as a decimal string.

    {"dilation": 2, "mode": "exact",
     "a": [[0, [1, 2]], [1, [1, 2]]],
     "b": [[[0, [1, 2]], [1, [-1, 2]]]],
     "theta": [[0, [1, 1]]]}

``a_tilde`` defaults to ``a`` and ``b_tilde`` to ``b``.  A nonstationary
document replaces the per-bank keys with ``"nonstationary": {"levels": [...],
"tail_rule": ..., "theta_next": ...}`` where every level is a bank object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .filterbank import TAIL_RULES, FilterBank, NonstationaryBank
from .laurent import EXACT, MODES, LaurentPoly, ModeError, RationalComplex


class ConfigError(ValueError):
    """Raised for unreadable or schema-invalid configuration documents."""


@dataclass(frozen=True)
class ShannonSpec:
    dilation: Fraction | float
    irrational: bool


@dataclass(frozen=True)
class Config:
    bank: FilterBank | NonstationaryBank | None
    shannon: ShannonSpec | None = None
    name: str = ""

    @property
    def is_nonstationary(self) -> bool:
        return isinstance(self.bank, NonstationaryBank)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _exact_part(v, where: str) -> Fraction:
    if isinstance(v, list) and len(v) == 2 and all(_is_int(x) for x in v):
        if v[1] == 0:
            raise ConfigError(f"{where}: zero denominator")
        return Fraction(v[0], v[1])
    raise ConfigError(f"{where}: exact coefficients are [num, den] integer pairs, got {v!r}")


def _float_part(v, where: str) -> float:
    if not isinstance(v, str):
        raise ConfigError(f"{where}: float coefficients are decimal strings, got {v!r}")
    try:
        x = float(v)
    except ValueError as exc:
        raise ConfigError(f"{where}: not a decimal number: {v!r}") from exc
    if not math.isfinite(x):
        raise ConfigError(f"{where}: coefficient must be finite")
    return x


def parse_poly(items, mode: str, where: str = "polynomial") -> LaurentPoly:
    if not isinstance(items, list):
        raise ConfigError(f"{where}: expected a list of [k, re, im] entries")
    coeffs: dict[int, Any] = {}
    for n, entry in enumerate(items):
        here = f"{where}[{n}]"
        if not isinstance(entry, list) or len(entry) not in (2, 3) or not _is_int(entry[0]):
            raise ConfigError(f"{here}: expected [k, re] or [k, re, im]")
        k = entry[0]
        if k in coeffs:
            raise ConfigError(f"{here}: index {k} repeated")
        if mode == EXACT:
            re = _exact_part(entry[1], here)
            im = _exact_part(entry[2], here) if len(entry) == 3 else Fraction(0)
            coeffs[k] = RationalComplex(re, im)
        else:
            re = _float_part(entry[1], here)
            im = _float_part(entry[2], here) if len(entry) == 3 else 0.0
            coeffs[k] = complex(re, im)
    return LaurentPoly(coeffs, mode)


def _poly_list(obj, key: str, mode: str, where: str) -> tuple[LaurentPoly, ...]:
    val = obj.get(key)
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{where}.{key}: expected a nonempty list of polynomials")
    return tuple(parse_poly(p, mode, f"{where}.{key}[{i}]") for i, p in enumerate(val))


def parse_bank(obj: dict, mode: str, where: str = "bank") -> FilterBank:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    d = obj.get("dilation")
    if not _is_int(d) or abs(d) < 2:
        raise ConfigError(f"{where}.dilation: integer with |d| >= 2 required, got {d!r}")
    if "a" not in obj or "b" not in obj:
        raise ConfigError(f"{where}: keys 'a' and 'b' are required")
    a = parse_poly(obj["a"], mode, f"{where}.a")
    a_t = parse_poly(obj["a_tilde"], mode, f"{where}.a_tilde") if "a_tilde" in obj else a
    b = _poly_list(obj, "b", mode, where)
    b_t = _poly_list(obj, "b_tilde", mode, where) if "b_tilde" in obj else b
    theta = pairs = None
    if "theta" in obj and "theta_pairs" in obj:
        raise ConfigError(f"{where}: give either 'theta' or 'theta_pairs'")
    if "theta" in obj:
        theta = parse_poly(obj["theta"], mode, f"{where}.theta")
    if "theta_pairs" in obj:
        raw = obj["theta_pairs"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"{where}.theta_pairs: expected a nonempty list of [theta, theta~]")
        pairs = []
        for i, pr in enumerate(raw):
            if not isinstance(pr, list) or len(pr) != 2:
                raise ConfigError(f"{where}.theta_pairs[{i}]: expected [theta, theta~]")
            pairs.append((parse_poly(pr[0], mode, f"{where}.theta_pairs[{i}][0]"),
                          parse_poly(pr[1], mode, f"{where}.theta_pairs[{i}][1]")))
        pairs = tuple(pairs)
    try:
        return FilterBank(d, a, a_t, b, b_t, theta=theta, theta_pairs=pairs, name=str(obj.get("name", "")))
    except (ValueError, ModeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_dilation_value(v, irrational: bool) -> Fraction | float:
    if _is_int(v):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v) if not irrational else float(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"shannon.dilation: cannot parse {v!r}") from exc
    if isinstance(v, float) and irrational:
        return v
    raise ConfigError("shannon.dilation: give a rational as a string like '3/2', "
                      "or a number together with \"irrational\": true")


def parse_config(doc: Any) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    name = str(doc.get("name", ""))
    if "shannon" in doc:
        sh = doc["shannon"]
        if not isinstance(sh, dict) or "dilation" not in sh:
            raise ConfigError("shannon: expected {\"dilation\": ..., \"irrational\": bool}")
        irr = bool(sh.get("irrational", False))
        d = _parse_dilation_value(sh["dilation"], irr)
        if not 1 < float(d) <= 2:
            raise ConfigError("shannon.dilation must satisfy 1 < d <= 2")
        return Config(None, ShannonSpec(d, irr), name)
    mode = doc.get("mode", EXACT)
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if "nonstationary" in doc:
        ns = doc["nonstationary"]
        if not isinstance(ns, dict) or not isinstance(ns.get("levels"), list) or not ns["levels"]:
            raise ConfigError("nonstationary.levels: expected a nonempty list of banks")
        levels = [parse_bank(lv, mode, f"nonstationary.levels[{i}]") for i, lv in enumerate(ns["levels"])]
        rule = ns.get("tail_rule")
        if rule is not None and rule not in TAIL_RULES:
            raise ConfigError(f"nonstationary.tail_rule must be one of {TAIL_RULES}")
        nxt = parse_poly(ns["theta_next"], mode, "nonstationary.theta_next") if "theta_next" in ns else None
        try:
            bank = NonstationaryBank(tuple(levels), rule, nxt, name)
        except (ValueError, ModeError) as exc:
            raise ConfigError(str(exc)) from exc
        return Config(bank, None, name)
    bank = parse_bank({**doc, "name": name}, mode, "config")
    return Config(bank, None, name)


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)


# writing


def _part_json(x, mode: str):
    if mode == EXACT:
        return [x.numerator, x.denominator]
    return repr(float(x))


def poly_json(p: LaurentPoly) -> list:
    out = []
    for k, c in p.items():
        if p.mode == EXACT:
            entry = [k, _part_json(c.re, EXACT)]
            if c.im:
                entry.append(_part_json(c.im, EXACT))
        else:
            c = complex(c)
            entry = [k, repr(c.real)]
            if c.imag:
                entry.append(repr(c.imag))
        out.append(entry)
    return out


def bank_json(bank: FilterBank) -> dict:
    out: dict[str, Any] = {"dilation": bank.d, "a": poly_json(bank.a), "a_tilde": poly_json(bank.a_tilde),
                           "b": [poly_json(p) for p in bank.b], "b_tilde": [poly_json(p) for p in bank.b_tilde]}
    if bank.theta is not None:
        out["theta"] = poly_json(bank.theta)
    if bank.theta_pairs is not None:
        out["theta_pairs"] = [[poly_json(p), poly_json(q)] for p, q in bank.theta_pairs]
    return out


def config_json(bank: FilterBank | NonstationaryBank) -> dict:
    """Inverse of :func:`parse_config` for banks."""
    if isinstance(bank, FilterBank):
        doc = {"mode": bank.mode, **bank_json(bank)}
    else:
        ns: dict[str, Any] = {"levels": [bank_json(lv) for lv in bank.levels]}
        if bank.tail_rule is not None:
            ns["tail_rule"] = bank.tail_rule
        if bank.theta_next is not None:
            ns["theta_next"] = poly_json(bank.theta_next)
        doc = {"mode": bank.mode, "nonstationary": ns}
    if bank.name:
        doc["name"] = bank.name
    return doc


__all__ = ["Config", "ConfigError", "ShannonSpec", "bank_json", "config_json", "load_config",
           "parse_bank", "parse_config", "parse_poly", "poly_json"]
