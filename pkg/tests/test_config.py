import json
from fractions import Fraction

import pytest

from dualframes.banks import NONSTATIONARY_EXAMPLES, SHANNON_EXAMPLES, STATIONARY_EXAMPLES, example_names, load_example
from dualframes.config import ConfigError, config_json, load_config, parse_config, parse_poly
from dualframes.filterbank import FilterBank, NonstationaryBank, theta_of
from dualframes.laurent import EXACT, FLOAT, LaurentPoly, RationalComplex

HAAR_DOC = {"dilation": 2, "mode": "exact",
            "a": [[0, [1, 2]], [1, [1, 2]]],
            "b": [[[0, [1, 2]], [1, [-1, 2]]]]}


def test_parse_exact_poly():
    p = parse_poly([[0, [1, 2]], [-3, [2, 3], [-1, 5]]], EXACT)
    assert p[0] == RationalComplex(Fraction(1, 2)) and p[-3] == RationalComplex(Fraction(2, 3), Fraction(-1, 5))


def test_parse_float_poly():
    p = parse_poly([[1, "0.25"], [2, "-1e-3", "2.5"]], FLOAT)
    assert p[1] == 0.25 and p[2] == complex(-1e-3, 2.5)


@pytest.mark.parametrize("items,mode", [
    ([[0, 0.5]], EXACT),
    ([[0, [1, 0]]], EXACT),
    ([[0, 0.5]], FLOAT),
    ([[0, "nan"]], FLOAT),
    ([[0, "abc"]], FLOAT),
    ([[0, [1, 2]], [0, [1, 2]]], EXACT),
    ([["x", [1, 2]]], EXACT),
    ({"0": 1}, EXACT),
])
def test_parse_poly_rejects(items, mode):
    with pytest.raises(ConfigError):
        parse_poly(items, mode)


def test_defaults_and_theta():
    cfg = parse_config(HAAR_DOC)
    bank = cfg.bank
    assert isinstance(bank, FilterBank)
    assert bank.a_tilde == bank.a and bank.b_tilde == bank.b
    assert theta_of(bank) == LaurentPoly({0: 1})
    doc = dict(HAAR_DOC, theta_pairs=[[[[1, [1, 1]]], [[1, [1, 1]]]]])
    assert theta_of(parse_config(doc).bank) == LaurentPoly({0: 1})


@pytest.mark.parametrize("patch", [
    {"dilation": 1},
    {"dilation": 2.0},
    {"mode": "decimal"},
    {"b": []},
    {"theta": [[0, [1, 1]]], "theta_pairs": [[[[0, [1, 1]]], [[0, [1, 1]]]]]},
    {"theta_pairs": [[[[0, [1, 1]]]]]},
    {"b_tilde": [[[0, [1, 1]]], [[0, [1, 1]]]]},
])
def test_bank_schema_errors(patch):
    with pytest.raises(ConfigError):
        parse_config({**HAAR_DOC, **patch})


def test_missing_keys():
    with pytest.raises(ConfigError):
        parse_config({"dilation": 2, "a": []})
    with pytest.raises(ConfigError):
        parse_config([1, 2])


def test_nonstationary_document():
    doc = {"mode": "exact", "nonstationary": {"levels": [HAAR_DOC, HAAR_DOC], "tail_rule": "repeat_last",
                                              "theta_next": [[0, [1, 1]]]}}
    bank = parse_config(doc).bank
    assert isinstance(bank, NonstationaryBank) and bank.n_levels == 2 and bank.theta(3) == LaurentPoly({0: 1})
    with pytest.raises(ConfigError):
        parse_config({"nonstationary": {"levels": [HAAR_DOC], "tail_rule": "forever"}})
    with pytest.raises(ConfigError):
        parse_config({"nonstationary": {"levels": []}})
    assert parse_config({"nonstationary": {"levels": [HAAR_DOC]}}).bank.tail_rule is None


def test_shannon_document():
    cfg = parse_config({"shannon": {"dilation": "3/2"}})
    assert cfg.bank is None and cfg.shannon.dilation == Fraction(3, 2) and not cfg.shannon.irrational
    cfg = parse_config({"shannon": {"dilation": "1.4142135623730951", "irrational": True}})
    assert cfg.shannon.irrational and isinstance(cfg.shannon.dilation, float)
    for bad in ({"dilation": 1.5}, {"dilation": "5/2"}, {"dilation": "x"}, {}):
        with pytest.raises(ConfigError):
            parse_config({"shannon": bad})


@pytest.mark.parametrize("name", sorted(STATIONARY_EXAMPLES) + sorted(NONSTATIONARY_EXAMPLES))
def test_round_trip_shipped(name):
    bank = load_example(name).bank
    again = parse_config(json.loads(json.dumps(config_json(bank)))).bank
    assert again == bank


def test_shipped_catalogue():
    names = set(example_names())
    assert set(STATIONARY_EXAMPLES) | set(NONSTATIONARY_EXAMPLES) | set(SHANNON_EXAMPLES) == names
    with pytest.raises(KeyError):
        load_example("nope")


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    good = tmp_path / "haar.json"
    good.write_text(json.dumps(HAAR_DOC), encoding="utf-8")
    assert load_config(good).bank.d == 2
