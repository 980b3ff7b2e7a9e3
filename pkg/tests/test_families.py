from fractions import Fraction
from math import comb

import pytest

from codedcache.core import RadixSpec
from codedcache.families import FamilyError, build_family_pda, closed_form, family_params
from codedcache.pda import useless_stars, verify_pda

import oracles


def test_theorem4_105():
    r = family_params("theorem4", n=105)
    assert (r.params.K, r.params.F) == (105, 105)
    assert r.memory_ratio == Fraction(57, 105) and r.mn_text == "0.54"
    assert r.rate == 6 and r.r_text == "6.0"
    assert r.measured == r.params


def test_corollary4_776():
    r = family_params("corollary4", n0=7, w=6, p0=6)
    assert r.params.K == 279936 and r.params.F == 187500
    assert r.mn_text == "0.42" and r.r_text == "27216.0"
    assert r.measured is None  # beyond the construction limit


def test_corollary3_15_8():
    r = family_params("corollary3", n0=15, w=8)
    assert r.params.K == r.params.F == 32768
    assert r.memory_ratio == 1 - Fraction(6435, 32768)
    assert r.rate == Fraction(6435, 256) and r.r_text == "25.1"


def test_corollary2_example():
    assert family_params("corollary2", n0=2, w=1, p0=2).params.as_tuple() == (4, 4, 2, 4)


@pytest.mark.parametrize("n0, w, p0", [(2, 1, 2), (4, 3, 2), (6, 4, 5), (7, 6, 6), (8, 7, 6), (8, 6, 4), (3, 1, 7)])
def test_corollary4_closed_form_matches_counting(n0, w, p0):
    params, zp = closed_form("corollary4", n0=n0, w=w, p0=p0)
    K, Fp, mn, R = oracles.corollary4_values(n0, w, p0)
    assert (params.K, params.F, params.memory_ratio, params.rate) == (K, Fp, mn, R)
    assert zp == K - Fp


@pytest.mark.parametrize("n0, w", [(3, 2), (5, 3), (4, 3), (7, 4), (6, 4)])
def test_corollary3_measured(n0, w):
    r = family_params("corollary3", n0=n0, w=w)
    assert r.measured is not None
    assert r.measured.S <= r.params.S
    if n0 == 2 * w - 1:
        assert r.measured.S == r.params.S == comb(n0, w) * 2 ** (w - 1)


@pytest.mark.parametrize(
    "family, inputs",
    [
        ("theorem5", {"spec": RadixSpec(((2, 2), (3, 1))), "w": 1}),
        ("theorem6", {"spec": RadixSpec(((2, 2), (3, 1))), "w": 1}),
        ("theorem5", {"spec": "2:1,3:1,5:1", "w": 2}),
        ("mn", {"k": 6, "t": 2}),
        ("theorem4", {"n": 30}),
        ("corollary2", {"n0": 3, "w": 2, "p0": 3}),
    ],
)
def test_measured_matches_closed_form(family, inputs):
    r = family_params(family, **inputs)
    assert r.measured == r.params
    p = build_family_pda(family, **inputs)
    assert verify_pda(p).passed
    if family == "theorem6":
        assert useless_stars(p).z_prime == r.z_prime


def test_theorem6_example():
    params, zp = closed_form("theorem6", spec=RadixSpec(((2, 2), (3, 1))), w=1)
    assert zp == 1 and params.F == 11 and params.memory_ratio == Fraction(7, 11) and params.rate == Fraction(10, 11)


@pytest.mark.parametrize(
    "family, inputs",
    [
        ("corollary3", {"n0": 2, "w": 2}),
        ("corollary3", {"n0": 6, "w": 3}),
        ("corollary4", {"n0": 2, "w": 2, "p0": 2}),
        ("corollary2", {"n0": 3, "w": 1, "p0": 1}),
        ("theorem4", {"n": 2}),
        ("mn", {"k": 3, "t": 3}),
        ("nosuch", {}),
    ],
)
def test_family_errors(family, inputs):
    with pytest.raises(FamilyError):
        closed_form(family, **inputs)
