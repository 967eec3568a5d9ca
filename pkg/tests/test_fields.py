import random

import pytest
from hypothesis import given, settings, strategies as st

from asyncpay.errors import ZeroInversionError
from asyncpay.fields import PrimeField

F101 = PrimeField(101)


def test_inverse_golden_values():
    # extended Euclid by hand: 8*38 = 304 = 3*101 + 1, 5*81 = 405 = 4*101 + 1
    assert F101.inv(8) == 38
    assert F101.inv(5) == 81


def test_additive_identity():
    for a in (0, 1, 57, 100):
        assert F101.add(a, 0) == a


def test_inversion_of_zero_rejected():
    with pytest.raises(ZeroInversionError):
        F101.inv(0)
    with pytest.raises(ZeroInversionError):
        F101.inv(101)  # zero in canonical form


def test_canonical_residues():
    assert F101.add(100, 5) == 4
    assert F101.sub(3, 10) == 94
    assert F101.neg(0) == 0
    assert F101.mul(-1, 1) == 100


def test_modulus_must_be_prime():
    with pytest.raises(ValueError):
        PrimeField(100)


def test_expand_roots_golden():
    assert F101.expand_roots([2, 5]) == [10, 7, 1]
    assert F101.expand_roots([]) == [1]
    assert F101.expand_roots([7]) == [7, 1]


def test_expand_roots_matches_evaluation():
    rnd = random.Random(11)
    for _ in range(50):
        roots = [rnd.randrange(101) for _ in range(rnd.randrange(5))]
        coeffs = F101.expand_roots(roots)
        y = rnd.randrange(101)
        direct = 1
        for r in roots:
            direct = direct * (y + r) % 101
        assert F101.poly_eval(coeffs, y) == direct


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=100))
def test_inverse_property(a):
    assert F101.mul(a, F101.inv(a)) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=100))
def test_bytes_roundtrip(a):
    assert F101.from_bytes(F101.to_bytes(a)) == a
    assert F101.from_hex(F101.to_hex(a)) == a


def test_rand_is_seed_deterministic():
    f = PrimeField(2**61 - 1)
    a = f.rand(random.Random(42))
    b = f.rand(random.Random(42))
    assert a == b
    assert 0 < f.rand_nonzero(random.Random(1)) < f.p
