import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainboson.hypergeometric import SeriesDivergenceError, hyp1f2, hyp_pfq


@pytest.mark.parametrize("z", [0.0, -1e-6, -0.25, -4.0, -100.0, -900.0])
def test_hyp1f2_against_mpmath(z):
    ref = float(mpmath.hyp1f2(1.5, 2.5, 3.0, z))
    assert hyp1f2(1.5, 2.5, 3.0, z) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(1e-3, 30.0))
def test_hyp1f2_property_against_mpmath(x):
    ref = float(mpmath.hyp1f2(1.5, 2.5, 3.0, -x * x))
    got = hyp1f2(1.5, 2.5, 3.0, -x * x)
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_known_closed_forms():
    # 0F0(;;z) = exp(z), 1F0(a;;z) = (1 - z)^-a
    assert hyp_pfq([], [], -3.0) == pytest.approx(np.exp(-3.0), rel=1e-14)
    assert hyp_pfq([0.5], [], 0.3) == pytest.approx(0.7 ** -0.5, rel=1e-13)


def test_divergent_type_rejected():
    with pytest.raises(SeriesDivergenceError):
        hyp_pfq([1.0, 1.0, 1.0], [1.0], 0.5)


def test_bad_lower_parameter():
    with pytest.raises(ValueError):
        hyp_pfq([1.0], [-2.0], 0.1)
