import numpy as np
import pytest

from vsturm.trigpoly import TrigPoly, cosine, poly, sine

PI = np.pi


def gauss_quad(f, a, b, nodes=160):
    """Independent quadrature oracle (Gauss-Legendre)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (b - a) * x + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.dot(w, f(t)))


SAMPLES = [
    poly(1.5),
    poly(0.0, 1.0, -0.25),
    cosine(1.0, 2.0) + sine(2.0, -0.5),
    poly(1.0, 0.5) * cosine(3.0) + sine(1.0, 0.75),
    (poly(0.0, 1.0) + sine(1.0)) * (poly(2.0) + cosine(2.0, -1.0)),
]


def test_evaluation_matches_direct_formula():
    f = poly(1.0, 2.0) + cosine(3.0, 0.5) + sine(1.0, -2.0)
    xs = np.linspace(0.0, PI, 7)
    expect = 1.0 + 2.0 * xs + 0.5 * np.cos(3.0 * xs) - 2.0 * np.sin(xs)
    assert np.allclose(f(xs), expect, atol=1e-14)
    assert f(0.5) == pytest.approx(1.0 + 1.0 + 0.5 * np.cos(1.5) - 2.0 * np.sin(0.5))


@pytest.mark.parametrize("f", SAMPLES)
@pytest.mark.parametrize("a,b", [(0.0, PI), (0.3, 2.1), (1.0, 1.0)])
def test_integral_against_quadrature(f, a, b):
    assert f.integrate(a, b) == pytest.approx(gauss_quad(f, a, b), abs=1e-12)


@pytest.mark.parametrize("f,g", [(SAMPLES[1], SAMPLES[2]), (SAMPLES[2], SAMPLES[3])])
def test_product_against_pointwise(f, g):
    xs = np.linspace(0.0, PI, 50)
    assert np.allclose((f * g)(xs), f(xs) * g(xs), atol=1e-12)


@pytest.mark.parametrize("f", SAMPLES)
def test_derivative_of_antiderivative_is_identity(f):
    xs = np.linspace(0.0, PI, 33)
    back = f.antiderivative().derivative()
    assert np.allclose(back(xs), f(xs), atol=1e-11)


def test_antiderivative_anchored_at_zero():
    f = SAMPLES[3]
    assert f.antiderivative()(0.0) == pytest.approx(0.0, abs=1e-15)


def test_scalar_multiplication_and_subtraction():
    f = cosine(2.0) + poly(0.0, 3.0)
    xs = np.linspace(0.0, 2.0, 11)
    assert np.allclose((2.5 * f)(xs), 2.5 * f(xs))
    assert np.allclose((f - f)(xs), 0.0)
    assert (f - f).is_zero()


def test_constant_detection():
    assert poly(4.0).is_constant()
    assert poly(4.0).constant_value() == 4.0
    assert not (poly(4.0) + sine(1.0)).is_constant()
    with pytest.raises(ValueError):
        (poly(1.0, 1.0)).constant_value()


def test_frequency_normalization():
    # cos is even and sin is odd in the frequency
    assert cosine(-2.0, 1.5) == cosine(2.0, 1.5)
    assert sine(-2.0, 1.5) == sine(2.0, -1.5)
    assert TrigPoly.from_coeffs(sin=((0.0, 3.0),)).is_zero()


def test_hashable_and_equal():
    f = poly(1.0) + sine(2.0)
    g = sine(2.0) + poly(1.0)
    assert f == g
    assert hash(f) == hash(g)
