import math

import numpy as np
import pytest

import chyp


def test_distance_values():
    assert chyp.dist(np.zeros(1), np.zeros(1)) == 0.0
    assert chyp.dist(np.array([0.0]), np.array([0.5])) == pytest.approx(0.5 * math.log(3.0), rel=1e-15)
    assert math.isinf(chyp.dist(np.zeros(2), np.array([1.0, 0.0])))


def test_distance_is_invariant():
    rng = np.random.default_rng(0)
    g = chyp.transport_to_origin(np.array([0.3 + 0.2j, -0.4j]))
    for _ in range(20):
        z, w = (0.6 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 3 for _ in range(2))
        assert chyp.dist(g(z), g(w)) == pytest.approx(chyp.dist(z, w), abs=1e-11)


def test_group_and_cayley():
    a = chyp.cartan(0.7, 2)
    assert a.membership_residual() < 1e-14
    assert np.allclose(a(np.zeros(2)), [math.tanh(0.7), 0.0])
    assert np.allclose((a @ a.inverse()).matrix, np.eye(3))
    z = np.array([0.2 + 0.1j, -0.3j])
    assert np.allclose(chyp.cayley_to_ball(chyp.cayley_to_siegel(z)), z, atol=1e-13)


def test_catalog_and_properness():
    names = chyp.catalog_names()
    assert "whitney" in names
    for name in names:
        assert chyp.properness_residual(name) <= 1e-9
    w = chyp.catalog_map("whitney")
    s = math.sqrt(0.5)
    assert np.allclose(w(np.array([s, s])), [s, 0.5, 0.5])
    assert chyp.ProperMap.from_json(w.to_json()).target_dim == 3


def test_input_errors_become_value_errors():
    with pytest.raises(ValueError):
        chyp.catalog_map("cubic")
    with pytest.raises(ValueError):
        chyp.dist(np.array([2.0]), np.array([0.0]))


def test_scaling_exponents():
    assert chyp.scaling_exponent(1, 2, m=2, M=4) == 0.5
    assert chyp.scaling_exponent(2, 1, 1, m=2, M=4) == -1.5


def test_rescale_linear():
    r = chyp.rescale("linear(2,4)", 1, 12)
    assert r["lambda"] == pytest.approx(1.0, abs=1e-6)
    assert r["flatten_residual"] <= 1e-8
    with pytest.raises(ValueError):
        chyp.rescale("whitney", 1, 6)


def test_morse_is_seeded():
    a = chyp.morse_constant(1, 1.0, 1.0, trials=50, seed=7)
    assert a > 0 and a == chyp.morse_constant(1, 1.0, 1.0, trials=50, seed=7)
