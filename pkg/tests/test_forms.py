import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherelab import forms
from spherelab.forms import (PolyForm, antiholo_direction, dx, dz, dzbar,
                             holo_direction, real_direction, x_coord, z_coord,
                             zbar_coord)


def random_form(rng, degree, nterms=4):
    out = PolyForm.zero(2)
    words = {
        0: [()],
        1: [(0,), (1,), (2,), (3,)],
        2: [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    }[degree]
    for _ in range(nterms):
        word = words[rng.integers(len(words))]
        exps = tuple(rng.integers(0, 3, size=4))
        coeff = complex(rng.standard_normal(), rng.standard_normal())
        out = out + PolyForm.monomial(2, coeff, exps, word)
    return out


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), degree=st.integers(0, 2))
def test_d_squared_vanishes(seed, degree):
    rng = np.random.default_rng(seed)
    psi = random_form(rng, degree)
    assert not psi.d().d().terms


def test_type_split_examples():
    psi = z_coord(0) * dz(1)          # z1 dz2
    assert not psi.partial_zbar().terms
    phi = zbar_coord(0) * dzbar(1)    # conj(z1) dconj(z2)
    assert not phi.partial_z().terms
    assert (z_coord(0) * zbar_coord(0)).partial_zbar().terms  # dbar |z1|^2 != 0


def test_d_decomposes_and_anticommutes(rng):
    psi = random_form(rng, 1)
    dpsi = psi.d()
    split = psi.partial_z() + psi.partial_zbar()
    assert not (dpsi - split).terms
    a = psi.partial_z().partial_z()
    b = psi.partial_zbar().partial_zbar()
    mixed = psi.partial_z().partial_zbar() + psi.partial_zbar().partial_z()
    assert not a.terms and not b.terms and not mixed.terms


def test_wedge_graded_anticommutativity(rng):
    alpha = random_form(rng, 1)
    beta = random_form(rng, 1)
    assert not (alpha.wedge(beta) + beta.wedge(alpha)).terms
    gamma = random_form(rng, 2)
    assert not (alpha.wedge(gamma) - gamma.wedge(alpha)).terms


def test_real_coordinate_constructors(rng):
    # x3 dx4 - x4 dx3 against a direct real-arithmetic evaluation
    psi = x_coord(2) * dx(3) - x_coord(3) * dx(2)
    pts = rng.standard_normal((10, 4))
    zpts = pts[:, 0::2] + 1j * pts[:, 1::2]
    vre = rng.standard_normal((10, 4))
    v = vre[:, 0::2] + 1j * vre[:, 1::2]
    vals = psi.evaluate(zpts, [real_direction(v)])
    expect = pts[:, 2] * vre[:, 3] - pts[:, 3] * vre[:, 2]
    assert np.allclose(vals, expect, atol=1e-13)
    assert np.max(np.abs(vals.imag)) <= 1e-13


def test_bidegree_and_degree():
    psi = dz(0) * dzbar(1) * 0.5j
    assert psi.degree == 2
    assert psi.bidegree == (1, 1)
    with pytest.raises(ValueError):
        (dz(0) + dz(0) * dzbar(0)).degree


def test_conjugation(rng):
    psi = random_form(rng, 1)
    pts = rng.standard_normal((5, 4))
    zpts = pts[:, 0::2] + 1j * pts[:, 1::2]
    u = rng.standard_normal((5, 4))
    uv = u[:, 0::2] + 1j * u[:, 1::2]
    a = psi.conj().evaluate(zpts, [real_direction(uv)])
    b = np.conj(psi.evaluate(zpts, [real_direction(uv)]))
    assert np.allclose(a, b, atol=1e-13)


def test_direction_types(rng):
    # dz_j sees only the holomorphic part, dconj(z_j) only the other
    w = np.array([1.0 + 2.0j, -0.5j])
    pt = np.array([[0.3 + 0.1j, 0.2 - 0.4j]])
    assert dz(0).evaluate(pt, [holo_direction(w)])[0] == pytest.approx(w[0])
    assert dzbar(0).evaluate(pt, [holo_direction(w)])[0] == 0.0
    assert dzbar(0).evaluate(pt, [antiholo_direction(w)])[0] == pytest.approx(np.conj(w[0]))
    assert dz(0).evaluate(pt, [antiholo_direction(w)])[0] == 0.0


def test_evaluation_antisymmetry(rng):
    psi = random_form(rng, 2)
    pts = np.atleast_2d((rng.standard_normal(4) + 1j * rng.standard_normal(4))[:2])
    u = real_direction(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    v = real_direction(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    a = psi.evaluate(pts, [u, v])
    b = psi.evaluate(pts, [v, u])
    assert np.allclose(a, -b, atol=1e-12)


def test_sampled_cnorm_orders(rng):
    psi = z_coord(0) * zbar_coord(0) * dx(1)
    pts = np.array([[1.0 + 0.0j, 0.0j]])
    c0 = psi.sampled_cnorm(pts, order=0)
    c1 = psi.sampled_cnorm(pts, order=1)
    assert c1 >= c0 > 0.0
