import math

import numpy as np
import pytest

from spherelab import forms
from spherelab.currents import (CATALOG, DEFAULT_DELTAS, RegularityError,
                                catalog_function, cf_pairing,
                                divisor_pairing_boundary,
                                divisor_pairing_closed, richardson_sqrt,
                                zero_set_direct)

ANGULAR_Z2 = forms.x_coord(2) * forms.dx(3) - forms.x_coord(3) * forms.dx(2)
ANGULAR_Z1 = forms.x_coord(0) * forms.dx(1) - forms.x_coord(1) * forms.dx(0)
VOL_Z2 = forms.dz(1) * forms.dzbar(1) * 0.5j
VOL_Z1 = forms.dz(0) * forms.dzbar(0) * 0.5j

FAST = dict(base_cells=6, nodes_per_axis=4, refine_depth=8)


def test_richardson_recovers_sqrt_series():
    deltas = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    a, b, c = 2.5, -1.3, 0.7
    vals = a + b * np.sqrt(deltas) + c * deltas
    limit, err = richardson_sqrt(deltas, vals)
    assert limit == pytest.approx(a, abs=1e-10)
    assert err <= 1e-6


def test_closed_oracle_circle():
    res = divisor_pairing_closed(catalog_function("z1"), ANGULAR_Z2, **FAST)
    direct = zero_set_direct("z1", ANGULAR_Z2)
    assert direct.real == pytest.approx(2.0 * math.pi, abs=1e-12)
    assert abs(res.value - direct) <= 0.01 * abs(direct)
    assert abs(res.value - direct) <= max(0.01 * abs(direct), 3.0 * res.err_est)
    assert res.log_monotone


def test_closed_oracle_swapped_coordinate():
    res = divisor_pairing_closed(catalog_function("z2"), ANGULAR_Z1, **FAST)
    assert abs(res.value - 2.0 * math.pi) <= 0.01 * 2.0 * math.pi


def test_scale_invariance_of_cf():
    psi = ANGULAR_Z2.d()
    a = cf_pairing(catalog_function("z1"), psi, **FAST)
    b = cf_pairing(catalog_function("z1") * 2.0, psi, **FAST)
    assert a.value == pytest.approx(b.value, rel=1e-10)


def test_exact_form_pairs_to_zero():
    phi = forms.x_coord(1) * forms.x_coord(2)
    res = divisor_pairing_closed(catalog_function("z1"), phi.d(), **FAST)
    assert abs(res.value) <= 1e-10
    assert abs(zero_set_direct("z1", phi.d())) <= 1e-10


def test_linearity_in_test_form():
    f = catalog_function("z1")
    p1 = divisor_pairing_closed(f, ANGULAR_Z2, **FAST).value
    p2 = divisor_pairing_closed(f, ANGULAR_Z1, **FAST).value
    combo = divisor_pairing_closed(f, ANGULAR_Z2 * 2.0 - ANGULAR_Z1 * 0.5, **FAST).value
    assert combo == pytest.approx(2.0 * p1 - 0.5 * p2, rel=1e-6, abs=1e-8)


def test_boundary_disc_oracle():
    res = divisor_pairing_boundary(catalog_function("z1-half"), VOL_Z2,
                                   ball_level=10, **FAST)
    target = 3.0 * math.pi / 4.0
    assert zero_set_direct("z1-half", VOL_Z2).real == pytest.approx(target, abs=1e-10)
    assert abs(res.value - target) <= 0.01 * target


def test_boundary_shifted_disc():
    res = divisor_pairing_boundary(catalog_function("z1-shifted"), VOL_Z2,
                                   ball_level=10, **FAST)
    target = math.pi * (1.0 - 0.25 ** 2)
    assert zero_set_direct("z1-shifted", VOL_Z2).real == pytest.approx(target, abs=1e-10)
    assert abs(res.value - target) <= 0.01 * target


def test_boundary_nowhere_zero_cancels():
    psi = (1.0 + forms.z_coord(0) * forms.zbar_coord(0)) * VOL_Z2
    res = divisor_pairing_boundary(catalog_function("nowhere-zero"), psi,
                                   ball_level=10, **FAST)
    assert abs(res.value) <= max(1e-5, 3.0 * res.err_est)


def test_boundary_tangential_form_vanishes():
    res = divisor_pairing_boundary(catalog_function("z1-half"), VOL_Z1,
                                   ball_level=10, **FAST)
    assert abs(res.value) <= 1e-8


def test_product_divisor_additivity():
    psi = VOL_Z2 + VOL_Z1
    direct = zero_set_direct("z1*z2", psi)
    # each coordinate disc contributes pi from its own volume form
    assert direct.real == pytest.approx(2.0 * math.pi, abs=1e-10)
    res = divisor_pairing_boundary(catalog_function("z1*z2"), psi,
                                   ball_level=10, **FAST)
    assert abs(res.value - direct) <= 0.015 * abs(direct)


def test_regularity_rejection():
    # z1 * z1 has a double zero through the boundary circle: its gradient
    # collapses on the zero set and the margin check must fire
    z1 = forms.z_coord(0)
    with pytest.raises(RegularityError):
        divisor_pairing_boundary(z1 * z1, VOL_Z2, ball_level=8,
                                 base_cells=6, nodes_per_axis=4, refine_depth=12)
    with pytest.raises(RegularityError):
        divisor_pairing_boundary(forms.PolyForm.zero(2), VOL_Z2, ball_level=8, **FAST)


def test_catalog_registry():
    assert set(CATALOG) >= {"z1", "z2", "z1-half", "z1-shifted", "z1*z2", "nowhere-zero"}
    with pytest.raises(KeyError):
        catalog_function("does-not-exist")
    with pytest.raises(KeyError):
        zero_set_direct("does-not-exist", VOL_Z2)


def test_pairing_record_schema():
    res = divisor_pairing_closed(catalog_function("z1"), ANGULAR_Z2, **FAST)
    rec = res.record("z1", "angular-z2")
    assert set(rec) == {"function", "psi_id", "value_re", "value_im", "err_est", "method"}
    assert rec["method"] == "lelong-poincare-closed"


def test_delta_monotonicity_reported():
    res = cf_pairing(catalog_function("z1"), ANGULAR_Z2.d(), **FAST)
    assert res.log_monotone
    assert len(res.per_delta) == len(DEFAULT_DELTAS)
