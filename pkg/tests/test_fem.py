import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgesync import build_fem, interpolate, l2_inner, l2_norm
from edgesync.fem import generalized_eigenvalues
from edgesync.profiles import BENCHMARK_PROFILES, ProfileError, compile_profile, benchmark_initial_states


def test_mass_and_stiffness_n3():
    m = build_fem(n=3)
    assert m.h == 0.25
    np.testing.assert_allclose(np.diag(m.mass), [1 / 6] * 3, rtol=0, atol=1e-15)
    np.testing.assert_allclose(np.diag(m.mass, 1), [1 / 24] * 2, atol=1e-15)
    np.testing.assert_allclose(np.diag(m.stiff), [8.0] * 3, atol=1e-12)
    np.testing.assert_allclose(np.diag(m.stiff, 1), [-4.0] * 2, atol=1e-12)
    assert np.all(np.diag(m.mass, 2) == 0)


@pytest.mark.parametrize("n", [3, 7, 40])
def test_full_width_unit_pulse_sums_to_one_minus_h(n):
    m = build_fem(n=n, pulse_center=0.5, pulse_width=1.0, pulse_area=1.0)
    assert m.b_vec.sum() == pytest.approx(1 - m.h, abs=1e-13)


def test_pulse_vector_is_symmetric_and_scaled():
    m = build_fem(n=40)
    np.testing.assert_allclose(m.b_vec, m.b_vec[::-1], atol=1e-13)
    # interior hats fully covered by the box integrate to h * height
    height = m.pulse_area / m.pulse_width
    assert m.b_vec[19] == pytest.approx(m.h * height)
    np.testing.assert_allclose(m.k_vec, m.c_K * m.b_vec)
    np.testing.assert_allclose(m.f_vec, m.c_F * m.b_vec)


@pytest.mark.parametrize("kw", [dict(n=0), dict(n=2.5), dict(a1=0.0), dict(a1=-1),
                                dict(pulse_width=0.0), dict(pulse_width=1.2),
                                dict(pulse_center=0.9, pulse_width=0.3),
                                dict(pulse_area=0.0)])
def test_build_rejects_bad_inputs(kw):
    with pytest.raises(ValueError):
        build_fem(**kw)


def test_l2_inner_examples():
    m = build_fem(n=3)
    one = np.ones(3)
    assert l2_inner(m, one, one) == pytest.approx(2 / 3, abs=1e-15)
    assert l2_inner(m, np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        l2_inner(m, np.ones(4), one)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6),
       st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
def test_l2_inner_symmetric_and_norm_positive(u, v):
    m = build_fem(n=6)
    assert l2_inner(m, u, v) == pytest.approx(l2_inner(m, v, u), rel=1e-12, abs=1e-9)
    assert l2_norm(m, u) >= 0


def test_interpolate_examples():
    m = build_fem(n=3)
    np.testing.assert_allclose(interpolate(m, lambda x: np.sin(np.pi * x)),
                               [np.sqrt(2) / 2, 1.0, np.sqrt(2) / 2], atol=1e-15)
    np.testing.assert_array_equal(interpolate(m, lambda x: 0 * x), np.zeros(3))
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        interpolate(m, lambda x: 1 / (x - 0.5))


def test_benchmark_profiles_at_40_nodes():
    m = build_fem()
    x0 = benchmark_initial_states(m)
    assert x0.shape == (5, 40)
    assert np.all(np.isfinite(x0))
    xs = np.linspace(0, 1, 20001)
    peak = np.max(np.abs(39.4 * np.sin(1.3 * np.pi * xs) * np.exp(-7 * xs ** 2)))
    assert np.abs(x0[0]).max() == pytest.approx(peak, rel=0.02)


@pytest.mark.parametrize("bad", ["__import__('os')", "x.real", "open(x)", "x +", "y * 2"])
def test_profile_whitelist(bad):
    with pytest.raises(ProfileError):
        compile_profile(bad)


def test_profiles_compile():
    for p in BENCHMARK_PROFILES:
        assert np.isfinite(compile_profile(p)(np.linspace(0, 1, 5))).all()


def test_smallest_eigenvalue_near_pi_squared():
    lam = generalized_eigenvalues(build_fem())[0]
    assert abs(lam - np.pi ** 2) / np.pi ** 2 < 1e-3


def test_operators_consistent():
    m = build_fem(n=10)
    np.testing.assert_allclose(m.mass @ m.input_shape, m.b_vec, atol=1e-12)
    np.testing.assert_allclose(m.mass @ m.a_open, -m.a1 * m.stiff, atol=1e-10)
