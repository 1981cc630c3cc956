import numpy as np
import pytest
from scipy.integrate import quad

from waveside import (
    Scenario, known_prefix_of, compute_kernel, kernel_identity_residual,
    build_g, b_closed_form, fourier_coefficient, eigenvalues,
)
from waveside.transmute import psi

import oracles


@pytest.fixture(scope="module")
def one_pi_kernel(one_pi):
    prefix = known_prefix_of(one_pi)
    return prefix, compute_kernel(prefix)


def test_free_robin_kernel_vanishes(free_pi):
    k = compute_kernel(known_prefix_of(free_pi))
    assert np.max(np.abs(k.values)) < 1e-8
    assert np.max(k.row_residuals) < 1e-6


def test_free_dirichlet_kernel_vanishes():
    s = Scenario(length=np.pi, H=0.0, epsilon=0.5, q=np.zeros(1001),
                 variant="dirichlet")
    k = compute_kernel(known_prefix_of(s))
    assert np.max(np.abs(k.values)) < 1e-8


def test_identity_residual_at_probe_lambdas(one_pi_kernel):
    prefix, kernel = one_pi_kernel
    assert kernel_identity_residual(kernel, prefix, [0.0, 1.0, 4.0, 25.0]) < 1e-6
    # off the collocation nodes as well
    assert kernel_identity_residual(kernel, prefix, [2.5, 7.3, 110.9]) < 1e-6


def test_kernel_matches_exponential_closed_form():
    # q = 0 with h != 0 has the exact inverse kernel -h exp(-h (x - t))
    s = Scenario(length=np.pi, H=0.0, epsilon=0.5, q=np.zeros(1001),
                 variant="robin", h=0.3)
    k = compute_kernel(known_prefix_of(s))
    x = k.x
    errs = [np.max(np.abs(k.values[i, : i + 1]
                          + 0.3 * np.exp(-0.3 * (x[i] - x[: i + 1]))))
            for i in range(20, len(x))]
    assert max(errs) < 2e-3


def test_kernel_matches_goursat_oracle(one_pi_kernel):
    prefix, kernel = one_pi_kernel
    xo, Ho = oracles.goursat_inverse_kernel(
        lambda x: np.ones_like(np.asarray(x, dtype=float)), 0.0, 0.5, m=200)
    np.testing.assert_allclose(xo, kernel.x, atol=1e-12)
    diffs = [np.max(np.abs(kernel.values[i, : i + 1] - Ho[i, : i + 1]))
             for i in range(20, len(xo))]
    assert max(diffs) < 2e-3


def test_build_g_free_is_psi(free_pi, g_profile_cache):
    g = g_profile_cache(free_pi)
    x = free_pi.x_grid
    want = np.where(x < 0.5, (x - 0.5) ** 2, 0.0)
    np.testing.assert_allclose(g.samples, want, atol=1e-12)
    assert g.support_end == 0.5


def test_build_g_free_dirichlet_is_psi():
    s = Scenario(length=np.pi, H=0.0, epsilon=0.5, q=np.zeros(1001),
                 variant="dirichlet")
    prefix = known_prefix_of(s)
    g = build_g(prefix, compute_kernel(prefix), s.x_grid)
    x = s.x_grid
    np.testing.assert_allclose(g.samples, np.where(x < 0.5, 0.5 - x, 0.0),
                               atol=1e-12)


def test_g_supported_in_prefix(one_pi, g_profile_cache):
    g = g_profile_cache(one_pi)
    x = one_pi.x_grid
    assert np.all(g.samples[x >= 0.5] == 0.0)
    # continuity at the support edge
    left = g.samples[x < 0.5]
    assert abs(left[-1]) < 1e-5


def test_transform_identity_robin(one_pi, g_profile_cache):
    # the probing profile's eigenfunction transform equals the closed form
    g = g_profile_cache(one_pi)
    for r in eigenvalues(one_pi, 10):
        want = b_closed_form(r.lam, 0.5, "robin")
        got = fourier_coefficient(one_pi, g.samples, r.lam)
        assert abs(got - want) / want < 1e-5


def test_transform_identity_dirichlet(dirichlet_one):
    prefix = known_prefix_of(dirichlet_one)
    g = build_g(prefix, compute_kernel(prefix), dirichlet_one.x_grid)
    for r in eigenvalues(dirichlet_one, 10):
        want = b_closed_form(r.lam, 0.5, "dirichlet")
        got = fourier_coefficient(dirichlet_one, g.samples, r.lam)
        assert abs(got - want) / want < 1e-5


def test_b_closed_form_values():
    # robin at eps=1, lam=pi^2: 2(pi - sin pi)/pi^3 = 2/pi^2
    assert abs(b_closed_form(np.pi ** 2, 1.0 - 1e-12) - 2 / np.pi ** 2) < 1e-10
    # lam -> 0 limits
    assert abs(b_closed_form(0.0, 0.5) - 0.5 ** 3 / 3) < 1e-14
    assert abs(b_closed_form(0.0, 0.5, "dirichlet") - 0.5 ** 3 / 6) < 1e-14


def test_b_closed_form_dirichlet_against_quadrature():
    # frozen from the quadrature oracle of the sine transform of (eps - x)
    want = quad(lambda x: (0.5 - x) * np.sin(2 * x) / 2.0, 0.0, 0.5)[0]
    got = b_closed_form(4.0, 0.5, "dirichlet")
    assert abs(want - 0.019816126899012937) < 1e-12
    assert abs(got - want) < 1e-12


def test_b_closed_form_robin_against_quadrature():
    want = quad(lambda x: (0.5 - x) ** 2 * np.cos(3 * x), 0.0, 0.5)[0]
    assert abs(b_closed_form(9.0, 0.5) - want) < 1e-12


@pytest.mark.parametrize("variant", ["robin", "dirichlet"])
def test_b_positive_everywhere(variant):
    lam = np.concatenate([
        -np.logspace(4, -6, 40), [0.0], np.logspace(-6, 6, 60)])
    vals = b_closed_form(lam, 0.5, variant)
    assert np.all(vals > 0.0)


def test_b_decay_rate():
    # b = O(1/lam): the ratio lam*b stays bounded and settles
    lam = np.logspace(2, 6, 9)
    scaled = lam * b_closed_form(lam, 0.5)
    assert np.all(scaled < 2.0)
    assert np.all(scaled > 0.1)


def test_b_smooth_across_series_switch():
    # values straddling the small-argument series cutoff agree
    eps = 0.5
    lam = np.array([1e-7, 1e-6, 1e-5]) / eps ** 2
    v = b_closed_form(lam, eps)
    assert np.all(np.diff(v) < 0)
    assert abs(v[0] / (eps ** 3 / 3) - 1) < 1e-6


def test_psi_profiles():
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(psi("robin", x, 0.5)[:6],
                               (x[:6] - 0.5) ** 2)
    assert np.all(psi("dirichlet", x, 0.5)[6:] == 0.0)
