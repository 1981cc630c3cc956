import numpy as np
import pytest

from waveside import (
    Scenario, ValidationError, synthesize_trace, field_at, laplace_of_trace,
    b_closed_form,
)
from waveside.synth import ModalCoefficients

import oracles


def test_free_single_mode_is_linear(free_pi):
    # lam_0 is zero only to bisection tolerance, which the sinc series
    # propagates at the 1e-10 level over the trace duration
    tr = synthesize_trace(free_pi, 1)
    slope = (0.5 ** 3 / 3) / np.pi
    np.testing.assert_allclose(tr.samples, slope * tr.t, rtol=1e-8,
                               atol=1e-15)


def test_trace_starts_at_zero(one_pi):
    tr = synthesize_trace(one_pi, 10)
    assert tr.samples[0] == 0.0


def test_channels_by_variant(free_pi, dirichlet_one):
    assert synthesize_trace(free_pi, 3).channel == "U0"
    assert synthesize_trace(dirichlet_one, 3).channel == "Ux0"


def test_field_matches_trace_at_zero(one_pi):
    tr = synthesize_trace(one_pi, 12)
    t = tr.t[:500]
    fld = field_at(one_pi, 0.0, t, 12)
    np.testing.assert_allclose(fld.samples, tr.samples[:500], atol=1e-14)
    assert fld.channel == "U0"


def test_field_is_zero_at_t0(qx_unit):
    t = np.linspace(0.0, 5.0, 101)
    for x in (0.0, 0.3, 1.0):
        fld = field_at(qx_unit, x, t, 8)
        assert fld.samples[0] == 0.0


def test_field_channel_labels(one_pi):
    t = np.linspace(0.0, 1.0, 11)
    assert field_at(one_pi, np.pi, t, 4).channel == "UL"
    assert field_at(one_pi, 1.2, t, 4).channel == "field"


def test_trace_against_fdtd(one_pi, g_profile_cache):
    g = g_profile_cache(one_pi)
    t = np.arange(0.0, 20.0, 0.01)
    left, _ = oracles.fdtd_boundary_traces(one_pi.q, np.pi, 0.0, 0.0,
                                           g.samples, t)
    tr = field_at(one_pi, 0.0, t, 30)
    assert np.max(np.abs(tr.samples - left)) < 1e-3


def test_default_sampling_resolves_fastest_mode(one_pi):
    tr = synthesize_trace(one_pi, 25)
    modal = ModalCoefficients.from_scenario(one_pi, 25)
    assert np.sqrt(modal.lam[-1]) * tr.dt <= np.pi / 8 + 1e-12
    assert tr.duration >= 40 * np.pi - tr.dt


def test_trace_continuity_under_refinement(one_pi):
    coarse = synthesize_trace(one_pi, 15)
    fine = synthesize_trace(one_pi, 15, dt=coarse.dt / 4)
    jump_c = np.max(np.abs(np.diff(coarse.samples)))
    jump_f = np.max(np.abs(np.diff(fine.samples)))
    assert jump_f < jump_c / 2


def test_amplitude_decay_slope(one_pi):
    modal = ModalCoefficients.from_scenario(one_pi, 30)
    amp, zero = modal.sine_amplitudes()
    n = np.arange(5, 30)
    slope = np.polyfit(np.log(n), np.log(np.abs(amp[5:30])), 1)[0]
    assert slope <= -2.8


def test_negative_mode_warns():
    s = Scenario(length=np.pi, H=0.0, epsilon=0.5, q=-5 * np.ones(1001),
                 variant="robin", h=0.0)
    with pytest.warns(RuntimeWarning, match="sinh"):
        synthesize_trace(s, 3, duration=1.0)


def test_laplace_single_mode():
    modal = ModalCoefficients(variant="robin", lam=np.array([1.0]),
                              alpha_sq=np.array([1.0]), b=np.array([1.0]))
    assert abs(laplace_of_trace(modal, 1.0) - 0.5) < 1e-15


def test_laplace_pole_guard():
    modal = ModalCoefficients(variant="robin", lam=np.array([4.0]),
                              alpha_sq=np.array([1.0]), b=np.array([1.0]))
    with pytest.raises(ValidationError, match="pole"):
        laplace_of_trace(modal, 2j + 1e-12)


def test_laplace_residue_matches_modal_weight(one_pi):
    # (s - i sqrt(lam_n)) L(u)(s) -> b_n / (2 i sqrt(lam_n) alpha_n^2)
    modal = ModalCoefficients.from_scenario(one_pi, 8)
    n = 3
    root = 1j * np.sqrt(modal.lam[n])
    s = root + 1e-6
    lhs = (s - root) * laplace_of_trace(modal, s)
    want = modal.b[n] / (2 * root * modal.alpha_sq[n])
    assert abs(lhs - want) / abs(want) < 1e-4


def test_laplace_matches_time_quadrature(one_pi):
    # numerical Laplace transform of a finely sampled synthesized trace
    modal = ModalCoefficients.from_scenario(one_pi, 12)
    tr = synthesize_trace(one_pi, 12, dt=0.002)
    t = tr.t
    sval = 2.0
    quadrature = np.trapezoid(np.exp(-sval * t) * tr.samples, t)
    series = laplace_of_trace(modal, sval).real
    assert abs(quadrature - series) < 1e-4


def test_parseval_partial_sums(free_pi):
    modal = ModalCoefficients.from_scenario(free_pi, 100)
    partial = np.cumsum(modal.b ** 2 / modal.alpha_sq)
    total = 0.5 ** 5 / 5  # integral of (x - 1/2)^4 over [0, 1/2]
    assert np.all(np.diff(partial) > 0)
    assert abs(partial[-1] - total) / total < 0.01


def test_modal_b_uses_closed_form(qx_unit):
    modal = ModalCoefficients.from_scenario(qx_unit, 5)
    np.testing.assert_allclose(
        modal.b, b_closed_form(modal.lam, qx_unit.epsilon), rtol=1e-12)


def test_field_outside_domain_rejected(free_pi):
    with pytest.raises(ValidationError, match="outside"):
        field_at(free_pi, 4.0, np.linspace(0, 1, 5), 3)
