import numpy as np
import pytest

from waveside import (
    Trace, ValidationError, ConvergenceError, known_prefix_of,
    synthesize_trace, field_at, TraceReconstructor,
)


def reconstructor_for(scenario, max_modes=20):
    prefix = known_prefix_of(scenario)
    return TraceReconstructor(
        epsilon=scenario.epsilon, variant=scenario.variant,
        h=scenario.h if scenario.variant == "robin" else 0.0,
        q_prefix_x=prefix.x, q_prefix=prefix.q, max_modes=max_modes)


def test_full_fit_free_scenario(free_pi):
    tr = synthesize_trace(free_pi, 20)
    rec = reconstructor_for(free_pi).fit(tr)
    assert abs(rec.ell_ - np.pi) < 1e-4
    assert abs(rec.H_) < 5e-2
    assert abs(rec.h_hat_) < 5e-2
    assert np.max(np.abs(rec.q_)) < 0.05
    assert rec.report_.n_modes == 20


def test_full_fit_one_pi(one_pi, spectrum_cache):
    tr = synthesize_trace(one_pi, 20)
    rec = reconstructor_for(one_pi).fit(tr)
    want = spectrum_cache(one_pi, 20)
    np.testing.assert_allclose(rec.spectral_data_.lam, want.lam, rtol=1e-6)
    assert abs(rec.a1_ - np.pi / 2) < 5e-2
    # 20 modes resolve q away from the margin; the last stretch degrades
    inner = rec.q_x_ <= 0.8 * np.pi
    assert np.max(np.abs(rec.q_[inner] - 1.0)) < 0.1


def test_fit_accepts_plain_arrays(free_pi):
    tr = synthesize_trace(free_pi, 10)
    rec = reconstructor_for(free_pi, max_modes=10)
    rec.fit(tr.t, tr.samples)
    assert abs(rec.ell_ - np.pi) < 1e-3


def test_channel_mismatch_rejected(free_pi):
    tr = synthesize_trace(free_pi, 5)
    bad = Trace(channel="UL", t0=tr.t0, dt=tr.dt, samples=tr.samples)
    with pytest.raises(ValidationError, match="not a measurement input"):
        reconstructor_for(free_pi).fit(bad)


def test_h_self_consistency_enforced(free_pi):
    tr = synthesize_trace(free_pi, 12)
    prefix = known_prefix_of(free_pi)
    rec = TraceReconstructor(epsilon=0.5, variant="robin", h=0.7,
                             q_prefix_x=prefix.x, q_prefix=prefix.q,
                             max_modes=12)
    # claiming h=0.7 while the trace was produced with h=0 must fail loudly
    with pytest.raises(ConvergenceError, match="self-consistency"):
        rec.fit(tr)


def test_far_end_method(free_pi):
    tr = synthesize_trace(free_pi, 20)
    rec = reconstructor_for(free_pi).fit(tr)
    t = np.arange(0.0, 10.0, 0.01)
    far = rec.far_end(t)
    fld = field_at(free_pi, np.pi, t, 20)
    assert np.max(np.abs(far.samples - fld.samples)) < 1e-4


def test_dirichlet_pipeline(dirichlet_one, spectrum_cache):
    tr = synthesize_trace(dirichlet_one, 15)
    rec = reconstructor_for(dirichlet_one, max_modes=15).fit(tr)
    want = spectrum_cache(dirichlet_one, 15)
    np.testing.assert_allclose(rec.spectral_data_.lam, want.lam, rtol=1e-6)
    assert abs(rec.ell_ - np.pi) < 1e-3
    # H folds in the integral of the 15-mode q, so only coarse here
    assert abs(rec.H_) < 0.2


def test_sklearn_param_interface():
    rec = TraceReconstructor(epsilon=0.3, max_modes=12)
    params = rec.get_params()
    assert params["epsilon"] == 0.3
    rec.set_params(max_modes=8)
    assert rec.max_modes == 8
