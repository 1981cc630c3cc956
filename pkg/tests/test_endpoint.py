import numpy as np
import pytest

from waveside import (
    Scenario, ValidationError, eigenvalues, solve_ivp, field_at,
    BoundaryFunction, phi, phi_prime, far_end_profile,
    synthesize_trace, detect_modes,
)

import oracles


@pytest.fixture(scope="module")
def free_bf():
    return BoundaryFunction.from_eigenvalues(np.arange(40.0) ** 2, np.pi,
                                             "robin")


def test_phi_free_closed_form(free_bf):
    # free case: phi(lam) = -sqrt(lam) sin(pi sqrt(lam))
    assert abs(phi(free_bf, 2.25) - 1.5) < 1e-10
    for lam in (0.5, 7.3, 150.7):
        want = -np.sqrt(lam) * np.sin(np.pi * np.sqrt(lam))
        assert abs(phi(free_bf, lam) - want) < 1e-7 * abs(want)


def test_phi_vanishes_at_supplied_eigenvalues(free_bf):
    assert phi(free_bf, 9.0) == 0.0
    assert phi(free_bf, 25.0) == 0.0


def test_phi_prime_free_values(free_bf):
    assert abs(phi_prime(free_bf, 0) + np.pi) < 1e-10
    for n in range(1, 6):
        want = -(np.pi / 2) * (-1.0) ** n
        assert abs(phi_prime(free_bf, n) - want) < 1e-10


def test_phi_sign_changes_between_zeros(free_bf):
    lam = free_bf.lam
    mids = 0.5 * (lam[:-1] + lam[1:])
    vals = phi(free_bf, mids)
    signs = np.sign(vals)
    assert np.all(signs[:-1] * signs[1:] < 0)


def test_phi_matches_forward_solver(one_pi):
    res = eigenvalues(one_pi, 40)
    bf = BoundaryFunction.from_eigenvalues([r.lam for r in res], np.pi,
                                           "robin")
    assert abs(bf.tail_shift - 1.0) < 1e-6
    for lam in (0.5, 2.5, 7.3):
        sol = solve_ivp(one_pi, lam)
        fwd = sol.y_prime[-1] + one_pi.H * sol.y[-1]
        assert abs(phi(bf, lam) - fwd) / abs(fwd) < 1e-4


def test_norming_identity(one_pi):
    # alpha_n^2 = -y(ell, lam_n) Phi'(lam_n)
    res = eigenvalues(one_pi, 40)
    bf = BoundaryFunction.from_eigenvalues([r.lam for r in res], np.pi,
                                           "robin")
    for r in res[:10]:
        got = -r.y_at_ell * phi_prime(bf, r.index)
        assert abs(got - r.alpha_sq) / r.alpha_sq < 1e-4


def test_far_end_zero_at_t0(free_pi):
    t = np.linspace(0.0, 5.0, 64)
    far = far_end_profile(np.arange(30.0) ** 2, 0.5, np.pi, t)
    assert far.samples[0] == 0.0
    assert far.channel == "UL"


def test_far_end_free_matches_field(free_pi):
    t = np.arange(0.0, 20.0, 0.01)
    lam = np.array([r.lam for r in eigenvalues(free_pi, 30)])
    far = far_end_profile(lam, 0.5, np.pi, t)
    fld = field_at(free_pi, np.pi, t, 30)
    assert np.max(np.abs(far.samples - fld.samples)) < 1e-4


def test_far_end_from_extracted_modes_matches_fdtd(one_pi, g_profile_cache):
    # end to end: only the measured trace and the prefix are used
    tr = synthesize_trace(one_pi, 30)
    modes = detect_modes(tr, 30)
    lam_hat = np.array([m.omega ** 2 for m in modes if not m.is_linear_term])
    t = np.arange(0.0, 20.0, 0.01)
    far = far_end_profile(lam_hat, 0.5, np.pi, t)
    g = g_profile_cache(one_pi)
    _, right = oracles.fdtd_boundary_traces(one_pi.q, np.pi, 0.0, 0.0,
                                            g.samples, t)
    assert np.max(np.abs(far.samples - right)) < 1e-3


def test_far_end_dirichlet_matches_field():
    s = Scenario(length=np.pi, H=0.0, epsilon=0.5, q=np.zeros(1001),
                 variant="dirichlet")
    t = np.arange(0.0, 15.0, 0.01)
    lam = np.array([r.lam for r in eigenvalues(s, 30)])
    far = far_end_profile(lam, 0.5, np.pi, t, variant="dirichlet")
    fld = field_at(s, np.pi, t, 30)
    assert np.max(np.abs(far.samples - fld.samples)) < 1e-4


def test_boundary_function_input_validation():
    with pytest.raises(ValidationError, match="at least 10"):
        BoundaryFunction.from_eigenvalues(np.arange(5.0), np.pi)
    bad = np.array([0.0, 2.0, 1.0] + list(np.arange(3.0, 12.0) ** 2))
    with pytest.raises(ValidationError, match="increasing"):
        BoundaryFunction.from_eigenvalues(bad, np.pi)


def test_phi_beyond_range_rejected(free_bf):
    with pytest.raises(ValidationError, match="beyond"):
        phi(free_bf, 1e7)
