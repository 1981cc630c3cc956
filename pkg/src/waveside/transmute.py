"""Transmutation kernels on [0, epsilon] and the probing initial condition.

The kernel maps solutions of the perturbed problem back to the free ones on
the known prefix: for the robin variant

    cos(x*sqrt(lam)) = y(x, lam) + integral_0^x H(x, t) y(t, lam) dt,

and for the dirichlet variant with sin(x*sqrt(mu))/sqrt(mu) on the left and
phi in place of y.  Only data from the known prefix enters: the kernel rows
are recovered by least-squares collocation of this identity over the
spectral nodes lam = k^2, k = 0..40, using IVP solutions on [0, epsilon].

From the kernel, a compactly supported initial velocity g is assembled so
that its eigenfunction transform equals a known, everywhere positive closed
form b(lam).  That closed form is what makes one boundary trace carry the
complete spectral data.
"""

import numpy as np
from dataclasses import dataclass
from scipy.interpolate import CubicSpline

from .model import ROBIN, ConvergenceError, ValidationError
from .sturm import solve_on_nodes
from .trig import cos_sqrt, sinc_sqrt

DEFAULT_KERNEL_NODES = 200
DEFAULT_LAMBDA_NODES = np.arange(41.0) ** 2
IDENTITY_TOL = 1e-6


@dataclass(frozen=True)
class TransmutationKernel:
    """Kernel values on the triangle 0 <= t <= x <= epsilon.

    ``values[i, j]`` holds the kernel at (x_i, t_j) for j <= i; entries above
    the diagonal are zero.  ``row_residuals`` records the collocation
    least-squares residual of every row.
    """

    variant: str
    epsilon: float
    x: np.ndarray
    values: np.ndarray
    row_residuals: np.ndarray


@dataclass(frozen=True)
class InitialCondition:
    """Initial velocity samples on the scenario grid; zero beyond epsilon."""

    samples: np.ndarray
    support_end: float


def _free_side(variant, lam, x):
    return cos_sqrt(lam, x) if variant == ROBIN else sinc_sqrt(lam, x)


def psi(variant, x, epsilon):
    """Seed profile whose free transform is the closed form b."""
    x = np.asarray(x, dtype=float)
    inside = x <= epsilon
    if variant == ROBIN:
        return np.where(inside, (x - epsilon) ** 2, 0.0)
    return np.where(inside, epsilon - x, 0.0)


def b_closed_form(lam, epsilon, variant=ROBIN):
    """Eigenfunction transform of the probing initial condition.

    Robin: 2 (z - sin z) / lam^(3/2) with z = epsilon*sqrt(lam); dirichlet:
    (z - sin z) / mu^(3/2).  Strictly positive for every real lam; the
    removable singularity at lam = 0 (values epsilon^3/3 and epsilon^3/6) is
    handled by a three-term series, and lam < 0 by the sinh branch.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValidationError("epsilon must satisfy 0<eps<1")
    lam = np.asarray(lam, dtype=float)
    scale = 2.0 if variant == ROBIN else 1.0
    z2 = lam * epsilon * epsilon          # (eps*sqrt(lam))^2, sign of lam
    rt = np.sqrt(np.abs(z2))
    with np.errstate(invalid="ignore", divide="ignore"):
        p32 = np.abs(lam) ** 1.5
        osc = (rt - np.sin(rt)) / np.where(p32 == 0.0, 1.0, p32)
        hyp = (np.sinh(rt) - rt) / np.where(p32 == 0.0, 1.0, p32)
    series = epsilon ** 3 * (1.0 / 6.0 - z2 / 120.0 + z2 * z2 / 5040.0)
    out = np.where(z2 >= 0.0, osc, hyp)
    out = np.where(np.abs(z2) < 1e-6, series, out)
    out = scale * out
    return out if out.ndim else float(out)


def _kernel_grid(epsilon, n_nodes):
    return np.linspace(0.0, epsilon, n_nodes)


def _row_weights(n, dx):
    """Gregory fourth-order endpoint-corrected weights; trapezoid when short."""
    w = np.full(n, dx)
    if n >= 8:
        w[0] = w[-1] = dx * 3.0 / 8.0
        w[1] = w[-2] = dx * 7.0 / 6.0
        w[2] = w[-3] = dx * 23.0 / 24.0
    else:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w


def compute_kernel(prefix, n_nodes=DEFAULT_KERNEL_NODES, lambda_nodes=None,
                   tol=IDENTITY_TOL):
    """Recover the transmutation kernel from the known prefix alone.

    Each row x_i gives one linear relation between the kernel values
    H(x_i, t_j), j <= i, and IVP solutions sampled at the collocation
    spectral nodes; rows are solved independently by least squares (the
    minimum-norm solution where the row is underdetermined).  Raises
    ConvergenceError with the per-row residual history if the collocation
    residual exceeds ``tol``.
    """
    lam = DEFAULT_LAMBDA_NODES if lambda_nodes is None else np.asarray(lambda_nodes, float)
    x = _kernel_grid(prefix.epsilon, n_nodes)
    dx = x[1] - x[0]
    _, Y, _ = solve_on_nodes(prefix, lam, nodes=x)
    free = _free_side(prefix.variant, lam[None, :], x[:, None])
    rhs_all = free - Y

    values = np.zeros((n_nodes, n_nodes))
    resid = np.zeros(n_nodes)
    # row 0 carries no integral; the diagonal limit is -h (robin) or 0.
    values[0, 0] = -prefix.h if prefix.variant == ROBIN else 0.0
    for i in range(1, n_nodes):
        w = _row_weights(i + 1, dx)
        rw = np.sqrt(w)
        rhs = rhs_all[i]
        if np.max(np.abs(rhs)) < 1e-12:
            continue
        # Column scaling by sqrt(w) makes the minimum-norm solution the
        # w-weighted projection onto span{y(., lam_k)}, i.e. a smooth kernel
        # row instead of one distorted by the quadrature weights; the rcond
        # cutoff drops directions the collocation nodes cannot determine,
        # whose coefficients would otherwise be set by quadrature noise.
        A = rw[None, :] * Y[: i + 1, :].T
        sol, _, _, _ = np.linalg.lstsq(A, rhs, rcond=1e-4)
        values[i, : i + 1] = sol / rw
        resid[i] = np.max(np.abs(A @ sol - rhs))
    if np.max(resid) > tol:
        raise ConvergenceError(
            "kernel collocation residual %.3g exceeds %.1g (history: %s)"
            % (float(np.max(resid)), tol, np.array2string(resid, precision=2)))
    return TransmutationKernel(variant=prefix.variant, epsilon=prefix.epsilon,
                               x=x, values=values, row_residuals=resid)


def kernel_identity_residual(kernel, prefix, lam_values):
    """Max relative residual of the transmutation identity at given lam."""
    lam = np.atleast_1d(np.asarray(lam_values, dtype=float))
    _, Y, _ = solve_on_nodes(prefix, lam, nodes=kernel.x)
    free = _free_side(prefix.variant, lam[None, :], kernel.x[:, None])
    dx = kernel.x[1] - kernel.x[0]
    worst = 0.0
    for i in range(len(kernel.x)):
        w = _row_weights(i + 1, dx) if i else np.zeros(1)
        lhs = Y[i] + (w * kernel.values[i, : i + 1]) @ Y[: i + 1]
        worst = max(worst, float(np.max(np.abs(lhs - free[i]) /
                                        np.maximum(np.abs(free[i]), 1.0))))
    return worst


def build_g(prefix, kernel, x_grid):
    """Assemble the probing initial velocity on the scenario grid.

    g(x) = psi(x) + integral_x^epsilon kernel(t, x) psi(t) dt on [0, epsilon)
    and 0 beyond.  Values at scenario nodes come from a cubic spline through
    the kernel-grid samples, so the construction uses prefix data only.
    """
    if kernel.variant != prefix.variant:
        raise ValidationError("kernel variant does not match prefix")
    xk = kernel.x
    dx = xk[1] - xk[0]
    psi_k = psi(prefix.variant, xk, prefix.epsilon)
    g_k = psi_k.copy()
    for j in range(len(xk) - 1):
        w = _row_weights(len(xk) - j, dx)
        g_k[j] += w @ (kernel.values[j:, j] * psi_k[j:])
    spline = CubicSpline(xk, g_k)
    x_grid = np.asarray(x_grid, dtype=float)
    out = np.where(x_grid < prefix.epsilon, spline(np.minimum(x_grid, prefix.epsilon)), 0.0)
    return InitialCondition(samples=out, support_end=prefix.epsilon)
