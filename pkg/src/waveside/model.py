"""Domain types shared by the forward and inverse sides.

A ``Scenario`` is the full ground truth used to synthesize measurements.  A
``KnownPrefix`` is the only information the inverse side may see: the boundary
constant at x=0 (or the Dirichlet tag) and the potential on [0, epsilon].
``Trace`` and ``SpectralData`` are the two currencies moved between modules.

The probing protocol always starts from rest: the initial displacement is
identically zero, so every modal cosine coefficient vanishes and no operation
in the package accepts a nonzero one.

All types are frozen dataclasses holding read-only arrays, so instances can be
shared freely across threads.
"""

import numpy as np
from dataclasses import dataclass

ROBIN = "robin"
DIRICHLET = "dirichlet"

CHANNEL_U0 = "U0"      # u(0, t), the Robin measurement
CHANNEL_UX0 = "Ux0"    # u_x(0, t), the Dirichlet measurement
CHANNEL_UL = "UL"      # u(ell, t), the far-end profile
CHANNEL_FIELD = "field"  # interior field sample, not a measurement

MEASUREMENT_CHANNELS = (CHANNEL_U0, CHANNEL_UX0)
ALL_CHANNELS = (CHANNEL_U0, CHANNEL_UX0, CHANNEL_UL, CHANNEL_FIELD)

DEFAULT_GRID = 1001


class ValidationError(ValueError):
    """Invalid input data or configuration."""


class ExtractionError(RuntimeError):
    """Mode extraction could not honor its contract."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to converge."""


def _readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


def measurement_channel(variant):
    """Boundary channel read by the inverse side for the given variant."""
    return CHANNEL_U0 if variant == ROBIN else CHANNEL_UX0


@dataclass(frozen=True)
class Scenario:
    """Ground truth for the forward problem.

    The potential is stored as samples on a uniform grid over [0, length]
    with linear interpolation between nodes.  ``h`` is the boundary constant
    at x=0 (Robin variant only, u_x(0,t) = h u(0,t)); ``H`` is the one at
    x=ell (u_x(ell,t) = -H u(ell,t)); ``epsilon`` bounds the region where the
    potential is treated as known by the inverse side.
    """

    length: float
    H: float
    epsilon: float
    q: np.ndarray
    variant: str = ROBIN
    h: float = None

    def __post_init__(self):
        object.__setattr__(self, "q", _readonly(self.q))

    @classmethod
    def from_callable(cls, fn, length, H, epsilon, variant=ROBIN, h=None,
                      n_grid=DEFAULT_GRID):
        x = np.linspace(0.0, length, n_grid)
        return cls(length=float(length), H=float(H), epsilon=float(epsilon),
                   q=np.asarray(fn(x), dtype=float) * np.ones_like(x),
                   variant=variant, h=h)

    @property
    def x_grid(self):
        return np.linspace(0.0, self.length, len(self.q))

    @property
    def dx(self):
        return self.length / (len(self.q) - 1)

    def q_at(self, x):
        """Potential at arbitrary points, linear interpolation between nodes."""
        return np.interp(x, self.x_grid, self.q)


@dataclass(frozen=True)
class KnownPrefix:
    """Exactly the information the inverse side is granted.

    Holds epsilon, the boundary data at x=0 and the potential samples at
    scenario grid nodes <= epsilon.  Nothing here may depend on the length,
    on H or on the potential beyond epsilon.
    """

    epsilon: float
    variant: str
    h: float
    x: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(self.x))
        object.__setattr__(self, "q", _readonly(self.q))

    def q_at(self, x):
        """Potential on [0, epsilon]; the last sampled value is held constant
        over the (at most one grid cell wide) gap between x[-1] and epsilon."""
        return np.interp(x, self.x, self.q)


@dataclass(frozen=True)
class Trace:
    """Uniformly sampled time series of one boundary channel."""

    channel: str
    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if self.channel not in ALL_CHANNELS:
            raise ValidationError("unknown channel %r" % (self.channel,))
        if not (self.dt > 0):
            raise ValidationError("dt must be positive")
        samples = _readonly(self.samples)
        if samples.ndim != 1 or len(samples) < 2:
            raise ValidationError("trace needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("trace samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def duration(self):
        return self.dt * (len(self.samples) - 1)


@dataclass(frozen=True)
class SpectralData:
    """Ordered eigenvalue / squared-norming-constant pairs."""

    lam: np.ndarray
    alpha_sq: np.ndarray

    def __post_init__(self):
        lam = _readonly(self.lam)
        alpha_sq = _readonly(self.alpha_sq)
        if lam.shape != alpha_sq.shape or lam.ndim != 1:
            raise ValidationError("lam and alpha_sq must be 1d arrays of equal length")
        if np.any(np.diff(lam) <= 0):
            raise ValidationError("eigenvalues must be strictly increasing")
        if np.any(alpha_sq <= 0):
            raise ValidationError("norming constants must be positive")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha_sq", alpha_sq)

    def __len__(self):
        return len(self.lam)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = sorted(pairs)
        return cls(np.array([p[0] for p in pairs], dtype=float),
                   np.array([p[1] for p in pairs], dtype=float))


def validate_scenario(s):
    """Check every Scenario invariant; return the scenario unchanged.

    Raises ValidationError naming the first violated invariant.  Validation
    is idempotent.
    """
    if not np.isfinite(s.length) or s.length <= 0:
        raise ValidationError("length must be a positive real")
    if s.variant == ROBIN:
        if s.h is None or not np.isfinite(s.h):
            raise ValidationError("robin variant requires a finite real h")
    elif s.variant == DIRICHLET:
        if s.h is not None:
            raise ValidationError("dirichlet variant carries no h")
    else:
        raise ValidationError("unknown variant %r" % (s.variant,))
    if not np.isfinite(s.H):
        raise ValidationError("H must be a finite real")
    if not (0.0 < s.epsilon < 1.0):
        raise ValidationError("epsilon must satisfy 0<eps<1")
    if s.epsilon >= s.length:
        raise ValidationError("epsilon must be < length")
    if len(s.q) < 2:
        raise ValidationError("potential grid needs at least 2 nodes")
    if not np.all(np.isfinite(s.q)):
        raise ValidationError("potential samples must be finite")
    return s


def check_uniform_grid(x, name="grid"):
    """Require strictly increasing, uniformly spaced nodes; return spacing."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValidationError("%s needs at least 2 nodes" % name)
    d = np.diff(x)
    if np.any(d <= 0):
        raise ValidationError("%s must be strictly increasing" % name)
    if not np.allclose(d, d[0], rtol=1e-8, atol=1e-12 * max(1.0, abs(x[-1]))):
        raise ValidationError("%s must be uniform" % name)
    return float(d[0])


def known_prefix_of(s):
    """Restrict a scenario to the data the inverse side is allowed to see.

    The returned prefix holds the potential at scenario grid nodes <= epsilon
    and nothing sampled beyond epsilon.
    """
    validate_scenario(s)
    x = s.x_grid
    keep = x <= s.epsilon + 1e-12 * s.length
    return KnownPrefix(epsilon=s.epsilon, variant=s.variant, h=s.h,
                       x=x[keep], q=s.q[keep])
