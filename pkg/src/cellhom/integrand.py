"""Energy densities with linear growth and their recession functions.

A density f(x, xi) maps a spatial point x in R^n and a gradient matrix
xi in R^{N x n} to a nonnegative value, and is admissible for constants
(C, alpha) when

    C^-1 |xi| <= f(x, xi) <= C (|xi| + 1)

and the scaled values f(x, t*xi)/t approach the recession function
f_inf(x, xi) at rate C/t * (1 + f(x, t*xi)^(1-alpha)).  The recession
function is positively 1-homogeneous and satisfies
C^-1 |xi| <= f_inf(x, xi) <= C |xi|.

Every catalog density factors through the gradient magnitude,
f(x, xi) = coeff(x) * profile(|xi|), which the solvers exploit for
smoothing; fully generic densities can still be wrapped via
``Integrand.from_pointwise`` (slow path, used by validation tests).

Random stationary densities are realised as ``RandomIntegrandModel``:
a unit-lattice coefficient field drawn from a splittable 64-bit hash of
(master_seed, cell), so that lattice shifts act exactly on the model and
two models with the same seed are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Integrand",
    "RandomIntegrandModel",
    "ValidationReport",
    "InputDomainError",
    "UnresolvedRecessionError",
    "eval_density",
    "eval_recession",
    "validate_admissibility",
    "make_checkerboard",
    "shift",
    "euclid",
    "area",
    "laminate",
    "resolve",
]

RECESSION_T_CAP = 1e8


class InputDomainError(ValueError):
    """Raised when an evaluation argument is outside the admissible domain."""


class UnresolvedRecessionError(RuntimeError):
    """Raised when the recession limit cannot be certified within the t-cap.

    Carries ``achieved_bound``, the error bound at the capped scaling.
    """

    def __init__(self, message, achieved_bound):
        super().__init__(message)
        self.achieved_bound = achieved_bound


def _as_points(x, n=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if n is not None and x.shape[-1] != n:
        raise InputDomainError(f"expected points in R^{n}, got shape {x.shape}")
    return x


def _frob(xis):
    """Frobenius norms of a batch of (N, n) matrices, shape (M,)."""
    return np.sqrt(np.sum(np.asarray(xis, dtype=float) ** 2, axis=(-2, -1)))


@dataclass(frozen=True)
class Integrand:
    """An evaluable energy density with declared growth constants.

    Parameters
    ----------
    id : str
        Catalog identifier, e.g. ``"euclid"`` or ``"laminate:1,2"``.
    C : float
        Growth constant, C >= 1.
    alpha : float
        Recession-rate exponent in (0, 1).
    coeff : callable or None
        Spatial factor; maps points of shape (M, n) to values (M,).
        ``None`` means coeff == 1.
    profile : callable
        Radial part; maps magnitudes (M,) to values (M,).  Present for
        every density that factors through |xi|.
    profile_deriv : callable or None
        Derivative of ``profile`` on (0, inf); required by the smoothed
        solvers.
    recession_slope : float or None
        lim_{s->inf} profile(s)/s when available in closed form; the
        closed recession is then coeff(x) * recession_slope * |xi|.
    generic_eval : callable or None
        Batch evaluator (points (M, n), xis (M, N, n)) -> (M,) for
        densities without radial structure.  When set, it takes
        precedence over (coeff, profile).
    """

    id: str
    C: float
    alpha: float
    coeff: Optional[Callable] = None
    profile: Optional[Callable] = None
    profile_deriv: Optional[Callable] = None
    recession_slope: Optional[float] = None
    generic_eval: Optional[Callable] = None
    is_positively_homogeneous: bool = False
    has_closed_recession: bool = False
    recession_eval: Optional[Callable] = None
    recession_t_cap: float = RECESSION_T_CAP

    def __post_init__(self):
        # C > 0 is structural; whether the declared C actually bounds the
        # density is the validator's job, so misdeclared constants can be
        # constructed and then failed by validate_admissibility.
        if not (self.C > 0.0):
            raise InputDomainError(f"growth constant C must be positive, got {self.C}")
        if not (0.0 < self.alpha < 1.0):
            raise InputDomainError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.profile is None and self.generic_eval is None:
            raise InputDomainError("integrand needs a radial profile or a generic evaluator")

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    @property
    def is_radial(self):
        return self.generic_eval is None

    def coeff_cells(self, points):
        if self.coeff is None:
            return np.ones(points.shape[0])
        return np.asarray(self.coeff(points), dtype=float)

    def eval_cells(self, points, xis):
        """Batch evaluation; points (M, n), xis (M, N, n) -> (M,)."""
        points = np.asarray(points, dtype=float)
        xis = np.asarray(xis, dtype=float)
        if self.generic_eval is not None:
            return np.asarray(self.generic_eval(points, xis), dtype=float)
        return self.coeff_cells(points) * np.asarray(self.profile(_frob(xis)), dtype=float)

    def eval(self, x, xi):
        """Evaluate at a single point; validates finiteness."""
        x = np.asarray(x, dtype=float).reshape(-1)
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise InputDomainError("non-finite input to density evaluation")
        return float(self.eval_cells(x[None, :], xi[None, :, :])[0])

    def recession_cells(self, points, xis):
        """Closed-form recession on a batch; requires has_closed_recession."""
        if not self.has_closed_recession:
            raise InputDomainError(f"integrand {self.id!r} has no closed recession")
        if self.recession_eval is not None:
            return np.asarray(self.recession_eval(points, xis), dtype=float)
        points = np.asarray(points, dtype=float)
        return self.coeff_cells(points) * self.recession_slope * _frob(xis)

    def smoothed_cells(self, points, xis, delta):
        """Smoothed value and xi-gradient of the density on a batch.

        For radial densities the magnitude is inflated,
        f_delta = coeff * profile(sqrt(|xi|^2 + delta^2)), which is C^1 in
        xi (gradient -> 0 as xi -> 0) and overestimates f by at most
        Lip(profile) * delta.  Densities without radial structure fall
        back to the envelope sqrt(f^2 + delta^2) - delta with central
        finite differences in xi.

        Returns (values (M,), grads (M, N, n)).
        """
        xis = np.asarray(xis, dtype=float)
        if self.is_radial:
            if self.profile_deriv is None:
                raise InputDomainError(f"integrand {self.id!r} lacks a profile derivative")
            a = self.coeff_cells(np.asarray(points, dtype=float))
            m = np.sqrt(_frob(xis) ** 2 + delta**2)
            vals = a * np.asarray(self.profile(m), dtype=float)
            scale = a * np.asarray(self.profile_deriv(m), dtype=float) / m
            grads = scale[:, None, None] * xis
            return vals, grads
        return self._moreau_cells(points, xis, delta)

    def _moreau_cells(self, points, xis, delta):
        f = self.eval_cells(points, xis)
        vals = np.sqrt(f**2 + delta**2) - delta
        grads = np.zeros_like(xis)
        step = max(delta, 1e-6) * 0.1
        for i in range(xis.shape[1]):
            for j in range(xis.shape[2]):
                dp = xis.copy()
                dp[:, i, j] += step
                dm = xis.copy()
                dm[:, i, j] -= step
                fp = self.eval_cells(points, dp)
                fm = self.eval_cells(points, dm)
                gp = np.sqrt(fp**2 + delta**2) - delta
                gm = np.sqrt(fm**2 + delta**2) - delta
                grads[:, i, j] = (gp - gm) / (2 * step)
        return vals, grads

    # ------------------------------------------------------------------
    # derived integrands
    # ------------------------------------------------------------------

    def recession_integrand(self):
        """The recession density as a standalone 1-homogeneous integrand."""
        if self.has_closed_recession and self.is_radial:
            slope = self.recession_slope
            return Integrand(
                id=f"recession({self.id})",
                C=self.C,
                alpha=self.alpha,
                coeff=self.coeff,
                profile=lambda s, k=slope: k * s,
                profile_deriv=lambda s, k=slope: np.full_like(np.asarray(s, dtype=float), k),
                recession_slope=slope,
                is_positively_homogeneous=True,
                has_closed_recession=True,
            )
        # numeric recession: certify the radial slope once via the t-scaling,
        # at the tightest tolerance the scaling cap allows
        if self.is_radial:
            M = self.C * (1.0 + (2.0 * self.C) ** (1.0 - self.alpha))
            tol = max(1e-9, 2.0 * M / self.recession_t_cap**self.alpha)
            slope = eval_recession(self, np.zeros(1), np.ones((1, 1)), tol=tol)
            g = replace(
                self,
                id=f"recession({self.id})",
                profile=lambda s, k=slope: k * s,
                profile_deriv=lambda s, k=slope: np.full_like(np.asarray(s, dtype=float), k),
                recession_slope=slope,
                is_positively_homogeneous=True,
                has_closed_recession=True,
            )
            return g
        raise InputDomainError(f"cannot build a recession integrand for {self.id!r}")

    @staticmethod
    def from_pointwise(id, fn, C, alpha, **kwargs):
        """Wrap a scalar callable fn(x, xi) into a (slow) batch integrand."""

        def batch(points, xis):
            return np.array([fn(points[m], xis[m]) for m in range(points.shape[0])])

        return Integrand(id=id, C=C, alpha=alpha, generic_eval=batch, **kwargs)


# ----------------------------------------------------------------------
# module-level operations
# ----------------------------------------------------------------------


def eval_density(g: Integrand, x, xi) -> float:
    """Evaluate f(x, xi); pure and deterministic."""
    return g.eval(x, xi)


def eval_recession(g: Integrand, x, xi, tol: float, t_cap: float | None = None) -> float:
    """Recession value f_inf(x, xi) within ``tol``.

    Uses the closed form when declared, otherwise returns f(x, T*xi)/T
    with T chosen so the admissibility-rate bound M/T^alpha on the unit
    sphere, scaled by |xi|, stays below tol.  M is derived from the
    declared (C, alpha): M = C * (1 + (2C)^(1-alpha)).
    """
    if tol <= 0:
        raise InputDomainError("tol must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    norm = float(_frob(xi[None, :, :])[0])
    if norm == 0.0:
        return 0.0
    if g.has_closed_recession:
        return float(g.recession_cells(x[None, :], xi[None, :, :])[0])
    cap = g.recession_t_cap if t_cap is None else t_cap
    M = g.C * (1.0 + (2.0 * g.C) ** (1.0 - g.alpha))
    T = max((M * norm / tol) ** (1.0 / g.alpha), 1.0)
    if T > cap:
        achieved = M * norm / cap**g.alpha
        raise UnresolvedRecessionError(
            f"recession of {g.id!r} needs scaling {T:.3g} beyond cap {cap:.3g}; "
            f"achievable bound {achieved:.3g} > tol {tol:.3g}",
            achieved_bound=achieved,
        )
    unit = xi / norm
    val = g.eval_cells(x[None, :], (T * unit)[None, :, :])[0] / T
    return float(val * norm)


@dataclass
class ValidationReport:
    """Worst-case violation margins over a random sample; <= 0 passes."""

    integrand_id: str
    growth_margin: float
    recession_rate_margins: dict
    recession_homogeneity_margin: float
    recession_bounds_margin: float
    num_samples: int
    passed: bool

    def worst(self):
        rates = list(self.recession_rate_margins.values()) or [float("-inf")]
        return max(
            self.growth_margin,
            max(rates),
            self.recession_homogeneity_margin,
            self.recession_bounds_margin,
        )


def validate_admissibility(g: Integrand, sample_spec=None, seed: int = 0) -> ValidationReport:
    """Check the declared (C, alpha) bounds on a seeded random sample.

    ``sample_spec`` carries num_x, num_xi, radius, t_values (and
    optionally n, N).  Violation margins <= 0 (within 1e-10 slack) pass;
    violations are reported, never raised.
    """
    spec = dict(num_x=16, num_xi=16, radius=4.0, t_values=(10.0, 100.0, 1000.0), n=2, N=1)
    if sample_spec:
        spec.update(sample_spec)
    if spec["num_x"] < 1 or spec["num_xi"] < 1:
        raise InputDomainError("sample counts must be >= 1")
    rng = np.random.default_rng(seed)
    n, N = spec["n"], spec["N"]
    xs = rng.uniform(-spec["radius"], spec["radius"], size=(spec["num_x"], n))
    xis = rng.uniform(-spec["radius"], spec["radius"], size=(spec["num_xi"], N, n))
    xis = np.concatenate([xis, rng.normal(size=(4, N, n))], axis=0)

    slack = 1e-10
    C = g.C
    growth = -np.inf
    rate_margins = {}
    homog = -np.inf
    rec_bounds = -np.inf

    pts = np.repeat(xs, len(xis), axis=0)
    mats = np.tile(xis, (len(xs), 1, 1))
    norms = _frob(mats)
    f = g.eval_cells(pts, mats)
    growth = float(np.max(np.maximum(norms / C - f, f - C * (norms + 1.0))))

    def recession(x, xi, norm, scale=1.0):
        # pick a tolerance achievable under the t-cap for numeric recessions
        if g.has_closed_recession:
            tol = 1e-12 * max(scale * norm, 1.0)
        else:
            M = C * (1.0 + (2.0 * C) ** (1.0 - g.alpha))
            floor = 2.0 * M * scale * norm / g.recession_t_cap**g.alpha
            tol = max(1e-8 * max(scale * norm, 1.0), floor)
        return eval_recession(g, x, xi, tol=tol), tol

    rec = [recession(pts[m], mats[m], norms[m]) for m in range(len(pts))]
    finf = np.array([v for v, _ in rec])
    finf_tol = np.array([t for _, t in rec])
    rec_bounds = float(np.max(np.maximum(norms / C - finf, finf - C * norms) - finf_tol))

    for t in spec["t_values"]:
        ft = g.eval_cells(pts, t * mats)
        lhs = np.abs(finf - ft / t)
        rhs = (C / t) * (1.0 + ft ** (1.0 - g.alpha))
        rate_margins[float(t)] = float(np.max(lhs - rhs - finf_tol))

    for lam in (0.5, 2.0, 10.0):
        rec_lam = [recession(pts[m], lam * mats[m], norms[m], scale=lam) for m in range(len(pts))]
        finf_lam = np.array([v for v, _ in rec_lam])
        allow = np.array([t for _, t in rec_lam]) + lam * finf_tol + 1e-9 * (1.0 + lam * norms)
        homog = max(homog, float(np.max(np.abs(finf_lam - lam * finf) - allow)))

    passed = (
        growth <= slack
        and all(v <= slack for v in rate_margins.values())
        and homog <= slack
        and rec_bounds <= slack
    )
    return ValidationReport(
        integrand_id=g.id,
        growth_margin=growth,
        recession_rate_margins=rate_margins,
        recession_homogeneity_margin=homog,
        recession_bounds_margin=rec_bounds,
        num_samples=len(pts),
        passed=passed,
    )


# ----------------------------------------------------------------------
# random stationary models
# ----------------------------------------------------------------------

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


def _splitmix64(x):
    """SplitMix64 finaliser on uint64 arrays; wraps mod 2^64."""
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> _U64(30))) * _MIX1
        x = (x ^ (x >> _U64(27))) * _MIX2
        return x ^ (x >> _U64(31))


def _hash_lattice(master_seed, cells):
    """Hash integer lattice points (M, n) to uniform floats in [0, 1)."""
    cells = np.asarray(cells, dtype=np.int64)
    h = _splitmix64(np.full(cells.shape[0], _U64(master_seed & 0xFFFFFFFFFFFFFFFF)))
    for j in range(cells.shape[1]):
        with np.errstate(over="ignore"):
            h = _splitmix64(h ^ cells[:, j].astype(_U64))
    return (h >> _U64(11)).astype(np.float64) / float(1 << 53)


@dataclass(frozen=True)
class RandomIntegrandModel:
    """Seed-addressed stationary family of densities on the unit lattice.

    The realised density is a(floor(x) + offset) * base(x, xi) with a
    drawn per-cell from a hash of (master_seed, cell); the ``offset``
    implements lattice shifts exactly, without re-hashing.
    """

    master_seed: int
    a_min: float
    a_max: float
    base: Integrand
    offset: tuple = ()

    def __post_init__(self):
        if self.a_min <= 0:
            raise InputDomainError("a_min must be positive")
        if self.a_min > self.a_max:
            raise InputDomainError("need a_min <= a_max")
        if self.base.coeff is not None:
            raise InputDomainError("checkerboard base must be spatially homogeneous")

    def cell_coeff(self, z):
        """Coefficient of lattice cell z (integer sequence)."""
        z = np.asarray(z, dtype=np.int64).reshape(1, -1)
        return float(self.coeff_field(z.astype(float) + 0.5)[0])

    def coeff_field(self, points):
        """Coefficients at spatial points (M, n)."""
        points = np.asarray(points, dtype=float)
        cells = np.floor(points).astype(np.int64)
        if self.offset:
            off = np.asarray(self.offset, dtype=np.int64)
            if off.shape[0] != cells.shape[1]:
                raise InputDomainError(
                    f"model shifted in dimension {off.shape[0]}, evaluated in {cells.shape[1]}"
                )
            cells = cells + off[None, :]
        u = _hash_lattice(self.master_seed, cells)
        return self.a_min + (self.a_max - self.a_min) * u

    def eval(self, x, xi):
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(self.coeff_field(x[None, :])[0]) * self.base.eval(x, xi)

    def realise(self) -> Integrand:
        """The density of this realisation as a plain Integrand."""
        tag = f"checkerboard:{self.master_seed},{self.a_min},{self.a_max},{self.base.id}"
        if self.offset:
            tag += f",offset={tuple(self.offset)}"
        return replace(
            self.base,
            id=tag,
            C=self.base.C * max(self.a_max, 1.0 / self.a_min),
            coeff=self.coeff_field,
        )


def make_checkerboard(seed, a_min, a_max, base: Integrand | None = None) -> RandomIntegrandModel:
    """Random checkerboard model with i.i.d.-style cell coefficients.

    Coefficients are uniform on [a_min, a_max] via splittable hashing of
    (seed, cell); the declared growth constant of the realisation is
    C_base * max(a_max, 1/a_min).
    """
    if base is None:
        base = euclid()
    return RandomIntegrandModel(master_seed=int(seed), a_min=float(a_min), a_max=float(a_max), base=base)


def shift(model: RandomIntegrandModel, z) -> RandomIntegrandModel:
    """Lattice shift: eval(shift(m, z), x, xi) == eval(m, x + z, xi) exactly."""
    z = np.asarray(z)
    if not np.all(z == np.round(z)):
        raise InputDomainError("shift requires an integer lattice point")
    z = z.astype(np.int64).reshape(-1)
    off = np.asarray(model.offset, dtype=np.int64) if model.offset else np.zeros(len(z), np.int64)
    if len(off) != len(z):
        raise InputDomainError("shift dimension does not match earlier shifts")
    return replace(model, offset=tuple(int(v) for v in off + z))


# ----------------------------------------------------------------------
# catalog
# ----------------------------------------------------------------------


def euclid() -> Integrand:
    """f(x, xi) = |xi|; the isotropic 1-homogeneous density."""
    return Integrand(
        id="euclid",
        C=1.0,
        alpha=0.5,
        profile=lambda s: np.asarray(s, dtype=float),
        profile_deriv=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        recession_slope=1.0,
        is_positively_homogeneous=True,
        has_closed_recession=True,
    )


def area() -> Integrand:
    """f(x, xi) = sqrt(1 + |xi|^2); smooth, recession |xi|."""
    return Integrand(
        id="area",
        C=1.0,
        alpha=0.5,
        profile=lambda s: np.sqrt(1.0 + np.asarray(s, dtype=float) ** 2),
        profile_deriv=lambda s: np.asarray(s, dtype=float) / np.sqrt(1.0 + np.asarray(s, dtype=float) ** 2),
        recession_slope=1.0,
        is_positively_homogeneous=False,
        has_closed_recession=True,
    )


def laminate(a_soft=1.0, a_hard=2.0, segment=1.0, axis=0) -> Integrand:
    """Piecewise-constant coefficient times |xi|.

    The coefficient equals ``a_soft`` on [0, segment) + 2*segment*Z along
    the chosen axis and ``a_hard`` on the complementary segments.
    """
    if a_soft <= 0 or a_hard <= 0:
        raise InputDomainError("laminate coefficients must be positive")
    period = 2.0 * segment

    def coeff(points):
        t = np.mod(points[:, axis], period)
        return np.where(t < segment, a_soft, a_hard)

    C = max(a_hard, 1.0 / a_soft, 1.0)
    return Integrand(
        id=f"laminate:{a_soft},{a_hard};seg={segment};axis={axis}",
        C=C,
        alpha=0.5,
        coeff=coeff,
        profile=lambda s: np.asarray(s, dtype=float),
        profile_deriv=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        recession_slope=1.0,
        is_positively_homogeneous=True,
        has_closed_recession=True,
    )


def resolve(spec: str):
    """Resolve a catalog id string to an Integrand or RandomIntegrandModel.

    Grammar: ``euclid`` | ``area`` | ``laminate:a1,a2[;seg=S][;axis=I]``
    | ``checkerboard:seed,a_min,a_max[,base_id]``.
    """
    spec = spec.strip()
    if spec == "euclid":
        return euclid()
    if spec == "area":
        return area()
    if spec.startswith("laminate:"):
        body = spec[len("laminate:") :]
        parts = body.split(";")
        a1, a2 = (float(v) for v in parts[0].split(","))
        kwargs = {}
        for p in parts[1:]:
            key, val = p.split("=")
            if key == "seg":
                kwargs["segment"] = float(val)
            elif key == "axis":
                kwargs["axis"] = int(val)
            else:
                raise InputDomainError(f"unknown laminate option {key!r}")
        return laminate(a1, a2, **kwargs)
    if spec.startswith("checkerboard:"):
        body = spec[len("checkerboard:") :]
        parts = [p.strip() for p in body.split(",")]
        if len(parts) < 3:
            raise InputDomainError("checkerboard needs seed,a_min,a_max[,base]")
        seed, a_min, a_max = int(parts[0]), float(parts[1]), float(parts[2])
        base = resolve(parts[3]) if len(parts) > 3 else euclid()
        if isinstance(base, RandomIntegrandModel):
            raise InputDomainError("checkerboard base must be a plain integrand")
        return make_checkerboard(seed, a_min, a_max, base)
    raise InputDomainError(f"unknown integrand id {spec!r}")
