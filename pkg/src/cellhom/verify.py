"""Property checks on the estimated effective densities.

Each check compares estimates produced by :mod:`cellhom.homogenise`
against a quantitative property the effective densities are known to
satisfy: growth bounds and a dimensional Lipschitz bound for the bulk
density, amplitude bounds, symmetry under (zeta, nu) -> (-zeta, -nu) and
a Lipschitz bound in the jump amplitude for the surface density,
agreement of the two recession routes, and covariance, subadditivity and
volume boundedness of the interval process.

A check returns a ``PropertyCheck`` whose signed margin is normalised so
that margin <= tolerance means pass; violations are content, never
exceptions, and re-running a check with the same configuration and seeds
reproduces it bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .homogenise import (
    HomEstimate,
    Schedule,
    estimate_f_hom,
    estimate_f_inf_hom,
    estimate_g_hom,
    lattice_period,
    subadditive_process_eval,
)
from .integrand import InputDomainError, Integrand, RandomIntegrandModel, shift
from .solvers import SolverOptions

__all__ = [
    "PropertyCheck",
    "check_fhom_growth",
    "check_fhom_lipschitz",
    "check_fhom_rank_one_convexity",
    "check_ghom_bounds",
    "check_ghom_symmetry_and_lipschitz",
    "check_recession_routes",
    "check_subadditive_process",
    "run_suite",
    "RAMP_SLOPE_MAX",
]

# peak slope of the cubic smoothstep ramp on the unit-width transition
RAMP_SLOPE_MAX = 1.5


@dataclass
class PropertyCheck:
    """One verified property: pass iff margin <= tolerance."""

    name: str
    inputs: dict
    margin: float
    tolerance: float
    passed: bool
    provenance: str

    @staticmethod
    def of(name, inputs, margin, tolerance, provenance):
        return PropertyCheck(
            name=name,
            inputs=inputs,
            margin=float(margin),
            tolerance=float(tolerance),
            passed=bool(margin <= tolerance),
            provenance=provenance,
        )


def _norm(x):
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def check_fhom_growth(estimates: Sequence[HomEstimate], C: float, rel_slack: float = 0.03) -> PropertyCheck:
    """C^-1 |xi| <= estimate <= C (|xi| + 1), with relative slack."""
    margin = -np.inf
    for est in estimates:
        xi = est.argument[0]
        lo = _norm(xi) / C
        hi = C * (_norm(xi) + 1.0)
        val = est.extrapolated
        margin = max(margin, (lo - val) / max(lo, 1e-12), (val - hi) / hi)
    return PropertyCheck.of(
        "fhom-growth",
        {"C": C, "num_estimates": len(estimates)},
        margin,
        rel_slack,
        "growth-bounds:effective-bulk-density",
    )


def check_fhom_lipschitz(
    estimates: Sequence[HomEstimate], C: float, n: int, K_cap: Optional[float] = None
) -> PropertyCheck:
    """Difference quotients |est(xi1) - est(xi2)| / |xi1 - xi2| below a cap.

    The default cap C * sqrt(n) * n * H^{n-1}(boundary of unit cube) is a
    generous dimensional constant; H^{n-1} of the unit-cube boundary is
    2n.
    """
    if len(estimates) < 3:
        raise InputDomainError("need at least 3 estimates for the Lipschitz check")
    cap = C * np.sqrt(n) * n * (2.0 * n) if K_cap is None else K_cap
    worst = 0.0
    for i in range(len(estimates)):
        for j in range(i + 1, len(estimates)):
            xi1, xi2 = estimates[i].argument[0], estimates[j].argument[0]
            d = _norm(np.asarray(xi1) - np.asarray(xi2))
            if d < 1e-12:
                continue
            worst = max(worst, abs(estimates[i].extrapolated - estimates[j].extrapolated) / d)
    return PropertyCheck.of(
        "fhom-lipschitz",
        {"C": C, "n": n, "K_cap": cap, "num_pairs": len(estimates) * (len(estimates) - 1) // 2},
        worst - cap,
        0.0,
        "lipschitz:effective-bulk-density",
    )


def check_fhom_rank_one_convexity(
    g: Integrand,
    schedule: Schedule,
    opts: SolverOptions | None = None,
    lines: int = 3,
    step: float = 0.75,
    rel_slack: float = 0.02,
    seed: int = 0,
    n: int = 2,
    N: int = 1,
) -> PropertyCheck:
    """Midpoint convexity along sampled rank-one lines xi0 + t a (x) b.

    The testable consequence of quasi-convexity on a grid: for each
    sampled line, est(xi0) <= (est(xi0 - s a@b) + est(xi0 + s a@b)) / 2
    up to relative slack.
    """
    rng = np.random.default_rng(seed)
    opts = opts or SolverOptions()
    margin = -np.inf
    for _ in range(lines):
        xi0 = rng.normal(size=(N, n))
        a = rng.normal(size=N)
        b = rng.normal(size=n)
        rank1 = np.outer(a, b) / max(_norm(np.outer(a, b)), 1e-12)
        mid = estimate_f_hom(g, xi0, schedule, opts).extrapolated
        left = estimate_f_hom(g, xi0 - step * rank1, schedule, opts).extrapolated
        right = estimate_f_hom(g, xi0 + step * rank1, schedule, opts).extrapolated
        chord = 0.5 * (left + right)
        margin = max(margin, (mid - chord) / max(abs(chord), 1e-12))
    return PropertyCheck.of(
        "fhom-rank-one-convexity",
        {"integrand": g.id, "lines": lines, "step": step},
        margin,
        rel_slack,
        "rank-one-convexity:effective-bulk-density",
    )


def check_ghom_bounds(estimates: Sequence[HomEstimate], C: float, rel_slack: float = 0.15) -> PropertyCheck:
    """2|zeta| / (C (|zeta| + 2)) <= estimate <= 2 C |zeta| / (|zeta| + 2)."""
    margin = -np.inf
    for est in estimates:
        zeta = est.argument[0]
        s = _norm(zeta)
        lo = 2.0 * s / (C * (s + 2.0))
        hi = 2.0 * C * s / (s + 2.0)
        val = est.extrapolated
        if s == 0.0:
            margin = max(margin, abs(val))
            continue
        margin = max(margin, (lo - val) / lo, (val - hi) / hi)
    return PropertyCheck.of(
        "ghom-bounds",
        {"C": C, "num_estimates": len(estimates)},
        margin,
        rel_slack,
        "amplitude-bounds:effective-surface-density",
    )


def check_ghom_symmetry_and_lipschitz(
    pairs: Sequence[tuple],
    sweep: Sequence[HomEstimate],
    C: float,
    n: int,
    sym_tol: float = 0.02,
    lip_factor: float = 1.1,
) -> PropertyCheck:
    """Symmetry under joint sign flip plus the amplitude Lipschitz bound.

    ``pairs`` holds (estimate(zeta, nu), estimate(-zeta, -nu)) tuples;
    ``sweep`` holds estimates at different amplitudes and a common
    normal.  The Lipschitz cap is lip_factor * C * 2n.
    """
    margin = -np.inf
    for e1, e2 in pairs:
        scale = max(abs(e1.extrapolated), abs(e2.extrapolated), 1e-12)
        margin = max(margin, abs(e1.extrapolated - e2.extrapolated) / scale - sym_tol)
    cap = lip_factor * C * 2.0 * n
    for i in range(len(sweep)):
        for j in range(i + 1, len(sweep)):
            z1, z2 = sweep[i].argument[0], sweep[j].argument[0]
            d = _norm(np.asarray(z1) - np.asarray(z2))
            if d < 1e-12:
                continue
            quot = abs(sweep[i].extrapolated - sweep[j].extrapolated) / d
            margin = max(margin, quot - cap)
    return PropertyCheck.of(
        "ghom-symmetry-lipschitz",
        {"C": C, "n": n, "pairs": len(pairs), "sweep": len(sweep)},
        margin,
        0.0,
        "symmetry-and-lipschitz:effective-surface-density",
    )


def check_recession_routes(
    g: Integrand,
    xi,
    schedule: Schedule,
    opts: SolverOptions | None = None,
    rel_tol: float = 0.02,
    t_schedule: Sequence[float] = (8.0, 32.0, 128.0),
) -> PropertyCheck:
    """The two recession-route estimates agree within a relative tolerance."""
    opts = opts or SolverOptions()
    e1 = estimate_f_inf_hom(g, xi, "hom_of_recession", schedule, opts, t_schedule)
    e2 = estimate_f_inf_hom(g, xi, "recession_of_hom", schedule, opts, t_schedule)
    scale = max(abs(e1.extrapolated), abs(e2.extrapolated), 1e-12)
    margin = abs(e1.extrapolated - e2.extrapolated) / scale - rel_tol
    return PropertyCheck.of(
        "recession-route-agreement",
        {"integrand": g.id, "xi": np.asarray(xi).tolist(), "routes": (e1.extrapolated, e2.extrapolated)},
        margin,
        0.0,
        "recession-commutes-with-homogenisation",
    )


def check_subadditive_process(
    model: RandomIntegrandModel,
    zeta,
    nu,
    splits: Sequence[tuple],
    opts: SolverOptions | None = None,
    h: float = 0.25,
    slack: float = 0.05,
    shifts: Sequence = (),
) -> PropertyCheck:
    """Subadditivity, boundedness and lattice covariance of the process.

    ``splits`` is a sequence of (whole, parts) interval tuples; for each,
    mu(whole) <= sum mu(part) + slack.  Boundedness compares mu against
    C |zeta| * max-ramp-slope * measure(A').  ``shifts`` holds integer
    (n-1)-vectors z'; covariance compares mu(model, A' + z') with
    mu(shifted model, A') where the model shift is M R (z', 0).
    """
    opts = opts or SolverOptions()
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    nu = np.asarray(nu, dtype=float).reshape(-1)
    n = nu.shape[0]
    C = model.base.C * max(model.a_max, 1.0 / model.a_min)
    margin = -np.inf
    details = {}

    for idx, (whole, parts) in enumerate(splits):
        mu_whole = subadditive_process_eval(model, zeta, nu, whole, opts, h)
        mu_parts = sum(subadditive_process_eval(model, zeta, nu, p, opts, h) for p in parts)
        rel = (mu_whole - mu_parts) / max(mu_parts, 1e-12)
        details[f"split{idx}"] = (mu_whole, mu_parts)
        margin = max(margin, rel - slack)
        measure = float(np.prod([b - a for a, b in whole]))
        bound = C * _norm(zeta) * RAMP_SLOPE_MAX * measure
        margin = max(margin, (mu_whole - bound) / bound - slack)
        details[f"bound{idx}"] = bound

    for z in shifts:
        z = np.asarray(z, dtype=int).reshape(-1)
        if z.shape[0] != n - 1:
            raise InputDomainError("shift must be an (n-1)-dimensional lattice vector")
        M, rot = lattice_period(nu)
        z_nu = np.round(M * rot.matrix @ np.concatenate([z.astype(float), [0.0]])).astype(int)
        base_box = [(0.0, 1.0)] * (n - 1)
        shifted_box = [(a + z[i], b + z[i]) for i, (a, b) in enumerate(base_box)]
        mu_shifted_box = subadditive_process_eval(model, zeta, nu, shifted_box, opts, h)
        mu_shifted_model = subadditive_process_eval(shift(model, z_nu), zeta, nu, base_box, opts, h)
        scale = max(abs(mu_shifted_box), abs(mu_shifted_model), 1e-12)
        rel = abs(mu_shifted_box - mu_shifted_model) / scale
        details[f"shift{tuple(z)}"] = (mu_shifted_box, mu_shifted_model)
        margin = max(margin, rel - slack)

    return PropertyCheck.of(
        "interval-process",
        {"zeta": zeta.tolist(), "nu": nu.tolist(), **details},
        margin,
        0.0,
        "covariant-subadditive-bounded-process",
    )


# ----------------------------------------------------------------------
# default suite
# ----------------------------------------------------------------------


def run_suite(
    tol_scale: float = 1.0,
    opts: SolverOptions | None = None,
    include_routes: bool = False,
    include_process: bool = False,
    seed: int = 1,
) -> list:
    """The default property suite over the bundled integrand catalog.

    Runs growth and Lipschitz checks on effective bulk estimates,
    rank-one midpoint convexity along three sampled lines, amplitude
    bounds, symmetry and amplitude-Lipschitz checks on effective surface
    estimates, and optionally the recession-route and interval-process
    checks.  ``tol_scale`` multiplies every default tolerance.
    """
    from .integrand import area, euclid, laminate, make_checkerboard

    opts = opts or SolverOptions()
    checks = []
    sched = Schedule(r_values=(4.0, 8.0), h=0.25)
    xi_grid = [np.array([[t, 0.0]]) for t in (0.25, 0.5, 1.0, 2.0, 4.0)]
    xi_grid += [np.array([[0.6, 0.8]]), np.array([[-1.0, 0.5]])]

    cb = make_checkerboard(seed, 1.0, 2.0)
    catalog = [euclid(), area(), laminate(1.0, 2.0), cb.realise()]
    for g in catalog:
        ests = [estimate_f_hom(g, xi, sched, opts) for xi in xi_grid]
        checks.append(check_fhom_growth(ests, C=g.C, rel_slack=0.03 * tol_scale))
        checks.append(check_fhom_lipschitz(ests, C=g.C, n=2))
        checks.append(
            check_fhom_rank_one_convexity(
                g, sched, opts, lines=3, rel_slack=0.02 * tol_scale, seed=seed
            )
        )

    e2 = (0.0, 1.0)
    # the euclid bounds are tight (C = 1), so its sweep needs the larger cells;
    # the checkerboard recession has C = 2 and generous margins at small r
    for g, r_pair in ((euclid(), (8.0, 16.0)), (cb.realise().recession_integrand(), (4.0, 8.0))):
        gsched = Schedule(r_values=r_pair, h=0.25, nu=e2)
        sweep = [estimate_g_hom(g, [z], e2, gsched, opts) for z in (0.5, 1.0, 2.0)]
        checks.append(check_ghom_bounds(sweep, C=g.C, rel_slack=0.15 * tol_scale))
        pair_sched = Schedule(r_values=(4.0, 8.0), h=0.25, nu=e2)
        neg_sched = Schedule(r_values=(4.0, 8.0), h=0.25, nu=(0.0, -1.0))
        pairs = [
            (
                estimate_g_hom(g, [1.0], e2, pair_sched, opts),
                estimate_g_hom(g, [-1.0], (0.0, -1.0), neg_sched, opts),
            )
        ]
        checks.append(
            check_ghom_symmetry_and_lipschitz(
                pairs, sweep, C=g.C, n=2, sym_tol=0.02 * tol_scale
            )
        )

    if include_routes:
        for g in (euclid(), area()):
            checks.append(
                check_recession_routes(g, np.array([[1.0, 0.0]]), sched, opts, rel_tol=0.02 * tol_scale)
            )
        lam1d = laminate(1.0, 2.0)
        sched1d = Schedule(r_values=(8.0,), h=0.05)
        checks.append(
            check_recession_routes(
                lam1d, np.array([[1.0]]), sched1d, opts, rel_tol=0.05 * tol_scale
            )
        )

    if include_process:
        splits = [([(0.0, 2.0)], [[(0.0, 1.0)], [(1.0, 2.0)]])]
        checks.append(
            check_subadditive_process(
                cb, [1.0], e2, splits, opts, h=0.25, slack=0.05 * tol_scale, shifts=[(1,)]
            )
        )
    return checks
