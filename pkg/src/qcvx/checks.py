"""Inequality harness: every rearrangement / isoperimetric / Alexandrov
statement becomes a parameterized check returning a CheckReport.

Tolerance policy: 1e-9 relative on exact (stack) paths, 1e-6 on quadrature
paths.  A "violated" verdict carries the serialized inputs as a witness and
is treated as a build failure by the test suite.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma

from .bodies import ConvexBody, UNIT_BALL_VOLUME, minkowski_sum, volume
from .errors import IndexOutOfRange, NotLogConcave
from .generators import (
    random_polytope,
    random_radial,
    random_size_functional,
    random_stack,
    rng_for,
)
from .mixed_volumes import quermassintegral_body
from .profiles import Profile, PowerLawProfile, StretchedExponentialProfile
from .qc import (
    LevelStack,
    QCFunction,
    RadialQC,
    fn_to_json,
    indicator,
    integral,
    merged_heights,
    mixed_integral,
    oplus,
    quermassintegral_fn,
    surface_area_fn,
)
from .rearrange import SizeFunctional, ball_rearrange, phi_rearrange, sdr
from .report import CheckReport

TOL_EXACT = 1e-9
TOL_QUAD = 1e-6


def set_tolerances(tol_exact: float, tol_quad: float) -> None:
    """Override the verdict tolerances (CLI --tol-exact / --tol-quad wiring)."""
    global TOL_EXACT, TOL_QUAD
    if tol_exact <= 0 or tol_quad <= 0:
        raise ValueError("tolerances must be positive")
    TOL_EXACT = float(tol_exact)
    TOL_QUAD = float(tol_quad)


def _tol_for(*fs: QCFunction) -> float:
    return TOL_EXACT if all(isinstance(f, LevelStack) for f in fs) else TOL_QUAD


def _sample_heights(*fs: QCFunction) -> np.ndarray:
    extra = [] if all(isinstance(f, LevelStack) for f in fs) else \
        np.geomspace(1.0, 1e-3, 16).tolist()
    return merged_heights(*fs, extra=extra)


def _radius_report(name: str, statement: str, heights, lhs, rhs, tol: float,
                   witness: Optional[dict], details: Optional[dict] = None) -> CheckReport:
    """Report for per-height radius comparisons lhs(t) >= rhs(t)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scales = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    rel = (lhs - rhs) / scales
    margin = float(np.min(rel))
    if margin < -tol:
        verdict = "violated"
    elif float(np.max(np.abs(rel))) <= tol:
        verdict = "holds-with-equality"
    else:
        verdict = "holds"
    info = {"heights": [float(t) for t in heights],
            "lhs": lhs.tolist(), "rhs": rhs.tolist()}
    info.update(details or {})
    return CheckReport(name=name, statement=statement,
                       left=float(lhs[int(np.argmin(rel))]),
                       right=float(rhs[int(np.argmin(rel))]),
                       margin=margin, verdict=verdict, tol=tol, details=info,
                       witness=witness if verdict == "violated" else None)


def _scalar_report(name: str, statement: str, left: float, right: float,
                   tol: float, witness: Optional[dict],
                   details: Optional[dict] = None) -> CheckReport:
    scale = max(abs(left), abs(right), 1.0)
    rel = (left - right) / scale
    if rel < -tol:
        verdict = "violated"
    elif abs(rel) <= tol:
        verdict = "holds-with-equality"
    else:
        verdict = "holds"
    return CheckReport(name=name, statement=statement, left=left, right=right,
                       margin=rel, verdict=verdict, tol=tol, details=details or {},
                       witness=witness if verdict == "violated" else None)


def _witness(**objs) -> dict:
    out = {}
    for key, val in objs.items():
        try:
            if isinstance(val, QCFunction):
                out[key] = fn_to_json(val)
            elif isinstance(val, ConvexBody):
                from .bodies import body_to_json
                out[key] = body_to_json(val)
            else:
                out[key] = val
        except ValueError:
            out[key] = repr(val)
    return out


def _ball_radius(phi: SizeFunctional, body: ConvexBody) -> float:
    return ball_rearrange(phi, body).radius


# ---------------------------------------------------------------------------
# rearrangement inequalities
# ---------------------------------------------------------------------------

def check_isoperimetric_qc(f: QCFunction) -> CheckReport:
    """Surface area never increases under symmetric decreasing rearrangement."""
    left = surface_area_fn(f)
    right = surface_area_fn(sdr(f))
    rep = _scalar_report(
        "isoperimetric-qc",
        "S(f) >= S(f*) with equality iff f is rotation invariant",
        left, right, _tol_for(f), _witness(f=f),
        details={"rotation_invariant": f.is_rotation_invariant()})
    return rep


def check_bm_rearrangement(f: QCFunction, g: QCFunction) -> CheckReport:
    """(f oplus g)* dominates f* oplus g*, levelwise in the ball radii."""
    n = f.dim
    wn = UNIT_BALL_VOLUME[n]
    s = oplus(f, g)
    heights = _sample_heights(f, g)
    lhs, rhs = [], []
    for t in heights:
        t = float(t)
        lhs.append((volume(s.level_set(t)) / wn) ** (1.0 / n))
        rhs.append((volume(f.level_set(t)) / wn) ** (1.0 / n)
                   + (volume(g.level_set(t)) / wn) ** (1.0 / n))
    details = {
        "rotation_invariant": f.is_rotation_invariant() and g.is_rotation_invariant(),
        "integral_lhs": integral(s),
        "integral_rhs": integral(oplus(sdr(f), sdr(g))),
    }
    return _radius_report(
        "bm-rearrangement",
        "(f oplus g)* >= f* oplus g* (levelwise Brunn-Minkowski)",
        heights, lhs, rhs, _tol_for(f, g), _witness(f=f, g=g), details)


def check_gen_bm(phi: SizeFunctional, f: QCFunction, g: QCFunction) -> CheckReport:
    """(f oplus g)^Phi dominates f^Phi oplus g^Phi for any size functional."""
    heights = _sample_heights(f, g)
    lhs, rhs = [], []
    for t in heights:
        t = float(t)
        kf, kg = f.level_set(t), g.level_set(t)
        lhs.append(_ball_radius(phi, minkowski_sum(kf, kg)))
        rhs.append(_ball_radius(phi, kf) + _ball_radius(phi, kg))
    details = {
        "functional": phi.name or f"degree-{phi.degree}",
        "rotation_invariant": f.is_rotation_invariant() and g.is_rotation_invariant(),
    }
    return _radius_report(
        "gen-bm",
        "(f oplus g)^Phi >= f^Phi oplus g^Phi (generalized Brunn-Minkowski)",
        heights, lhs, rhs, _tol_for(f, g), _witness(f=f, g=g), details)


def check_gen_bm_bodies(phi: SizeFunctional, a: ConvexBody, b: ConvexBody,
                        tol: float | None = None) -> CheckReport:
    """Body form: Phi(A+B)^(1/m) >= Phi(A)^(1/m) + Phi(B)^(1/m)."""
    tol = TOL_EXACT if tol is None else tol
    left = _ball_radius(phi, minkowski_sum(a, b))
    right = _ball_radius(phi, a) + _ball_radius(phi, b)
    return _scalar_report(
        "gen-bm-bodies",
        "(A + B)^Phi contains A^Phi + B^Phi (generalized Brunn-Minkowski)",
        left, right, tol, _witness(a=a, b=b),
        details={"functional": phi.name or f"degree-{phi.degree}"})


def check_alexandrov_rearrangement(f: QCFunction, i: int, j: int) -> CheckReport:
    """f^{W_j} dominates f^{W_i} for i < j (levelwise radii)."""
    n = f.dim
    if not 0 <= i < j < n:
        raise IndexOutOfRange(f"need 0 <= i < j < {n}, got ({i}, {j})")
    wn = UNIT_BALL_VOLUME[n]
    heights = _sample_heights(f)
    lhs, rhs = [], []
    for t in heights:
        body = f.level_set(float(t))
        lhs.append((quermassintegral_body(body, j) / wn) ** (1.0 / (n - j)))
        rhs.append((quermassintegral_body(body, i) / wn) ** (1.0 / (n - i)))
    return _radius_report(
        "alexandrov-rearrangement",
        "f^{W_j} >= f^{W_i} for i < j; equality iff f is rotation invariant",
        heights, lhs, rhs, _tol_for(f), _witness(f=f, i=i, j=j),
        details={"i": i, "j": j, "rotation_invariant": f.is_rotation_invariant()})


def check_af(phi: SizeFunctional, fs: Sequence[QCFunction]) -> CheckReport:
    """Mixed integrals dominate those of the Phi-rearranged functions."""
    fs = list(fs)
    if len(fs) != phi.degree:
        raise ValueError(f"need {phi.degree} functions for a degree-{phi.degree} functional")
    refs = [indicator(ref) for ref in phi.references]
    left = mixed_integral(fs + refs)
    right = mixed_integral([phi_rearrange(phi, f) for f in fs] + refs)
    return _scalar_report(
        "af",
        "V(f_1, ..., f_m, refs) >= V(f_1^Phi, ..., f_m^Phi, refs) "
        "(Alexandrov-Fenchel, rearranged form)",
        left, right, _tol_for(*fs), _witness(**{f"f{k}": f for k, f in enumerate(fs)}),
        details={"functional": phi.name or f"degree-{phi.degree}",
                 "rotation_invariant": all(f.is_rotation_invariant() for f in fs)})


def check_af_bodies(phi: SizeFunctional, bodies: Sequence[ConvexBody],
                    tol: float | None = None) -> CheckReport:
    """Body form: V(A_1, ..., A_m, refs) >= prod Phi(A_i)^(1/m)."""
    from .mixed_volumes import mixed_volume

    tol = TOL_EXACT if tol is None else tol
    bodies = list(bodies)
    left = mixed_volume(bodies + list(phi.references))
    right = 1.0
    for b in bodies:
        right *= phi.eval_body(b) ** (1.0 / phi.degree)
    return _scalar_report(
        "af-bodies",
        "V(A_1, ..., A_m, refs)^m >= prod_i Phi(A_i) (Alexandrov-Fenchel)",
        left, right, tol, _witness(**{f"a{k}": b for k, b in enumerate(bodies)}),
        details={"functional": phi.name or f"degree-{phi.degree}"})


# ---------------------------------------------------------------------------
# log-concave inequalities
# ---------------------------------------------------------------------------

def exponential_reference_quermass(n: int, i: int) -> float:
    """W_i of e^{-|x|}: omega_n * Gamma(n - i + 1)."""
    return UNIT_BALL_VOLUME[n] * float(gamma(n - i + 1))


def check_moment_logconcavity(profile: Profile, p_grid: Sequence[float]) -> CheckReport:
    """phi(p) = moment(p) / Gamma(p+1) is log-concave for log-concave profiles;
    also checks the derived moment comparison for (k, m) = (1, 2)."""
    if not profile.is_log_concave():
        raise NotLogConcave("moment log-concavity requires a log-concave profile")
    ps = np.asarray(sorted(p_grid), dtype=float)
    if len(ps) < 3:
        raise ValueError("need at least three grid points")
    vals = np.array([profile.moment(float(p)) / float(gamma(p + 1)) for p in ps])
    logs = np.log(vals)
    margins = []
    for k in range(1, len(ps) - 1):
        theta = (ps[k + 1] - ps[k]) / (ps[k + 1] - ps[k - 1])
        margins.append(logs[k] - (theta * logs[k - 1] + (1 - theta) * logs[k + 1]))
    moment_lhs = (profile.moment(2.0) / float(gamma(3))) ** (1.0 / 3.0)
    moment_rhs = (profile.moment(1.0) / float(gamma(2))) ** (1.0 / 2.0)
    margin = min(min(margins), float(moment_rhs - moment_lhs))
    is_exp = isinstance(profile, StretchedExponentialProfile) and profile.p == 1.0
    tol = TOL_QUAD if not is_exp else TOL_EXACT
    if margin < -tol:
        verdict = "violated"
    elif max(abs(m) for m in margins) <= tol:
        verdict = "holds-with-equality"
    else:
        verdict = "holds"
    return CheckReport(
        name="moment-logconcavity",
        statement="p -> moment(p) / Gamma(p+1) is log-concave; "
                  "normalized moments decrease in the order, equality only "
                  "for exponential profiles",
        left=float(moment_rhs), right=float(moment_lhs), margin=float(margin),
        verdict=verdict, tol=tol,
        details={"p_grid": ps.tolist(), "normalized_moments": vals.tolist(),
                 "exponential": is_exp},
        witness=None)


def check_lc_alexandrov(f: QCFunction, k: int, m: int) -> CheckReport:
    """Normalized quermassintegral chain against the exponential reference."""
    n = f.dim
    if not 0 <= k < m < n:
        raise IndexOutOfRange(f"need 0 <= k < m < {n}, got ({k}, {m})")
    if not f.is_log_concave():
        raise NotLogConcave("the chain requires a geometric log-concave function")
    left = (quermassintegral_fn(f, m) / exponential_reference_quermass(n, m)) \
        ** (1.0 / (n - m))
    right = (quermassintegral_fn(f, k) / exponential_reference_quermass(n, k)) \
        ** (1.0 / (n - k))
    exp_profile = isinstance(f, RadialQC) and f.base.is_ball and \
        isinstance(f.profile, StretchedExponentialProfile) and f.profile.p == 1.0
    return _scalar_report(
        "lc-alexandrov",
        "(W_k(f)/W_k(g))^(1/(n-k)) <= (W_m(f)/W_m(g))^(1/(n-m)) for g = exp(-|x|), "
        "equality iff f = exp(-c|x|)",
        left, right, TOL_QUAD, _witness(f=f, k=k, m=m),
        details={"k": k, "m": m, "exponential_profile": exp_profile})


def check_lc_isoperimetric(f: QCFunction) -> CheckReport:
    """Sharp isoperimetric bound S(f) >= (int f)^((n-1)/n) S(g)/(int g)^((n-1)/n)."""
    n = f.dim
    if not f.is_log_concave():
        raise NotLogConcave("the sharp bound requires a geometric log-concave function")
    s_g = n * exponential_reference_quermass(n, 1)
    int_g = exponential_reference_quermass(n, 0)
    left = surface_area_fn(f)
    right = integral(f) ** ((n - 1) / n) * s_g / int_g ** ((n - 1) / n)
    exp_profile = isinstance(f, RadialQC) and f.base.is_ball and \
        isinstance(f.profile, StretchedExponentialProfile) and f.profile.p == 1.0
    return _scalar_report(
        "lc-isoperimetric",
        "S(f) >= (int f)^((n-1)/n) * S(g) / (int g)^((n-1)/n) for g = exp(-|x|), "
        "equality iff f = exp(-c|x|)",
        left, right, TOL_QUAD, _witness(f=f),
        details={"exponential_profile": exp_profile})


# ---------------------------------------------------------------------------
# counterexample families (hypotheses matter)
# ---------------------------------------------------------------------------

def counterexample_values(family: str, a: float) -> dict:
    """Closed-form (integral, surface area) pairs for the two plane families
    that break any isoperimetric lower bound once a hypothesis is dropped.

    * "exponential": a^2 exp(-a|x|) is log-concave but not geometric (height
      a^2); its values are the height factor times those of exp(-a|x|).
    * "powerlaw": (1 + |x|/sqrt(a^2-3a+2))^(-a) is geometric but not
      log-concave.
    """
    if family == "exponential":
        base = RadialQC(ConvexBody.ball(1.0, 2),
                        StretchedExponentialProfile(a, 1.0))
        height = a * a
        return {
            "integral": height * integral(base),
            "surface_area": height * surface_area_fn(base),
            "geometric": height == 1.0,
            "log_concave": True,
        }
    if family == "powerlaw":
        s = math.sqrt(a * a - 3 * a + 2)
        f = RadialQC(ConvexBody.ball(1.0, 2), PowerLawProfile(a, s))
        return {
            "integral": integral(f),
            "surface_area": surface_area_fn(f),
            "geometric": True,
            "log_concave": f.is_log_concave(),
        }
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# harness
# ---------------------------------------------------------------------------

def _trial_isoperimetric(rng, dim):
    return check_isoperimetric_qc(random_stack(rng, dim))


def _trial_bm(rng, dim):
    return check_bm_rearrangement(random_stack(rng, dim), random_stack(rng, dim))


def _trial_gen_bm(rng, dim):
    phi = random_size_functional(rng, dim)
    return check_gen_bm(phi, random_stack(rng, dim), random_stack(rng, dim))


def _trial_gen_bm_bodies(rng, dim):
    phi = random_size_functional(rng, dim)
    return check_gen_bm_bodies(phi, random_polytope(rng, dim), random_polytope(rng, dim))


def _trial_alexandrov(rng, dim):
    if dim < 2:
        raise ValueError("needs n >= 2")
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    i, j = pairs[int(rng.integers(len(pairs)))]
    return check_alexandrov_rearrangement(random_stack(rng, dim), i, j)


def _trial_af(rng, dim):
    # degree 1 functionals make the inequality an identity; draw m >= 2
    m = int(rng.integers(2, dim + 1)) if dim > 1 else 1
    refs = tuple(random_polytope(rng, dim, origin_interior=True)
                 for _ in range(dim - m))
    phi = SizeFunctional(dim=dim, degree=m, references=refs)
    return check_af(phi, [random_stack(rng, dim) for _ in range(m)])


def _trial_af_bodies(rng, dim):
    m = int(rng.integers(2, dim + 1)) if dim > 1 else 1
    refs = tuple(random_polytope(rng, dim, origin_interior=True)
                 for _ in range(dim - m))
    phi = SizeFunctional(dim=dim, degree=m, references=refs)
    return check_af_bodies(phi, [random_polytope(rng, dim) for _ in range(m)])


def _trial_moments(rng, dim):
    profile = random_radial(rng, dim, log_concave=True).profile
    grid = np.sort(rng.uniform(0.0, 5.0, 7))
    grid = np.unique(np.round(grid, 6))
    while len(grid) < 3:
        grid = np.append(grid, grid[-1] + 1.0)
    return check_moment_logconcavity(profile, grid.tolist())


def _trial_lc_alexandrov(rng, dim):
    if dim < 2:
        raise ValueError("needs n >= 2")
    pairs = [(k, m) for k in range(dim) for m in range(k + 1, dim)]
    k, m = pairs[int(rng.integers(len(pairs)))]
    return check_lc_alexandrov(random_radial(rng, dim, log_concave=True), k, m)


def _trial_lc_isoperimetric(rng, dim):
    return check_lc_isoperimetric(random_radial(rng, dim, log_concave=True))


def _trial_sandwich(rng, dim):
    from .duality import sandwich_check
    from .generators import random_geom_convex_fn
    from .grids import GridSpec

    dim = min(dim, 2)
    k = 2 if dim == 2 else int(rng.integers(2, 4))
    fns = [random_geom_convex_fn(rng, dim) for _ in range(k)]
    lams = rng.uniform(0.5, 2.0, k).tolist()
    npts = 81 if dim == 1 else 41
    return sandwich_check(fns, lams, GridSpec.cube(4.0, dim, npts))


def _trial_polarity(rng, dim):
    from .duality import polarity_sandwich_check
    from .generators import conditioned_geom_convex_fn

    dim = min(dim, 2)
    t = float(rng.choice([0.5, 1.0, 2.0]))
    return polarity_sandwich_check(conditioned_geom_convex_fn(rng, dim), t)


CHECKS = {
    "isoperimetric-qc": _trial_isoperimetric,
    "bm-rearrangement": _trial_bm,
    "gen-bm": _trial_gen_bm,
    "gen-bm-bodies": _trial_gen_bm_bodies,
    "alexandrov-rearrangement": _trial_alexandrov,
    "af": _trial_af,
    "af-bodies": _trial_af_bodies,
    "moment-logconcavity": _trial_moments,
    "lc-alexandrov": _trial_lc_alexandrov,
    "lc-isoperimetric": _trial_lc_isoperimetric,
    "sandwich": _trial_sandwich,
    "polarity-sandwich": _trial_polarity,
}

# quermassintegral chains need at least two indices below the dimension
MIN_DIM = {"alexandrov-rearrangement": 2, "lc-alexandrov": 2}


def run_check(name: str, seed: int = 0, trials: int = 100, dim: int = 2) -> list[CheckReport]:
    """Run seeded trials of one named check; deterministic in (seed, trials, dim)."""
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {sorted(CHECKS)}")
    if dim < MIN_DIM.get(name, 1):
        raise ValueError(f"check {name!r} needs dimension >= {MIN_DIM[name]}")
    fn = CHECKS[name]
    out = []
    for trial in range(trials):
        rng = rng_for(seed, trial)
        out.append(fn(rng, dim))
    return out


def run_all(seed: int = 0, trials: int = 100, dim: int = 2,
            names: Optional[Sequence[str]] = None,
            max_workers: Optional[int] = None) -> dict[str, list[CheckReport]]:
    """Run every check concurrently over a work queue; results merged by name.

    Checks whose minimum dimension exceeds ``dim`` are skipped.
    """
    names = sorted(names or CHECKS)
    names = [n for n in names if dim >= MIN_DIM.get(n, 1)]
    if max_workers is None:
        max_workers = int(os.environ.get("QCVX_THREADS", "1"))
    if max_workers <= 1:
        return {name: run_check(name, seed, trials, dim) for name in names}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {name: pool.submit(run_check, name, seed, trials, dim)
                   for name in names}
        return {name: futures[name].result() for name in names}


def summarize(results: dict[str, list[CheckReport]]) -> list[dict]:
    rows = []
    for name in sorted(results):
        reports = results[name]
        margins = [r.margin for r in reports]
        rows.append({
            "name": name,
            "trials": len(reports),
            "min_margin": min(margins) if margins else float("nan"),
            "equality_hits": sum(r.verdict == "holds-with-equality" for r in reports),
            "violations": sum(r.verdict == "violated" for r in reports),
        })
    return rows
