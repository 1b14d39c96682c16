"""End-to-end metric constructions.

Three pipelines are assembled from the profile constructors:

  * build_bubble: the positive-Ricci bubble on the line-bundle total space,
    Berger form near the core, cone form after the flattening region, with
    an exactly warped-cone exterior;
  * build_surgery: the conical-surgery metric on a model-base ball, exact
    ambient form on [1, 2] and exact warped cone below r_hat;
  * glue_bubble: rescales a bubble so its exterior collar matches the
    surgery's interior cone and splices the two, equalizing the warp
    coefficients by the min-rule.

Every structural claim a builder makes (C1 joints, exactness of the outer
and inner pieces, bi-Lipschitz distortion, blow-down factors) is
re-measured on grids; Ricci lower bounds are the verify module's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curvature import WarpedMetric
from .jets import Jet2, jet_sqrt, jet_var
from .profiles import (
    BubbleParams,
    ConstructionError,
    ParameterError,
    Piece,
    Profile,
    SurgeryParams,
    make_A,
    make_B,
    make_cubic_logwarp,
    make_f2,
    make_f4,
    make_h3,
    make_lambda,
    make_model_mu,
    make_step2_h,
    make_xi,
    quintic_hermite_coeffs,
    rule_const,
    rule_poly_in_t,
    sn_jet,
    solve_cone_slope,
)


class SmoothingError(ConstructionError):
    """c1_smooth left a larger footprint than its declared degradation."""


# ---------------------------------------------------------------------------
# C1 -> smooth joints
# ---------------------------------------------------------------------------

def c1_smooth(
    profile: Profile,
    at: float,
    window: Optional[float] = None,
    eps_smooth: Optional[float] = None,
) -> Profile:
    """Replace profile on [at - w, at + w] by the quintic Hermite matching
    value/d1/d2 at the window ends.

    The C1 deviation over the window scales like window * |d2 jump| at the
    joint; eps_smooth defaults to window * (|d2 jump| + 1e-3) and the
    measured deviation is stored in params['smooth_dev'].
    """
    idx = profile.piece_index(at)
    if window is None:
        left_len = at - profile.pieces[max(idx - 1, 0)].lo
        right_len = profile.pieces[idx].hi - at
        window = 1e-3 * min(left_len, right_len)
    x0, x1 = at - window, at + window
    if not profile.r_min < x0 < x1 < profile.r_max:
        raise ParameterError(f"smoothing window [{x0}, {x1}] leaves the profile")
    crossed = [bp for bp in profile.breakpoints if x0 < bp < x1]
    if not set(crossed) <= {at}:
        raise ParameterError(
            f"smoothing window [{x0}, {x1}] crosses other breakpoints {crossed}"
        )
    i0, i1 = profile.piece_index(x0), profile.piece_index(x1)
    j0, j1 = profile.pieces[i0](x0), profile.pieces[i1](x1)
    d2_jump = abs(
        float(profile.pieces[i1](at).d2) - float(profile.pieces[i0](at).d2)
    )
    if eps_smooth is None:
        eps_smooth = window * (d2_jump + 1e-3)

    coeffs = quintic_hermite_coeffs(
        x0, float(j0.v), float(j0.d1), float(j0.d2),
        x1, float(j1.v), float(j1.d1), float(j1.d2),
    )
    hermite = Piece(x0, x1, rule_poly_in_t(coeffs, x0, x1 - x0), "smoothing_window",
                    {"at": at, "window": window})

    pieces = profile.trimmed(profile.r_min, x0) + [hermite] + profile.trimmed(
        x1, profile.r_max
    )
    out = Profile(pieces, profile.smoothness, profile.label, dict(profile.params))

    rs = np.linspace(x0, x1, 257)[1:-1]
    new = out(rs)
    old = profile(rs)
    dev = float(np.max(np.abs(new.v - old.v) + np.abs(new.d1 - old.d1)))
    if dev > eps_smooth:
        raise SmoothingError(
            f"C1 deviation {dev:.3e} exceeds declared degradation {eps_smooth:.3e} "
            f"at r={at}; use a smaller window"
        )
    out.params[f"smooth_dev@{at:g}"] = dev
    out.validate_c1()
    return out


# ---------------------------------------------------------------------------
# the bubble
# ---------------------------------------------------------------------------

@dataclass
class Bubble:
    metric: WarpedMetric
    params: BubbleParams
    exterior_start: float
    h3: Profile
    base_A: Profile
    base_B: Profile
    warp: Profile
    smoothed: bool
    lam: Profile = field(default=None)

    def blowdown(self) -> Profile:
        if self.lam is None:
            self.lam = make_lambda(self.params.r3, self.params.R3,
                                   r_max=self.metric.r_range[1] * 1.5)
        return self.lam


def build_berger_core(m: float = 1e-3, r1: float = 2.0, r_max: float = 1e3,
                      fiber_radius: float = 1.0) -> WarpedMetric:
    """The unwarped core metric: Berger pair (A, B) continued affinely, with
    a constant-radius sphere factor.  On (0, r1/2) the radial block equals
    k^2 exactly; beyond r1 it vanishes and the Hopf block is 2(1-m^2)/A^2."""
    A = make_A(m, r1, r_max=r_max)
    B = make_B(m, r1, A, r_max=r_max)
    f = Profile([Piece(0.0, r_max, rule_const(fiber_radius), "const", {})],
                "smooth", "f_const")
    return WarpedMetric("berger", A, B, f, (0.0, r_max), "berger_core",
                        {"k": A.params["k"], "m": m, "r1": r1})


def build_bubble(
    epsilon: float,
    alpha2: float,
    delta2: float,
    m: float = 1e-3,
    r1: float = 2.0,
    r3: float = 1e3,
    smooth: bool = True,
    window_frac: float = 1e-2,
    r_max: Optional[float] = None,
) -> Bubble:
    """Assemble the full bubble: Berger core, cone flattening, warped-cone
    exterior; optionally smooth the r1 and r3 joints.

    Structural parameter-domain violations raise; qualitative curvature
    budgets (which the source constructions leave as 'small enough'
    thresholds) are left to grid verification, so a bubble that builds can
    still fail verify_ric_lower.

    window_frac sizes smoothing windows relative to the adjacent pieces.
    Below ~5e-3 the curvature signal inside a window sinks under the
    finite-difference oracle's noise floor (the window's metric variation
    is Ric * width^2), so the default keeps windows independently
    checkable.
    """
    if not 0.0 < epsilon < 0.1:
        raise ParameterError(f"epsilon = {epsilon} outside (0, 1/10)")
    if r_max is None:
        r_max = 16.0 * r3
    A = make_A(m, r1, r_max=r_max)
    B = make_B(m, r1, A, r_max=r_max)
    h3 = make_h3(m, epsilon, r1, r3, A.params["A_r1"], r_max=r_max)
    f2 = make_f2(delta2, alpha2, r_max=r_max)
    f4 = make_f4(alpha2, delta2, epsilon, r3, h3, f2, r_max=r_max)

    base_A = Profile(A.trimmed(0.0, r1) + h3.pieces, "C1", "bubble_base_A",
                     {**A.params, **h3.params})
    base_B = Profile(B.trimmed(0.0, r1) + h3.pieces, "C1", "bubble_base_B",
                     {**B.params, **h3.params})
    base_A.validate_c1()
    base_B.validate_c1()

    if smooth:
        w1 = window_frac * min(r1 / 2.0, r3 - r1)
        w3 = window_frac * min(r3 - r1, r_max - r3)
        base_A = c1_smooth(c1_smooth(base_A, r1, w1), r3, w3)
        base_B = c1_smooth(c1_smooth(base_B, r1, w1), r3, w3)
        f4 = c1_smooth(f4, r3, w3)

    params = BubbleParams(
        m=m, r1=r1, k=A.params["k"], b=B.params["b"], epsilon=epsilon,
        alpha2=alpha2, delta2=delta2, r3=r3, R3=h3.params["R3"],
        alpha=f4.params["alpha"], delta=f4.params["delta"],
    )
    params.validate()
    metric = WarpedMetric(
        "berger", base_A, base_B, f4, (0.0, 3.0 * r3),
        "bubble", {"epsilon": epsilon, "alpha": params.alpha, "delta": params.delta,
                   "R3": params.R3, "smoothed": smooth},
    )
    return Bubble(metric, params, 2.0 * r3, h3, base_A, base_B, f4, smooth)


def bubble_alpha2_for_alpha(alpha: float, epsilon: float, m: float, r1: float,
                            r3: float) -> float:
    """Invert the exterior-exponent matching formula: the alpha2 that makes
    the bubble's exterior warp exponent equal alpha."""
    A = make_A(m, r1, r_max=4 * r1)
    h3 = make_h3(m, epsilon, r1, r3, A.params["A_r1"])
    t3 = h3.params["h3_r3"] / (1.0 - epsilon)
    alpha2 = alpha * (1.0 + r3 * r3) / (r3 * t3)
    if not 0.0 < alpha2 <= 0.5:
        raise ParameterError(
            f"target alpha = {alpha} needs alpha2 = {alpha2}, outside (0, 1/2]"
        )
    return alpha2


# ---------------------------------------------------------------------------
# the surgery
# ---------------------------------------------------------------------------

@dataclass
class SurgeryMetric:
    metric: WarpedMetric
    params: SurgeryParams
    mu: Profile
    h: Profile
    xi: Profile
    warp: Profile

    def base_sphere_warp(self, rj: Jet2) -> Jet2:
        """The unmodified ambient base warp sn_kappa(r)."""
        return sn_jet(self.params.kappa, rj)


def build_surgery(
    kappa: float,
    f0: float,
    lambda_bound: float,
    epsilon: float,
    alpha: float,
    r_hat: float,
    delta_hat: float,
    eta: float = 0.0,
    rho: float = 1.0 / 32.0,
    r_m: float = 0.125,
    r3: Optional[float] = None,
    r_max: float = 2.0,
) -> SurgeryMetric:
    """Conical surgery on the curvature-kappa model base ball of radius 2
    with constant ambient warp f0.

    The output metric is exactly ambient (up to the delta_hat warp scaling)
    on [1, 2] and exactly the warped cone (1-eps, delta r^alpha) on
    (0, r_hat]; in between it composes the cone-angle bridge, the log-cubic
    warp interpolation, and the cutoff between the model sphere family and
    the round sphere.
    """
    if not 0.0 < epsilon < 0.1:
        raise ParameterError(f"epsilon = {epsilon} outside (0, 1/10)")
    if not 0.0 < delta_hat <= 1.0:
        raise ParameterError(f"delta_hat = {delta_hat} outside (0, 1]")
    if f0 <= 0:
        raise ParameterError(f"f0 = {f0} must be positive")

    mu = make_model_mu(kappa, r_max=r_max)
    h = make_step2_h(epsilon, r_max=r_max)
    f_plus = Profile(
        [Piece(0.0, r_max, rule_const(delta_hat * f0), "const", {})],
        "smooth", "f_plus", {"delta_hat": delta_hat, "f0": f0},
    )
    warp, delta = make_cubic_logwarp(f_plus, alpha, r_m, rho=rho, eta=eta)
    r2, r2p = (1 - rho) * r_m, (1 + rho) * r_m
    if r3 is None:
        r3 = r2 / 5.0
    if not r_hat < r3:
        raise ParameterError(f"need r_hat < r3, got {r_hat} >= {r3}")
    if not 2.0 * r3 < r2:
        raise ParameterError(f"cutoff interval [r3, 2 r3] must end below r2 = {r2}")

    one_m_eps = 1.0 - epsilon
    xi_profile = make_xi(r3, r_max=r_max)

    def rule_cone(rj: Jet2) -> Jet2:
        return rj * one_m_eps

    def rule_blend(rj: Jet2) -> Jet2:
        xij = xi_profile.pieces[1].rule(rj)
        muj = mu.pieces[0].rule(rj)
        return rj * one_m_eps * jet_sqrt(xij * muj * muj + (1.0 - xij))

    def rule_model_cone(rj: Jet2) -> Jet2:
        return sn_jet(kappa, rj) * one_m_eps

    def rule_bridge(rj: Jet2) -> Jet2:
        return h.pieces[1].rule(rj) * mu.pieces[0].rule(rj)

    def rule_ambient(rj: Jet2) -> Jet2:
        return sn_jet(kappa, rj)
    phi = Profile(
        [
            Piece(0.0, r3, rule_cone, "cone", {"angle": one_m_eps}),
            Piece(r3, 2 * r3, rule_blend, "cutoff_blend", {"r3": r3}),
            Piece(2 * r3, 0.5, rule_model_cone, "model_cone", {"kappa": kappa}),
            Piece(0.5, 1.0, rule_bridge, "angle_bridge", {"epsilon": epsilon}),
            Piece(1.0, r_max, rule_ambient, "ambient", {"kappa": kappa}),
        ],
        "C1",
        "surgery_phi",
        {"epsilon": epsilon, "kappa": kappa},
    )
    phi.validate_c1()

    params = SurgeryParams(
        lambda_bound=lambda_bound, epsilon=epsilon, alpha=alpha, r_hat=r_hat,
        delta_hat=delta_hat, rho=rho, r_m=r_m, r2=r2, r2plus=r2p, r3=r3,
        delta=delta, eta=eta, kappa=kappa, f0=f0,
    )
    params.validate()
    metric = WarpedMetric(
        "cone", phi, None, warp, (0.0, r_max), "surgery",
        {"epsilon": epsilon, "alpha": alpha, "delta": delta, "kappa": kappa},
    )
    return SurgeryMetric(metric, params, mu, h, xi_profile, warp)


def bilipschitz_check(s: SurgeryMetric, points: int = 4096) -> float:
    """sup over (0, 2] of the spherical stretch max(phi_hat/phi, phi/phi_hat)
    between the surgery base and the ambient model base; must be <= 1+2 eps."""
    lo, hi = 1e-8 * s.metric.r_range[1], s.metric.r_range[1]
    rs = np.geomspace(lo, hi * (1 - 1e-12), points)
    phi_hat = s.metric.A(rs).v
    phi_base = sn_jet(s.params.kappa, jet_var(rs)).v
    ratio = np.maximum(phi_hat / phi_base, phi_base / phi_hat)
    j = int(np.argmax(ratio))
    sup = float(ratio[j])
    limit = 1.0 + 2.0 * s.params.epsilon
    if sup > limit:
        raise ConstructionError(
            f"bi-Lipschitz bound violated: sup ratio {sup:.6g} > 1+2eps = {limit:.6g} "
            f"at r = {rs[j]:.6g}"
        )
    return sup


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

def _scaled_pieces(profile: Profile, s: float, lo: float, hi: float,
                   warp_factor: float = 1.0) -> list[Piece]:
    """Pieces of x -> warp_factor * s * profile(x / s) on [lo, hi]."""
    out = []
    inv = 1.0 / s
    c = warp_factor * s
    for p in profile.trimmed(lo * inv, hi * inv):
        def rule(rj: Jet2, _inner=p.rule) -> Jet2:
            # feeding the rescaled jet makes _inner carry the chain rule, so
            # the output is the inner jet times the overall factor
            j = _inner(Jet2(rj.v * inv, rj.d1 * inv, rj.d2 * inv))
            return Jet2(c * j.v, c * j.d1, c * j.d2)
        out.append(Piece(p.lo * s, p.hi * s, rule, f"scaled({p.name})",
                         {**p.params, "scale": s}))
    return out


def _shifted_pieces(profile: Profile, shift: float, lo: float, hi: float,
                    warp_factor: float = 1.0) -> list[Piece]:
    """Pieces of x -> warp_factor * profile(x - shift) on [lo, hi]."""
    out = []
    for p in profile.trimmed(lo - shift, hi - shift):
        def rule(rj: Jet2, _inner=p.rule) -> Jet2:
            j = _inner(rj - shift)
            return Jet2(warp_factor * j.v, warp_factor * j.d1, warp_factor * j.d2)
        out.append(Piece(p.lo + shift, p.hi + shift, rule, f"shifted({p.name})",
                         {**p.params, "shift": shift}))
    return out


def glue_bubble(s: SurgeryMetric, b: Bubble) -> WarpedMetric:
    """Replace the surgery's inner cone ball by the rescaled bubble, gluing
    isometrically along the collar [r_hat/2, r_hat] and multiplying each
    side's warp by min(delta_I, delta_II)/delta_side."""
    eps_s, eps_b = s.params.epsilon, b.params.epsilon
    if abs(eps_s - eps_b) > 1e-12:
        raise ParameterError(f"cone angles differ: surgery {eps_s}, bubble {eps_b}")
    if abs(s.params.alpha - b.params.alpha) > 1e-9 * s.params.alpha:
        raise ParameterError(
            f"warp exponents differ: surgery {s.params.alpha}, bubble {b.params.alpha}"
        )
    alpha = s.params.alpha
    r_hat = s.params.r_hat
    t_ext = b.exterior_start - b.params.R3  # exterior-exact in t = r - R3
    s_B = (r_hat / 2.0) / t_ext
    shift = s_B * b.params.R3

    delta_I = s.params.delta
    delta_II = b.params.delta * s_B ** (1.0 - alpha)
    common = min(delta_I, delta_II)

    x_switch = shift + 0.75 * r_hat
    x_max = s.metric.r_range[1] + shift

    bub_A = _scaled_pieces(b.base_A, s_B, 0.0, x_switch)
    bub_B = _scaled_pieces(b.base_B, s_B, 0.0, x_switch)
    bub_f = _scaled_pieces(b.warp, s_B, 0.0, x_switch, warp_factor=common / delta_II)
    sur_phi = _shifted_pieces(s.metric.A, shift, x_switch, x_max)
    sur_f = _shifted_pieces(s.metric.f, shift, x_switch, x_max,
                            warp_factor=common / delta_I)

    A = Profile(bub_A + sur_phi, "C1", "glued_A", {"s_B": s_B, "shift": shift})
    B = Profile(bub_B + sur_phi, "C1", "glued_B", {"s_B": s_B, "shift": shift})
    f = Profile(bub_f + sur_f, "C1", "glued_f",
                {"delta_I": delta_I, "delta_II": delta_II, "common": common})
    for prof in (A, B, f):
        prof.validate_c1()

    # collar isometry: both descriptions must agree on [r_hat/2, r_hat]
    collar = np.linspace(shift + 0.55 * r_hat, shift + 0.95 * r_hat, 100)
    for xs in collar:
        t = xs - shift
        phi_expected = (1.0 - eps_s) * t
        f_expected = common * t**alpha
        got_phi = float(A(xs).v)
        got_f = float(f(xs).v)
        if abs(got_phi - phi_expected) > 1e-10 * phi_expected:
            raise ConstructionError(
                f"collar base mismatch at x={xs}: {got_phi} vs {phi_expected}"
            )
        if abs(got_f - f_expected) > 1e-10 * f_expected:
            raise ConstructionError(
                f"collar warp mismatch at x={xs}: {got_f} vs {f_expected}"
            )

    return WarpedMetric(
        "berger", A, B, f, (0.0, x_max), "glued",
        {"s_B": s_B, "shift": shift, "delta_I": delta_I, "delta_II": delta_II,
         "common_delta": common, "epsilon": eps_s, "alpha": alpha},
    )


# ---------------------------------------------------------------------------
# blow-down map distortion
# ---------------------------------------------------------------------------

def blowdown_lipschitz(b: Bubble, lam: Optional[Profile] = None,
                       points: int = 4096) -> float:
    """sup of the blow-down differential norms over the bubble, asserting
    the regional bounds: pi/2 (1-eps) for the Hopf direction and pi (1-eps)
    for the orthogonal sphere directions on [0, r1], (1-eps)/m on [r1, r3],
    exactly 1 beyond r3."""
    lam = lam or b.blowdown()
    eps, m, r1, r3 = b.params.epsilon, b.params.m, b.params.r1, b.params.r3
    one_m_eps = 1.0 - eps

    sup = 0.0
    # core region [0, r1]
    rs = np.geomspace(1e-8 * r1, r1, points)
    lj, aj, bj = lam(rs), b.base_A(rs), b.base_B(rs)
    fac_r = np.abs(lj.d1)
    fac_x = one_m_eps * lj.v / aj.v
    fac_yz = one_m_eps * lj.v / bj.v
    if fac_r.max() > 1.0 + 1e-9:
        raise ConstructionError(f"lambda' exceeds 1 on the core: {fac_r.max()}")
    if fac_x.max() > (math.pi / 2) * one_m_eps * (1 + 1e-9):
        raise ConstructionError(f"Hopf stretch {fac_x.max():.6g} > pi/2 (1-eps)")
    if fac_yz.max() > math.pi * one_m_eps * (1 + 1e-9):
        raise ConstructionError(f"YZ stretch {fac_yz.max():.6g} > pi (1-eps)")
    sup = max(sup, float(fac_r.max()), float(fac_x.max()), float(fac_yz.max()))

    # flattening region [r1, r3]
    rs = np.geomspace(r1, r3, points)
    lj, hj = lam(rs), b.base_A(rs)
    fac = one_m_eps * lj.v / hj.v
    if fac.max() > one_m_eps / m * (1 + 1e-9):
        raise ConstructionError(f"stretch {fac.max():.6g} > (1-eps)/m on [r1, r3]")
    sup = max(sup, float(fac.max()), float(np.abs(lj.d1).max()))

    # exterior: isometry, starting past any smoothing window around r3
    start = max([r3] + [bp for bp in b.base_A.breakpoints if bp > r3 * 0.9])
    rs = np.geomspace(start * (1 + 1e-9), b.metric.r_range[1], 256)
    lj, hj = lam(rs), b.base_A(rs)
    fac = one_m_eps * lj.v / hj.v
    if np.max(np.abs(fac - 1.0)) > 1e-9 or np.max(np.abs(lj.d1 - 1.0)) > 1e-12:
        raise ConstructionError("blow-down is not an isometry beyond r3")
    sup = max(sup, float(fac.max()))
    return sup
