"""Piecewise radial profiles.

Every metric coefficient in this package is a Profile: an ordered list of
closed-form pieces on [0, r_max], each evaluable to a 2-jet.  Constructors
below build the specific profiles the metric constructions need (Berger
warp pair A/B, polynomial warp factors, cone-flattening slopes, cutoffs,
space-form factors, blow-down reparameterizations) and re-verify every
inequality they are supposed to satisfy instead of trusting the algebra.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .jets import (
    Jet2,
    JetDomainError,
    jet_const,
    jet_exp,
    jet_ln,
    jet_poly,
    jet_pow,
    jet_sin,
    jet_sinh,
    jet_sqrt,
    jet_var,
)

TAU_C1 = 1e-9  # relative C^1 matching tolerance at breakpoints


class ParameterError(ValueError):
    """A constructor was handed parameters outside its stated domain."""


class ConstructionError(RuntimeError):
    """A built object violates one of its own postconditions."""


# ---------------------------------------------------------------------------
# pieces and profiles
# ---------------------------------------------------------------------------

@dataclass
class Piece:
    lo: float
    hi: float
    rule: Callable[[Jet2], Jet2]
    name: str
    params: dict = field(default_factory=dict)

    def __call__(self, r) -> Jet2:
        try:
            return self.rule(jet_var(r))
        except JetDomainError as exc:
            raise JetDomainError(f"piece '{self.name}' at r={r!r}: {exc}") from exc


@dataclass
class Profile:
    pieces: list[Piece]
    smoothness: Literal["C1", "smooth"]
    label: str
    params: dict = field(default_factory=dict)

    @property
    def breakpoints(self) -> list[float]:
        """Interior breakpoints (piece boundaries, endpoints excluded)."""
        return [p.hi for p in self.pieces[:-1]]

    @property
    def r_min(self) -> float:
        return self.pieces[0].lo

    @property
    def r_max(self) -> float:
        return self.pieces[-1].hi

    def piece_index(self, r: float) -> int:
        # breakpoint radii belong to the right-hand piece
        return min(bisect.bisect_right(self.breakpoints, r), len(self.pieces) - 1)

    def __call__(self, r) -> Jet2:
        if isinstance(r, np.ndarray):
            return self._eval_array(r)
        return self.pieces[self.piece_index(float(r))](float(r))

    def _eval_array(self, rs: np.ndarray) -> Jet2:
        idx = np.searchsorted(np.asarray(self.breakpoints), rs, side="right")
        v = np.empty_like(rs)
        d1 = np.empty_like(rs)
        d2 = np.empty_like(rs)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if not mask.any():
                continue
            out = piece(rs[mask])
            v[mask], d1[mask], d2[mask] = out.v, out.d1, out.d2
        return Jet2(v, d1, d2)

    def validate_c1(self, tol: float = TAU_C1) -> None:
        """Check value/slope agreement of adjacent pieces at breakpoints."""
        for i, r in enumerate(self.breakpoints):
            left = self.pieces[i](r)
            right = self.pieces[i + 1](r)
            dv = abs(left.v - right.v) / max(1.0, abs(left.v))
            dd = abs(left.d1 - right.d1) / max(1.0, abs(left.d1))
            if dv > tol or dd > tol:
                raise ConstructionError(
                    f"profile '{self.label}' is not C1 at r={r}: "
                    f"|dv|={dv:.3e}, |dd1|={dd:.3e} (tol {tol:.1e})"
                )

    def trimmed(self, lo: float, hi: float) -> list[Piece]:
        """Pieces covering [lo, hi], clipped to that window."""
        out = []
        for p in self.pieces:
            a, b = max(p.lo, lo), min(p.hi, hi)
            if a < b:
                out.append(Piece(a, b, p.rule, p.name, dict(p.params)))
        if not out:
            raise ParameterError(f"[{lo}, {hi}] is outside profile '{self.label}'")
        return out

    def descriptor(self) -> dict:
        return {
            "label": self.label,
            "smoothness": self.smoothness,
            "pieces": [
                {"interval": [p.lo, p.hi], "rule": p.name, "params": _jsonable(p.params)}
                for p in self.pieces
            ],
        }

    def export_csv(self, rs: np.ndarray, path) -> None:
        """Write r,v,d1,d2 rows at the given radii (round-trip exact floats)."""
        out = self(np.asarray(rs, dtype=float))
        with open(path, "w") as fh:
            fh.write("r,v,d1,d2\n")
            for r, v, d1, d2 in zip(rs, out.v, out.d1, out.d2):
                fh.write(f"{float(r)!r},{float(v)!r},{float(d1)!r},{float(d2)!r}\n")


def _jsonable(d: dict) -> dict:
    return {k: (float(v) if isinstance(v, (int, float, np.floating)) else str(v))
            for k, v in d.items()}


# ---------------------------------------------------------------------------
# shared closed forms
# ---------------------------------------------------------------------------

def quintic_hermite_coeffs(x0, v0, d10, d20, x1, v1, d11, d21):
    """Coefficients (in t = (x-x0)/(x1-x0)) of the quintic matching value,
    first and second derivative at both ends."""
    L = x1 - x0
    c0, c1, c2 = v0, d10 * L, 0.5 * d20 * L * L
    D1, A1 = d11 * L, d21 * L * L
    r0 = v1 - c0 - c1 - c2
    r1 = D1 - c1 - 2.0 * c2
    r2 = A1 - 2.0 * c2
    c3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2
    c4 = -15.0 * r0 + 7.0 * r1 - r2
    c5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2
    return [c0, c1, c2, c3, c4, c5]


def rule_poly_in_t(coeffs, x0: float, L: float):
    def rule(rj: Jet2) -> Jet2:
        return jet_poly(coeffs, (rj - x0) * (1.0 / L))
    return rule


def rule_affine(value_at: float, slope: float, anchor: float):
    def rule(rj: Jet2) -> Jet2:
        return (rj - anchor) * slope + value_at
    return rule


def rule_const(c: float):
    def rule(rj: Jet2) -> Jet2:
        return jet_const(c) + rj * 0.0
    return rule


def smoothstep_jet(t: Jet2) -> Jet2:
    """Quintic smoothstep 6t^5 - 15t^4 + 10t^3 on [0, 1]."""
    return jet_poly([0.0, 0.0, 0.0, 10.0, -15.0, 6.0], t)


def _flat_step(t):
    """C-infinity step 1/(1 + exp(1/t - 1/(1-t))): 0 at t<=0, 1 at t>=1,
    all derivatives vanishing at both ends."""
    t = np.asarray(t, dtype=float)
    inner = np.clip(t, 1e-12, 1.0 - 1e-12)
    g = np.clip(1.0 / inner - 1.0 / (1.0 - inner), -700.0, 700.0)
    s = 1.0 / (1.0 + np.exp(g))
    return np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, s))


def _flat_step_d(t):
    """Derivative of _flat_step (peaks at exactly 2 at t = 1/2)."""
    t = np.asarray(t, dtype=float)
    inner = np.clip(t, 1e-12, 1.0 - 1e-12)
    s = _flat_step(inner)
    d = (1.0 / inner**2 + 1.0 / (1.0 - inner) ** 2) * s * (1.0 - s)
    return np.where((t <= 0.0) | (t >= 1.0), 0.0, d)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)


def _flat_step_integral(t):
    """Integral of _flat_step from 0 to t by 80-point Gauss-Legendre."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    half = 0.5 * t
    nodes = half[:, None] * (_GL_NODES[None, :] + 1.0)  # map [-1,1] -> [0,t]
    vals = _flat_step(nodes)
    out = half * (vals @ _GL_WEIGHTS)
    return out if out.size > 1 else float(out[0])


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass
class BubbleParams:
    m: float
    r1: float
    k: float
    b: float
    epsilon: float
    alpha2: float
    delta2: float
    r3: float
    R3: float
    alpha: float
    delta: float

    def validate(self) -> None:
        if not (math.pi / 3 <= self.k * self.r1 < math.pi / 2):
            raise ParameterError(f"k*r1 = {self.k * self.r1} outside [pi/3, pi/2)")
        if not (1.0 / (2.0 * self.k) < self.b < math.sqrt(1 - self.m**2) / self.k):
            raise ParameterError(f"b = {self.b} outside (1/2k, sqrt(1-m^2)/k)")
        if not self.alpha < self.alpha2:
            raise ParameterError(f"alpha = {self.alpha} >= alpha2 = {self.alpha2}")
        if not (0 < self.delta2 < 1 and 0 < self.delta < 1):
            raise ParameterError("delta, delta2 must lie in (0, 1)")
        if not 0 < self.epsilon < 0.1:
            raise ParameterError(f"epsilon = {self.epsilon} outside (0, 1/10)")


@dataclass
class SurgeryParams:
    lambda_bound: float
    epsilon: float
    alpha: float
    r_hat: float
    delta_hat: float
    rho: float
    r_m: float
    r2: float
    r2plus: float
    r3: float          # cutoff radius of the cone/ambient interpolation
    delta: float
    eta: float
    kappa: float
    f0: float

    def validate(self) -> None:
        if abs(self.r2 - (1 - self.rho) * self.r_m) > 1e-12 * self.r_m:
            raise ParameterError("r2 != (1 - rho) * r_m")
        if abs(self.r2plus - (1 + self.rho) * self.r_m) > 1e-12 * self.r_m:
            raise ParameterError("r2plus != (1 + rho) * r_m")
        if not self.r_hat < self.r3 < self.r2:
            raise ParameterError(
                f"need r_hat < r3 < r2, got {self.r_hat}, {self.r3}, {self.r2}"
            )
        if not 0 < self.epsilon < 0.5:
            raise ParameterError(f"epsilon = {self.epsilon} outside (0, 1/2)")


# ---------------------------------------------------------------------------
# bubble profiles
# ---------------------------------------------------------------------------

def solve_cone_slope(m: float, r1: float) -> float:
    """Smallest k > 0 with cos(k*r1) = m."""
    return math.acos(m) / r1


def make_A(m: float, r1: float = 2.0, r_max: Optional[float] = None) -> Profile:
    """Hopf-fiber warp: sin(k r)/k up to r1, then affine with slope m."""
    if not 0.0 < m < 0.01:
        raise ParameterError(f"m = {m} outside (0, 1/100)")
    if r_max is None:
        r_max = 8.0 * r1
    k = solve_cone_slope(m, r1)
    A1 = math.sin(k * r1) / k

    def rule_sin(rj: Jet2) -> Jet2:
        return jet_sin(rj * k) * (1.0 / k)

    prof = Profile(
        pieces=[
            Piece(0.0, r1, rule_sin, "sin_over_k", {"k": k}),
            Piece(r1, r_max, rule_affine(A1, m, r1), "affine", {"value": A1, "slope": m}),
        ],
        smoothness="C1",
        label="A",
        params={"k": k, "m": m, "r1": r1, "A_r1": A1},
    )
    prof.validate_c1()
    return prof


def make_B(m: float, r1: float, A: Profile, r_max: Optional[float] = None) -> Profile:
    """Plateau b, then a bump bridge with 0 <= B'' <= 4m/r1, then affine = A.

    B' on the bridge is m times a C-infinity step, so B'' = m * step' peaks
    at exactly 4m/r1; b comes from back-integrating to hit A(r1) at r1.
    """
    if r_max is None:
        r_max = A.r_max
    k, A1 = A.params["k"], A.params["A_r1"]
    L = 0.5 * r1
    T1 = _flat_step_integral(1.0)  # = 1/2 up to quadrature
    b = A1 - m * L * T1
    if not b > 1.0 / (2.0 * k):
        raise ConstructionError(
            f"plateau b = {b} <= 1/(2k) = {1/(2*k)}; m = {m} too large"
        )

    def rule_bridge(rj: Jet2) -> Jet2:
        t = (rj.v - L) / L
        return Jet2(
            b + m * L * _flat_step_integral(t),
            m * _flat_step(t) * rj.d1,
            (m / L) * _flat_step_d(t) * rj.d1 * rj.d1 + m * _flat_step(t) * rj.d2,
        )

    prof = Profile(
        pieces=[
            Piece(0.0, L, rule_const(b), "const", {"value": b}),
            Piece(L, r1, rule_bridge, "bump_bridge", {"b": b, "m": m}),
            Piece(r1, r_max, rule_affine(A1, m, r1), "affine", {"value": A1, "slope": m}),
        ],
        smoothness="C1",
        label="B",
        params={"b": b, "m": m, "r1": r1, "k": k},
    )
    prof.validate_c1()
    return prof


def make_f2(delta2: float, alpha2: float, r_max: float) -> Profile:
    """Polynomial-growth warp delta2 * (1 + r^2)^(alpha2/2)."""
    if not 0.0 < alpha2 <= 0.5:
        raise ParameterError(f"alpha2 = {alpha2} outside (0, 1/2]")
    if not 0.0 < delta2 < 1.0:
        raise ParameterError(f"delta2 = {delta2} outside (0, 1)")

    def rule(rj: Jet2) -> Jet2:
        return jet_pow(rj * rj + 1.0, 0.5 * alpha2) * delta2

    return Profile(
        pieces=[Piece(0.0, r_max, rule, "poly_warp", {"delta2": delta2, "alpha2": alpha2})],
        smoothness="smooth",
        label="f2",
        params={"delta2": delta2, "alpha2": alpha2},
    )


def make_h3(
    m: float,
    epsilon: float,
    r1: float,
    r3: float,
    A_r1: float,
    r_max: Optional[float] = None,
) -> Profile:
    """Cone-flattening slope: h'' = c/r on [r1, r3], affine slope 1-eps after.

    c = (1 - eps - m)/ln(r3/r1) spends the slope budget exactly; the
    constraint r*h'' = c <= 10/ln(r3) is checked, not assumed.
    """
    if r3 <= r1:
        raise ParameterError(f"r3 = {r3} must exceed r1 = {r1}")
    if r_max is None:
        r_max = 16.0 * r3
    c = (1.0 - epsilon - m) / math.log(r3 / r1)
    budget = 10.0 / math.log(r3)
    if c > budget:
        # minimal feasible r3 solves (1-eps-m) ln r3 = 10 ln(r3/r1)
        ln_min = 10.0 * math.log(r1) / (10.0 - (1.0 - epsilon - m))
        raise ParameterError(
            f"slope budget infeasible: c = {c:.6g} > 10/ln(r3) = {budget:.6g}; "
            f"minimal r3 is {math.exp(ln_min):.6g}"
        )

    def rule_log(rj: Jet2) -> Jet2:
        # A_r1 + m (r - r1) + c (r ln(r/r1) - r + r1)
        return (
            (rj - r1) * m
            + (rj * jet_ln(rj * (1.0 / r1)) - rj + r1) * c
            + A_r1
        )

    h3_r3 = float(rule_log(jet_var(r3)).v)
    R3 = r3 - h3_r3 / (1.0 - epsilon)

    prof = Profile(
        pieces=[
            Piece(r1, r3, rule_log, "log_flatten", {"c": c, "m": m, "A_r1": A_r1}),
            Piece(
                r3,
                r_max,
                rule_affine(0.0, 1.0 - epsilon, R3),
                "cone_affine",
                {"slope": 1.0 - epsilon, "R3": R3},
            ),
        ],
        smoothness="C1",
        label="h3",
        params={"c": c, "R3": R3, "h3_r3": h3_r3, "r3": r3, "epsilon": epsilon, "m": m},
    )
    prof.validate_c1()
    return prof


def make_f4(
    alpha2: float,
    delta2: float,
    epsilon: float,
    r3: float,
    h3: Profile,
    f2: Profile,
    r_max: Optional[float] = None,
) -> Profile:
    """Switch the warp to delta*(r - R3)^alpha beyond r3, C1 by the matching
    exponent/coefficient formulas (verified, not trusted)."""
    if r_max is None:
        r_max = 16.0 * r3
    h3_r3, R3 = h3.params["h3_r3"], h3.params["R3"]
    t3 = h3_r3 / (1.0 - epsilon)  # = r3 - R3
    alpha = alpha2 * (r3 * t3) / (1.0 + r3 * r3)
    delta = delta2 * (1.0 + r3 * r3) ** (0.5 * alpha2) / t3**alpha
    if not alpha < alpha2:
        raise ConstructionError(f"alpha = {alpha} >= alpha2 = {alpha2}")
    if not R3 > 0:
        raise ConstructionError(f"R3 = {R3} <= 0")

    def rule_tail(rj: Jet2) -> Jet2:
        return jet_pow(rj - R3, alpha) * delta

    prof = Profile(
        pieces=f2.trimmed(0.0, r3)
        + [Piece(r3, r_max, rule_tail, "power_tail", {"delta": delta, "alpha": alpha, "R3": R3})],
        smoothness="C1",
        label="f4",
        params={"alpha": alpha, "delta": delta, "R3": R3, "alpha2": alpha2, "delta2": delta2},
    )
    try:
        prof.validate_c1()
    except ConstructionError as exc:
        raise ConstructionError(f"f4 matching formulas failed C1 check: {exc}") from exc
    return prof


def make_lambda(r3: float, R3: float, r_max: Optional[float] = None) -> Profile:
    """Blow-down reparameterization: power law forcing lambda'(r3) = 1,
    then the exact isometry lambda = r - R3."""
    if not 0.0 < R3 < r3:
        raise ParameterError(f"need 0 < R3 < r3, got R3 = {R3}, r3 = {r3}")
    if r_max is None:
        r_max = 16.0 * r3
    p = r3 / (r3 - R3)
    C0 = r3 - R3

    def rule_power(rj: Jet2) -> Jet2:
        return jet_pow(rj * (1.0 / r3), p) * C0

    prof = Profile(
        pieces=[
            Piece(0.0, r3, rule_power, "power_law", {"p": p, "coeff": C0}),
            Piece(r3, r_max, rule_affine(C0, 1.0, r3), "shift", {"R3": R3}),
        ],
        smoothness="C1",
        label="lambda",
        params={"p": p, "r3": r3, "R3": R3},
    )
    prof.validate_c1()
    return prof


# ---------------------------------------------------------------------------
# surgery profiles
# ---------------------------------------------------------------------------

def make_step2_h(epsilon: float, r_max: float = 2.0) -> Profile:
    """Cone-angle bridge: (1-eps) r below 1/2, r above 1, quintic Hermite
    between, matching value/slope/curvature at both ends.

    The exact anchors force mean slope 1 + eps on the bridge, so any C^1
    choice has max |h''| >= 12 eps; the quintic lands near 20 eps and the
    combined bound |h - r| + |h' - 1| + |h''| <= 21 eps is verified here.
    """
    if not 0.0 < epsilon < 0.1:
        raise ParameterError(f"epsilon = {epsilon} outside (0, 1/10)")
    lo, hi = 0.5, 1.0
    coeffs = quintic_hermite_coeffs(
        lo, (1.0 - epsilon) * lo, 1.0 - epsilon, 0.0, hi, 1.0, 1.0, 0.0
    )
    bridge = rule_poly_in_t(coeffs, lo, hi - lo)

    prof = Profile(
        pieces=[
            Piece(0.0, lo, rule_affine(0.0, 1.0 - epsilon, 0.0), "cone", {"slope": 1 - epsilon}),
            Piece(lo, hi, bridge, "hermite_bridge", {"epsilon": epsilon}),
            Piece(hi, r_max, rule_affine(hi, 1.0, hi), "identity", {}),
        ],
        smoothness="C1",
        label="step2_h",
        params={"epsilon": epsilon},
    )
    prof.validate_c1()

    rs = np.linspace(lo, hi, 4001)
    out = prof(rs)
    triple = np.abs(out.v - rs) + np.abs(out.d1 - 1.0) + np.abs(out.d2)
    worst = float(triple.max())
    if worst > 21.0 * epsilon:
        raise ConstructionError(
            f"bridge bound violated: max(|h-r|+|h'-1|+|h''|) = {worst:.4g} "
            f"> 21*eps = {21*epsilon:.4g}"
        )
    prof.params["bridge_triple_max"] = worst
    return prof


def cubic_logwarp_smallness_checks(
    alpha: float, r_m: float, rho: float, eta: float, c_universal: float = 8.0
) -> None:
    """The 'r_m small enough' regime, materialized as named inequalities."""
    if not (-1.0 / (2.0 * rho) + c_universal / (1.0 - rho) < -4.0 / (1.0 - rho)):
        raise ParameterError(
            f"rho = {rho} too large: need -1/(2 rho) + C/(1-rho) < -4/(1-rho) with C = {c_universal}"
        )
    if not alpha <= ((1.0 - rho) / (1.0 + rho)) ** 2:
        raise ParameterError(
            f"alpha = {alpha} > ((1-rho)/(1+rho))^2 = {((1-rho)/(1+rho))**2:.6g}"
        )
    decay = math.exp(-4.0 * eta * r_m / alpha)
    if not decay > 1.0 - rho:
        raise ParameterError(
            f"exp(-4 eta r_m / alpha) = {decay:.6g} <= 1 - rho = {1-rho:.6g}"
        )
    if not abs(1.0 - decay) <= 2.0 * rho**2 / (3.0 * (1.0 - rho)):
        raise ParameterError(
            f"|1 - exp(-4 eta r_m/alpha)| = {abs(1-decay):.3g} > "
            f"2 rho^2/(3(1-rho)) = {2*rho**2/(3*(1-rho)):.3g}"
        )
    lhs = eta / r_m
    rhs = alpha / (
        (1.0 / (2.0 * rho) + 1.0 / (1.0 - rho) + c_universal * r_m)
        * (1.0 - rho) ** 2
        * r_m**2
    )
    if not lhs <= rhs:
        raise ParameterError(
            f"eta/r_m = {lhs:.6g} > absorption threshold {rhs:.6g}; shrink r_m"
        )


def make_cubic_logwarp(
    f_plus: Profile,
    alpha: float,
    r_m: float,
    rho: float = 1.0 / 32.0,
    eta: float = 0.0,
) -> tuple[Profile, float]:
    """Warp interpolation delta r^alpha -> f_plus via a cubic in ln f.

    Returns the profile together with delta = f_plus(0) r_m^-alpha e^{2 eta r_m}.
    The radial log-concavity f''/f <= -alpha/r^2 on the interpolation interval
    is sampled, and its failure names the fix (smaller r_m).
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha = {alpha} outside (0, 1)")
    cubic_logwarp_smallness_checks(alpha, r_m, rho, eta)
    r2 = (1.0 - rho) * r_m
    r2p = (1.0 + rho) * r_m
    if r2p >= f_plus.r_max:
        raise ParameterError("interpolation interval exceeds the ambient profile")

    f_center = float(f_plus(0.0).v)
    delta = f_center * r_m ** (-alpha) * math.exp(2.0 * eta * r_m)

    # cubic Hermite of ln f on [r2, r2p] in t = (r - r2)/L
    L = r2p - r2
    y0 = math.log(delta) + alpha * math.log(r2)
    m0 = alpha / r2
    fp = f_plus(r2p)
    y1 = math.log(float(fp.v))
    m1 = float(fp.d1 / fp.v)
    d0, d1_ = m0 * L, m1 * L
    dy = y1 - y0
    coeffs = [y0, d0, 3.0 * dy - 2.0 * d0 - d1_, -2.0 * dy + d0 + d1_]
    cubic = rule_poly_in_t(coeffs, r2, L)

    def rule_interp(rj: Jet2) -> Jet2:
        return jet_exp(cubic(rj))

    def rule_inner(rj: Jet2) -> Jet2:
        return jet_pow(rj, alpha) * delta

    prof = Profile(
        pieces=[
            Piece(0.0, r2, rule_inner, "power_warp", {"delta": delta, "alpha": alpha}),
            Piece(r2, r2p, rule_interp, "log_cubic", {"alpha": alpha}),
        ]
        + f_plus.trimmed(r2p, f_plus.r_max),
        smoothness="C1",
        label="f2_surgery",
        params={"delta": delta, "alpha": alpha, "r_m": r_m, "rho": rho, "eta": eta},
    )
    prof.validate_c1()

    rs = np.linspace(r2, r2p, 10_001)[1:-1]
    out = prof(rs)
    ratio = out.d2 / out.v + alpha / rs**2
    worst = float(ratio.max())
    if worst > 0.0:
        raise ParameterError(
            f"concavity postcondition f''/f <= -alpha/r^2 violated by {worst:.3g} "
            f"on the interpolation interval; use a smaller r_m"
        )
    return prof, delta


def make_xi(r3: float, r_max: Optional[float] = None) -> Profile:
    """Cutoff 0 -> 1 across [r3, 2 r3] with |xi'| <= 4/r, |xi''| <= 19/r^2."""
    if r3 <= 0:
        raise ParameterError(f"r3 = {r3} must be positive")
    if r_max is None:
        r_max = 8.0 * r3

    def rule_bridge(rj: Jet2) -> Jet2:
        return smoothstep_jet((rj - r3) * (1.0 / r3))

    prof = Profile(
        pieces=[
            Piece(0.0, r3, rule_const(0.0), "zero", {}),
            Piece(r3, 2.0 * r3, rule_bridge, "smoothstep", {"r3": r3}),
            Piece(2.0 * r3, r_max, rule_const(1.0), "one", {}),
        ],
        smoothness="C1",
        label="xi",
        params={"r3": r3},
    )
    prof.validate_c1()
    rs = np.linspace(r3, 2.0 * r3, 2001)
    out = prof(rs)
    if float((np.abs(out.d1) * rs).max()) > 4.0 or float(
        (np.abs(out.d2) * rs * rs).max()
    ) > 19.0:
        raise ConstructionError("cutoff derivative certificates violated")
    return prof


_MU_SERIES_SWITCH = 1e-3


def make_model_mu(kappa: float, r_max: float = 2.0) -> Profile:
    """Space-form factor mu(r) = sn_kappa(r)/r, series-evaluated below r = 1e-3."""
    if kappa > 0 and kappa * r_max**2 >= (math.pi / 2) ** 2:
        raise ParameterError(
            f"kappa = {kappa} too large for r_max = {r_max}: sn would vanish"
        )

    if kappa == 0.0:
        rule = rule_const(1.0)
        name = "flat"
    else:
        s = math.sqrt(abs(kappa))
        series = [1.0, 0.0, -kappa / 6.0, 0.0, kappa**2 / 120.0, 0.0,
                  -kappa**3 / 5040.0, 0.0, kappa**4 / 362880.0]
        circ = jet_sin if kappa > 0 else jet_sinh
        name = "sn_over_r"

        def rule(rj: Jet2) -> Jet2:
            if isinstance(rj.v, np.ndarray):
                small = rj.v < _MU_SERIES_SWITCH
                safe = Jet2(np.where(small, _MU_SERIES_SWITCH, rj.v), rj.d1, rj.d2)
                closed = circ(safe * s) * (1.0 / s) / safe
                ser = jet_poly(series, rj)
                pick = lambda a, b: np.where(small, a, b)
                return Jet2(pick(ser.v, closed.v), pick(ser.d1, closed.d1),
                            pick(ser.d2, closed.d2))
            if rj.v < _MU_SERIES_SWITCH:
                return jet_poly(series, rj)
            return circ(rj * s) * (1.0 / s) / rj

    return Profile(
        pieces=[Piece(0.0, r_max, rule, name, {"kappa": kappa})],
        smoothness="smooth",
        label="mu",
        params={"kappa": kappa},
    )


def sn_jet(kappa: float, rj: Jet2) -> Jet2:
    """sn_kappa(r): sin, identity or sinh depending on the sign of kappa."""
    if kappa == 0.0:
        return rj
    s = math.sqrt(abs(kappa))
    return (jet_sin(rj * s) if kappa > 0 else jet_sinh(rj * s)) * (1.0 / s)
