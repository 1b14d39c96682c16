"""Inductive parameter schedules and map-distortion bookkeeping.

Pure arithmetic for the iterated-surgery limit: the geometric schedule of
radii/warp sizes/curvature allowances, the Holder exponent of composed
blow-down maps, the finite distortion products they satisfy, and the
geometric-series bound on accumulated Gromov-Hausdorff error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .profiles import ParameterError


@dataclass(frozen=True)
class Schedule:
    j: int
    r_j: float
    delta_j: float
    eps_j: float
    lambda_j: float


def schedule(j: int, eps: float, delta: float, lambda_plus: float) -> Schedule:
    """Stage-j parameters: r_j = 2^-j, delta_j = delta^(1+j), eps_j = eps 2^-j,
    lambda_j = lambda_plus - sum_{k<=j} eps_k > lambda_plus - eps."""
    if j < 0:
        raise ParameterError(f"stage j = {j} must be nonnegative")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta = {delta} outside (0, 1)")
    eps_spent = eps * sum(2.0 ** (-k) for k in range(1, j + 1))
    lam = lambda_plus - eps_spent
    assert lam > lambda_plus - eps
    return Schedule(
        j=j,
        r_j=2.0 ** (-j),
        delta_j=delta ** (1 + j),
        eps_j=eps * 2.0 ** (-j),
        lambda_j=lam,
    )


def holder_exponent(delta: float, C: float) -> float:
    """alpha(delta) = 1 + ln(C)/ln(delta/2); tends to 1 as delta -> 0."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta = {delta} outside (0, 1)")
    if C < 1.0:
        raise ParameterError(f"C = {C} must be >= 1")
    return 1.0 + math.log(C) / math.log(delta / 2.0)


def compose_distortion(r: float, j: int, delta: float, C: float) -> float:
    """Distortion bound for a j-fold composed blow-down at separation r:

        prod_{k <= j, r <= delta_k r_k} C * prod_{k <= j, r > delta_k r_k} (1 + delta_k) * r

    and the product is certified against (1 + delta) r^alpha(delta) on
    r in (0, 1] (above separation 1 the power bound is simply false)."""
    if not 0.0 < r <= 1.0:
        raise ParameterError(f"separation r = {r} outside (0, 1]")
    out = r
    for k in range(1, j + 1):
        dk = delta ** (1 + k)
        out *= C if r <= dk * 2.0 ** (-k) else (1.0 + dk)
    bound = (1.0 + delta) * r ** holder_exponent(delta, C)
    if out > bound:
        raise AssertionError(
            f"distortion product {out:.6g} exceeds Holder bound {bound:.6g} "
            f"(r={r}, j={j}, delta={delta}, C={C})"
        )
    return out


def gh_error(i: int, j: Optional[int], delta: float, C: float) -> float:
    """Accumulated GH error of the composed maps from stage j down to i:
    C * sum_{k=i+1}^{j} delta^(1+k), with j = None for the full tail.

    For delta <= 1/2 this is certified against the collapse bound C 2^-i delta.
    """
    if j is not None and j < i:
        raise ParameterError(f"need i <= j, got i={i}, j={j}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta = {delta} outside (0, 1)")
    if j is None:
        total = C * delta ** (i + 2) / (1.0 - delta)
    else:
        total = C * sum(delta ** (1 + k) for k in range(i + 1, j + 1))
    if delta <= 0.5:
        assert total <= C * 2.0 ** (-i) * delta * (1 + 1e-12)
    return total
