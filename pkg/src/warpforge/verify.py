"""Dense-grid verification of Ricci lower bounds and profile constraints.

Verification never trusts a builder's postconditions: each metric is
sampled piece by piece on log-spaced grids (with geometric refinement near
breakpoints and near r -> 0), block minima and their locations are
reported with margins against the requested bound, and an optional pass
cross-checks random radii against the finite-difference oracle.  The same
configuration always produces a bit-identical report.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curvature import WarpedMetric, fd_ricci_oracle
from .jets import JetDomainError
from .profiles import ConstructionError, ParameterError, Profile


@dataclass
class GridConfig:
    points_per_piece: int = 4096
    refine_factor: int = 16
    refine_frac: float = 0.01
    r_min_frac: float = 1e-8     # innermost sample at r_min_frac * r_max
    oracle: bool = False
    n_oracle: int = 32
    h_fd: float = 1e-4
    seed: int = 0
    r_min: Optional[float] = None  # optional clip of the verified range
    r_max: Optional[float] = None

    @classmethod
    def from_dict(cls, d: dict) -> "GridConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(d) - allowed
        if unknown:
            raise ParameterError(f"unknown grid config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class BlockStat:
    min: float
    argmin: float
    margin: float

    def as_dict(self) -> dict:
        return {"min": self.min, "argmin": self.argmin, "margin": self.margin}


@dataclass
class PieceReport:
    interval: tuple[float, float]
    grid: int
    blocks: dict[str, BlockStat]

    @property
    def passed(self) -> bool:
        return all(b.margin > 0 for b in self.blocks.values())

    def as_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "grid": self.grid,
            "blocks": {k: v.as_dict() for k, v in self.blocks.items()},
        }


@dataclass
class VerificationReport:
    metric_id: str
    bound: float
    passed: bool
    oracle_checked: bool
    oracle_max_rel_err: float
    pieces: list[PieceReport] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "metric_id": self.metric_id,
            "bound": self.bound,
            "passed": self.passed,
            "oracle_checked": self.oracle_checked,
            "oracle_max_rel_err": self.oracle_max_rel_err,
            "pieces": [p.as_dict() for p in self.pieces],
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2)

    def worst(self) -> tuple[str, float, float]:
        """(block, margin, argmin) of the most negative margin."""
        entries = [
            (name, stat.margin, stat.argmin)
            for piece in self.pieces
            for name, stat in piece.blocks.items()
        ]
        return min(entries, key=lambda e: e[1])

    def block_min(self, block: str) -> float:
        return min(p.blocks[block].min for p in self.pieces if block in p.blocks)

    def summary(self) -> str:
        lines = [
            f"metric {self.metric_id}: bound {self.bound:g} -> "
            f"{'PASS' if self.passed else 'FAIL'}"
        ]
        for piece in self.pieces:
            stats = ", ".join(
                f"{k}: min {v.min:.6g} at r={v.argmin:.6g}" for k, v in piece.blocks.items()
            )
            lines.append(
                f"  [{piece.interval[0]:.6g}, {piece.interval[1]:.6g}] "
                f"({piece.grid} pts) {stats}"
            )
        if self.oracle_checked:
            lines.append(f"  oracle max scaled error: {self.oracle_max_rel_err:.3e}")
        return "\n".join(lines)


def _piece_grid(lo: float, hi: float, cfg: GridConfig, global_max: float) -> np.ndarray:
    floor = cfg.r_min_frac * global_max
    lo_eff = max(lo, floor)
    if lo_eff >= hi:
        return np.array([])
    # inset endpoints so samples stay strictly inside the piece
    inset = 1e-12 * (hi - lo_eff)
    a, b = lo_eff + inset, hi - inset
    base = np.geomspace(a, b, cfg.points_per_piece)
    width = hi - lo_eff
    n_ref = max(cfg.refine_factor * 8, 32)
    near_lo = np.geomspace(a, min(a + cfg.refine_frac * width, b), n_ref)
    near_hi = np.geomspace(max(b - cfg.refine_frac * width, a), b, n_ref)
    return np.unique(np.concatenate([base, near_lo, near_hi]))


def _oracle_pass(
    metric: WarpedMetric,
    lo: float,
    hi: float,
    piece_index: int,
    cfg: GridConfig,
    cone: bool,
) -> float:
    """Max scaled error |oracle - formula| / max(0.1, |formula|) over random
    radii of one piece; equivalent to |o - f| <= max(1e-5, 1e-4 |f|) scaled
    to 1e-4.  Returns -inf when the piece is too narrow to difference."""
    rel_width = (hi - lo) / hi
    h_fd = min(cfg.h_fd, rel_width / 50.0)
    if h_fd < 1e-7:
        return float("-inf")
    rng = np.random.default_rng(cfg.seed + 1_000_003 * (piece_index + 1))
    margin = 12.0 * h_fd
    # flat-center floor: at radius r0 the zoomed chart sees curvature ~ r0^2
    # times the physical O(1) blocks, which must stay above the ~1e-8 fd
    # noise, so pieces reaching r = 0 are sampled from 0.04 * hi up
    a = max(lo * (1.0 + margin), 0.04 * hi)
    b = hi * (1.0 - margin)
    if not a < b:
        return float("-inf")
    radii = np.exp(rng.uniform(np.log(a), np.log(b), size=cfg.n_oracle))
    worst = float("-inf")
    for r in radii:
        formula = metric.blocks(float(r))
        oracle = fd_ricci_oracle(metric, float(r), h_fd=h_fd)
        names = ("rr", "sX", "s2") if cone else ("rr", "sX", "sYZ", "s2")
        for name in names:
            fv = float(getattr(formula, name))
            ov = float(getattr(oracle, name))
            worst = max(worst, abs(ov - fv) / max(0.1, abs(fv)))
        # mixed radial/sphere block must vanish in rotational symmetry
        worst = max(worst, float(oracle.cross_ir_mag) / max(0.1, abs(float(formula.rr))))
    return worst


def verify_ric_lower(
    metric: WarpedMetric, bound: float, cfg: Optional[GridConfig] = None
) -> VerificationReport:
    """Sample every smooth piece of the metric and compare each Ricci block
    minimum against the bound."""
    cfg = cfg or GridConfig()
    lo_clip = metric.r_range[0] if cfg.r_min is None else cfg.r_min
    hi_clip = metric.r_range[1] if cfg.r_max is None else cfg.r_max
    cone = metric.is_cone
    report = VerificationReport(
        metric_id=metric.label,
        bound=bound,
        passed=True,
        oracle_checked=cfg.oracle,
        oracle_max_rel_err=0.0,
    )
    worst_err = float("-inf")
    for i, (plo, phi_) in enumerate(metric.verification_pieces()):
        lo, hi = max(plo, lo_clip), min(phi_, hi_clip)
        if lo >= hi:
            continue
        rs = _piece_grid(lo, hi, cfg, hi_clip)
        if rs.size == 0:
            continue
        blocks = metric.blocks(rs)
        stats = {}
        for name, values in blocks.as_dict(cone).items():
            j = int(np.argmin(values))
            vmin = float(values[j])
            stats[name] = BlockStat(vmin, float(rs[j]), vmin - bound)
        piece = PieceReport((lo, hi), int(rs.size), stats)
        report.pieces.append(piece)
        if not piece.passed:
            report.passed = False
        if cfg.oracle:
            worst_err = max(worst_err, _oracle_pass(metric, lo, hi, i, cfg, cone))
    if cfg.oracle:
        report.oracle_max_rel_err = worst_err if np.isfinite(worst_err) else 0.0
    return report


# ---------------------------------------------------------------------------
# profile constraint checks
# ---------------------------------------------------------------------------

@dataclass
class Constraint:
    """expr(r, jet) op bound(r), with op one of '<=', '>='."""

    name: str
    expr: Callable[[np.ndarray, object], np.ndarray]
    op: str
    bound: Callable[[np.ndarray], np.ndarray] | float
    lo: Optional[float] = None
    hi: Optional[float] = None


@dataclass
class ConstraintResult:
    name: str
    passed: bool
    worst: float      # most violating value of expr - bound (op <=) or bound - expr
    arg_worst: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def check_profile_constraints(
    profile: Profile,
    constraints: list[Constraint],
    points: int = 4096,
    r_floor: float = 1e-8,
) -> list[ConstraintResult]:
    out = []
    for con in constraints:
        if con.op not in ("<=", ">="):
            raise ParameterError(f"constraint '{con.name}': bad comparator {con.op!r}")
        lo = profile.r_min if con.lo is None else con.lo
        hi = profile.r_max if con.hi is None else con.hi
        lo = max(lo, r_floor * hi)
        rs = np.geomspace(lo, hi * (1 - 1e-12), points)
        vals = con.expr(rs, profile(rs))
        bnd = con.bound(rs) if callable(con.bound) else np.full_like(rs, con.bound)
        excess = vals - bnd if con.op == "<=" else bnd - vals
        j = int(np.argmax(excess))
        out.append(
            ConstraintResult(
                name=con.name,
                passed=bool(excess[j] <= 0.0),
                worst=float(excess[j]),
                arg_worst=float(rs[j]),
                min=float(vals.min()),
                max=float(vals.max()),
            )
        )
    return out


# ---------------------------------------------------------------------------
# parameter scans
# ---------------------------------------------------------------------------

def scan_params(
    builder: Callable[..., WarpedMetric],
    base: dict,
    ranges: dict[str, list],
    bound: float,
    cfg: Optional[GridConfig] = None,
) -> list[dict]:
    """Run builder + verifier over the cartesian product of `ranges`.

    Failures are data, not errors: each row records whether the build was
    accepted, the verification verdict and the worst margin per block.
    """
    cfg = cfg or GridConfig(points_per_piece=512, refine_factor=4)
    keys = sorted(ranges)
    rows = []
    for combo in itertools.product(*(ranges[k] for k in keys)):
        params = dict(base)
        params.update(dict(zip(keys, combo)))
        row = {k: params[k] for k in keys}
        try:
            metric = builder(**params)
        except (ParameterError, ConstructionError, JetDomainError) as exc:
            row.update(built=False, error=f"{type(exc).__name__}: {exc}", passed=False)
            rows.append(row)
            continue
        report = verify_ric_lower(metric, bound, cfg)
        block_margin = {}
        for piece in report.pieces:
            for name, stat in piece.blocks.items():
                block_margin[name] = min(block_margin.get(name, np.inf), stat.margin)
        row.update(
            built=True,
            error=None,
            passed=report.passed,
            worst_margin=report.worst()[1],
            block_margin=block_margin,
        )
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def export_curvature_csv(metric: WarpedMetric, rs: np.ndarray, path) -> None:
    """Sampled coefficients and Ricci blocks; floats as shortest round-trip."""
    rs = np.asarray(rs, dtype=float)
    a, b, f = metric.coefficients(rs)
    blocks = metric.blocks(rs)
    with open(path, "w") as fh:
        fh.write("r,phi_or_A,B,f,ric_rr,ric_s3_or_sX,ric_sYZ,ric_s2\n")
        for i in range(rs.size):
            row = (
                rs[i], a[i], b[i], f[i],
                blocks.rr[i], blocks.sX[i], blocks.sYZ[i], blocks.s2[i],
            )
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def default_grid_for_range(metric: WarpedMetric, points: int = 512) -> np.ndarray:
    lo, hi = metric.r_range
    lo = max(lo, 1e-8 * hi)
    return np.geomspace(lo, hi * (1 - 1e-12), points)
