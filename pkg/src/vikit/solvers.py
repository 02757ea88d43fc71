"""Projection-type iterative solvers for VI(C, A) and for common points of
VI(C, A) and the fixed-point set of a nonexpansive map.

Two schemes are provided: the projected-gradient fixed-point iteration
x_{n+1} = P_C(x_n - lam * A x_n), and an anchored variant
x_{n+1} = a_n * anchor + (1 - a_n) * S(P_C(x_n - lam * A x_n)) for a
nonexpansive map S.  Both record the natural residual per iterate and, when a
reference solution is supplied and the operator is gamma-expansive, the
operator residual s_n = |A x_n - A x_ref| together with the certified distance
bound s_n / gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, DivergenceError, ValidationError
from .geometry import ConvexSet, project, set_from_json
from .operators import AffineOperator, certify_moduli, evaluate

CONVERGED = "Converged"
MAX_ITERS = "MaxIters"

DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_MAX_ITERS = 10_000
MEMBERSHIP_TOL = 1e-6
DEFAULT_COMPARISON_DELTA = 1e-6


@dataclass(frozen=True)
class AnchorSchedule:
    """Anchor weight rule a_n for the anchored scheme.

    Rules: "harmonic" gives 1/(n+1); "power" gives scale/(n+1)^exponent;
    "geometric" gives scale * ratio^n.  Weights must stay in (0, 1].
    """

    rule: str = "harmonic"
    scale: float = 1.0
    exponent: float = 1.0
    ratio: float = 0.5

    def __post_init__(self):
        if self.rule not in ("harmonic", "power", "geometric"):
            raise ConfigurationError(f"unknown anchor schedule rule '{self.rule}'")
        if not 0.0 < self.scale <= 1.0:
            raise ConfigurationError("anchor schedule scale must be in (0, 1]")
        if self.rule == "power" and self.exponent <= 0.0:
            raise ConfigurationError("anchor schedule exponent must be positive")
        if self.rule == "geometric" and not 0.0 < self.ratio < 1.0:
            raise ConfigurationError("anchor schedule ratio must be in (0, 1)")

    def weight(self, n: int) -> float:
        if self.rule == "harmonic":
            return 1.0 / (n + 1)
        if self.rule == "power":
            return self.scale / (n + 1) ** self.exponent
        return self.scale * self.ratio**n

    @classmethod
    def from_json(cls, doc: dict | None) -> "AnchorSchedule":
        if doc is None:
            return cls()
        params = {k: v for k, v in doc.items() if k in ("rule", "scale", "exponent", "ratio")}
        return cls(**params)


@dataclass(frozen=True)
class IterationConfig:
    """Solver parameters.

    ``step`` must lie in (0, 2*alpha) for the certified inverse-strong-monotonicity
    modulus alpha of the operator; that is checked when a solve starts.
    """

    step: float
    anchor_schedule: AnchorSchedule = field(default_factory=AnchorSchedule)
    max_iters: int = DEFAULT_MAX_ITERS
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0.0):
            raise ConfigurationError("step must be positive")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        if not (np.isfinite(self.residual_tol) and self.residual_tol > 0.0):
            raise ConfigurationError("residual_tol must be positive")

    @classmethod
    def from_json(cls, doc: dict) -> "IterationConfig":
        try:
            step = doc["lambda"]
        except KeyError as exc:
            raise ValidationError("config missing field 'lambda'") from exc
        return cls(
            step=float(step),
            anchor_schedule=AnchorSchedule.from_json(doc.get("anchor_schedule")),
            max_iters=int(doc.get("max_iters", DEFAULT_MAX_ITERS)),
            residual_tol=float(doc.get("tol", DEFAULT_RESIDUAL_TOL)),
            seed=int(doc.get("seed", 0)),
        )


@dataclass(frozen=True)
class IterationTrace:
    """Per-iteration history of a solve.

    Row n holds the iterate x_n, its natural residual
    r_n = |x_n - P_C(x_n - lam * A x_n)| and, when a reference point was
    supplied, the operator residual s_n = |A x_n - A x_ref|; the shortcut bound
    b_n = s_n / gamma is populated when gamma > 0.
    """

    iterates: np.ndarray
    natural_residuals: np.ndarray
    operator_residuals: np.ndarray | None
    shortcut_bounds: np.ndarray | None
    status: str
    gamma: float

    def __post_init__(self):
        for name in ("iterates", "natural_residuals", "operator_residuals", "shortcut_bounds"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def rows(self) -> int:
        return self.iterates.shape[0]

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def distances_to(self, x_star) -> np.ndarray:
        x_star = np.asarray(x_star, dtype=float)
        return np.linalg.norm(self.iterates - x_star[None, :], axis=1)


class NonexpansiveMap:
    """Base class for the maps S paired with the VI in the anchored scheme."""

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(NonexpansiveMap):
    def apply(self, x):
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ProjectionOnto(NonexpansiveMap):
    set_: ConvexSet

    def apply(self, x):
        return self.set_.project(x)


@dataclass(frozen=True)
class AffineAverage(NonexpansiveMap):
    """x -> (1 - t) x + t c; nonexpansive for t in [0, 1], fixed point c for t > 0."""

    t: float
    fixed_point: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValidationError("averaging coefficient t must be in [0, 1]")
        c = np.array(self.fixed_point, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValidationError("fixed point must be a finite vector")
        c.setflags(write=False)
        object.__setattr__(self, "fixed_point", c)

    def apply(self, x):
        return (1.0 - self.t) * np.asarray(x, dtype=float) + self.t * self.fixed_point


def map_from_json(doc: dict | None) -> NonexpansiveMap:
    """Build a nonexpansive map from {"type": "identity"|"projection"|"affine_average", ...}."""
    if doc is None:
        return Identity()
    kind = doc.get("type")
    if kind == "identity":
        return Identity()
    if kind == "projection":
        try:
            return ProjectionOnto(set_from_json(doc["set"]))
        except KeyError as exc:
            raise ValidationError(f"projection map spec missing field {exc}") from exc
    if kind == "affine_average":
        try:
            return AffineAverage(t=float(doc["t"]), fixed_point=doc["fixed_point"])
        except KeyError as exc:
            raise ValidationError(f"affine_average map spec missing field {exc}") from exc
    raise ValidationError(f"unknown nonexpansive map type '{kind}'")


def shortcut_distance_bound(gamma: float, operator_residual: float) -> float:
    """Distance bound |x - x*| <= |Ax - Ax*| / gamma for gamma-expansive operators."""
    if not (np.isfinite(gamma) and gamma > 0.0):
        raise ConfigurationError("shortcut bound requires an expansiveness modulus gamma > 0")
    if operator_residual < 0.0:
        raise ValidationError("operator residual must be nonnegative")
    return operator_residual / gamma


def _check_step(op: AffineOperator, cfg: IterationConfig) -> float:
    """Validate lam in (0, 2*alpha); return the certified expansiveness modulus."""
    moduli = certify_moduli(op)
    if moduli.ism_alpha is None:
        raise ConfigurationError(
            "operator has no certified inverse-strong-monotonicity modulus "
            "(symmetric part is not positive definite)"
        )
    limit = 2.0 * moduli.ism_alpha
    if not cfg.step < limit:
        raise ConfigurationError(
            f"step {cfg.step:g} outside (0, {limit:g}) for certified alpha "
            f"{moduli.ism_alpha:g}"
        )
    return moduli.expansiveness


def _start_point(set_: ConvexSet, op: AffineOperator, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (op.dim,):
        raise DimensionMismatchError(op.dim, int(np.prod(x0.shape)), what="start point")
    if set_.dim != op.dim:
        raise DimensionMismatchError(op.dim, set_.dim, what="constraint set")
    if not np.all(np.isfinite(x0)):
        raise ValidationError("start point has non-finite entries")
    # Iterates live in C: the operator's domain.  Projecting the start point
    # also makes the membership postcondition independent of residual_tol.
    return set_.project(x0)


def _run(op, set_, cfg, x0, x_ref, advance) -> IterationTrace:
    gamma = _check_step(op, cfg)
    x = _start_point(set_, op, x0)
    a_ref = None
    if x_ref is not None:
        x_ref = np.asarray(x_ref, dtype=float)
        a_ref = evaluate(op, x_ref)

    iterates, residuals, op_residuals, bounds = [], [], [], []
    status = MAX_ITERS
    n = 0
    while True:
        ax = evaluate(op, x)
        proj = project(set_, x - cfg.step * ax)
        r = float(np.linalg.norm(x - proj))
        iterates.append(x)
        residuals.append(r)
        if a_ref is not None:
            s = float(np.linalg.norm(ax - a_ref))
            op_residuals.append(s)
            if gamma > 0.0:
                bounds.append(s / gamma)
        if r <= cfg.residual_tol:
            status = CONVERGED
            break
        if n >= cfg.max_iters:
            break
        x_next = advance(n, x, proj)
        if not np.all(np.isfinite(x_next)):
            raise DivergenceError(n + 1)
        x = x_next
        n += 1

    return IterationTrace(
        iterates=np.asarray(iterates),
        natural_residuals=np.asarray(residuals),
        operator_residuals=np.asarray(op_residuals) if a_ref is not None else None,
        shortcut_bounds=np.asarray(bounds) if (a_ref is not None and gamma > 0.0) else None,
        status=status,
        gamma=gamma,
    )


def solve_projected_gradient(
    op: AffineOperator,
    set_: ConvexSet,
    cfg: IterationConfig,
    x0,
    x_ref=None,
) -> IterationTrace:
    """Iterate x_{n+1} = P_C(x_n - lam * A x_n) until the natural residual drops
    below cfg.residual_tol or max_iters update steps have been taken."""
    return _run(op, set_, cfg, x0, x_ref, lambda n, x, proj: proj)


def solve_halpern(
    op: AffineOperator,
    set_: ConvexSet,
    s_map: NonexpansiveMap,
    cfg: IterationConfig,
    x0,
    anchor=None,
    x_ref=None,
) -> IterationTrace:
    """Anchored scheme x_{n+1} = a_n * anchor + (1 - a_n) * S(P_C(x_n - lam * A x_n)).

    The anchor defaults to the start point.  With S = Identity and a vanishing
    anchor weight the scheme tracks the projected-gradient limit.
    """
    anchor = np.asarray(x0 if anchor is None else anchor, dtype=float)
    if anchor.shape != (op.dim,):
        raise DimensionMismatchError(op.dim, int(np.prod(anchor.shape)), what="anchor")
    if not np.all(np.isfinite(anchor)):
        raise ValidationError("anchor has non-finite entries")
    sched = cfg.anchor_schedule

    def advance(n, x, proj):
        a = sched.weight(n)
        return a * anchor + (1.0 - a) * s_map.apply(proj)

    return _run(op, set_, cfg, x0, x_ref, advance)


@dataclass(frozen=True)
class ComparisonRecord:
    """First iterations at which each stopping criterion certifies |x_n - x*| <= delta."""

    delta: float
    shortcut_iteration: int | None
    natural_iteration: int | None
    trace: IterationTrace


def compare_stopping(
    op: AffineOperator,
    set_: ConvexSet,
    cfg: IterationConfig,
    x0,
    x_star,
    delta: float = DEFAULT_COMPARISON_DELTA,
) -> ComparisonRecord:
    """Run the projected-gradient scheme against a known solution and report the
    first iteration at which (a) the shortcut bound s_n / gamma and (b) the
    natural residual r_n fall to delta."""
    if not (np.isfinite(delta) and delta > 0.0):
        raise ConfigurationError("comparison target delta must be positive")
    moduli = certify_moduli(op)
    if moduli.expansiveness <= 0.0:
        raise ConfigurationError(
            "non-expansive operator: sigma_min(M) = 0, the shortcut bound is unavailable"
        )
    # Run past both thresholds: the natural-residual stop must not cut the
    # trace before the shortcut criterion has a chance to fire.
    inner = IterationConfig(
        step=cfg.step,
        anchor_schedule=cfg.anchor_schedule,
        max_iters=cfg.max_iters,
        residual_tol=min(cfg.residual_tol, delta * 1e-3),
        seed=cfg.seed,
    )
    trace = solve_projected_gradient(op, set_, inner, x0, x_ref=x_star)

    def first_at_most(values, target):
        hits = np.nonzero(np.asarray(values) <= target)[0]
        return int(hits[0]) if hits.size else None

    return ComparisonRecord(
        delta=delta,
        shortcut_iteration=first_at_most(trace.shortcut_bounds, delta),
        natural_iteration=first_at_most(trace.natural_residuals, delta),
        trace=trace,
    )


__all__ = [
    "AnchorSchedule",
    "IterationConfig",
    "IterationTrace",
    "NonexpansiveMap",
    "Identity",
    "ProjectionOnto",
    "AffineAverage",
    "map_from_json",
    "solve_projected_gradient",
    "solve_halpern",
    "shortcut_distance_bound",
    "compare_stopping",
    "ComparisonRecord",
    "CONVERGED",
    "MAX_ITERS",
    "MEMBERSHIP_TOL",
    "DEFAULT_COMPARISON_DELTA",
]
