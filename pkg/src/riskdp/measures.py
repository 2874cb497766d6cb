"""Risk measures and disutility objectives, evaluated exactly.

The measures are declarative values (small frozen dataclasses) dispatched
by :func:`evaluate`, so stage-indexed recursions and solvers can carry
them around as data.  All evaluation is closed-form on mixed
discrete/uniform distributions; the only numeric integration in the
package is the piecewise-linear disutility push-forward.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

from scipy.integrate import quad

from .distributions import (
    MixedDistribution,
    PointMass,
    UniformSegment,
    essential_inf,
    essential_sup,
)
from .errors import EvaluationOverflowError, ValidationError

ALPHA_TOL = 1e-12
COEFF_TOL = 1e-12


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or not 0.0 <= alpha < 1.0:
        raise ValidationError(f"tail level must lie in [0, 1), got {alpha!r}")
    return alpha


# ---------------------------------------------------------------------------
# risk functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expectation:
    """Plain expectation."""


@dataclass(frozen=True)
class Erm:
    """Entropic risk measure (1/gamma) ln E[exp(gamma Y)].

    gamma may take any sign; gamma = 0 means expectation by continuity.
    """

    gamma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma):
            raise ValidationError("Erm gamma must be finite")


@dataclass(frozen=True)
class ValueAtRisk:
    """Lower quantile min{y : Pr(Y <= y) >= alpha}."""

    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))


@dataclass(frozen=True)
class Cte:
    """Conditional tail expectation at level alpha (atom-aware)."""

    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))


@dataclass(frozen=True)
class Composite:
    """Convex combination of risk functionals.

    Coefficients are nonnegative and sum to one, so constants map to
    themselves and monotonicity of the parts is preserved.
    """

    terms: Tuple[Tuple[float, "RiskFunctional"], ...]

    def __post_init__(self) -> None:
        terms = tuple((float(c), rf) for c, rf in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValidationError("Composite needs at least one term")
        for c, rf in terms:
            if not math.isfinite(c) or c < 0.0:
                raise ValidationError(f"Composite coefficient {c!r} must be >= 0")
            if not isinstance(rf, RF_CLASSES):
                raise ValidationError(f"Composite term {rf!r} is not a risk functional")
        total = math.fsum(c for c, _ in terms)
        if abs(total - 1.0) > COEFF_TOL:
            raise ValidationError(
                f"Composite coefficients sum to {total!r}; must be 1 within {COEFF_TOL}"
            )


RiskFunctional = Union[Expectation, Erm, ValueAtRisk, Cte, Composite]
RF_CLASSES = (Expectation, Erm, ValueAtRisk, Cte, Composite)


def rf_label(rf: RiskFunctional) -> str:
    """Short human-readable tag, used in reports and CLI output."""
    if isinstance(rf, Expectation):
        return "mean"
    if isinstance(rf, Erm):
        return f"erm({rf.gamma:g})"
    if isinstance(rf, ValueAtRisk):
        return f"var({rf.alpha:g})"
    if isinstance(rf, Cte):
        return f"cte({rf.alpha:g})"
    if isinstance(rf, Composite):
        inner = " + ".join(f"{c:g}*{rf_label(t)}" for c, t in rf.terms)
        return f"composite({inner})"
    raise ValidationError(f"unknown risk functional {rf!r}")


def rf_to_json_dict(rf: RiskFunctional) -> dict:
    if isinstance(rf, Expectation):
        return {"kind": "mean"}
    if isinstance(rf, Erm):
        return {"kind": "erm", "gamma": rf.gamma}
    if isinstance(rf, ValueAtRisk):
        return {"kind": "var", "alpha": rf.alpha}
    if isinstance(rf, Cte):
        return {"kind": "cte", "alpha": rf.alpha}
    if isinstance(rf, Composite):
        return {
            "kind": "composite",
            "terms": [{"w": c, "rf": rf_to_json_dict(t)} for c, t in rf.terms],
        }
    raise ValidationError(f"unknown risk functional {rf!r}")


def rf_from_json_dict(data: dict) -> RiskFunctional:
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("risk functional JSON must be an object with a 'kind'")
    kind = data["kind"]
    if kind == "mean":
        return Expectation()
    if kind == "erm":
        if "gamma" not in data:
            raise ValidationError("'erm' needs a 'gamma'")
        return Erm(float(data["gamma"]))
    if kind == "var":
        if "alpha" not in data:
            raise ValidationError("'var' needs an 'alpha'")
        return ValueAtRisk(float(data["alpha"]))
    if kind == "cte":
        if "alpha" not in data:
            raise ValidationError("'cte' needs an 'alpha'")
        return Cte(float(data["alpha"]))
    if kind == "composite":
        terms = data.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ValidationError("'composite' needs a nonempty 'terms' list")
        parsed = []
        for entry in terms:
            if not isinstance(entry, dict) or "w" not in entry or "rf" not in entry:
                raise ValidationError("composite terms must be {'w':, 'rf':} objects")
            parsed.append((float(entry["w"]), rf_from_json_dict(entry["rf"])))
        return Composite(tuple(parsed))
    raise ValidationError(f"unknown risk functional kind {kind!r}")


# ---------------------------------------------------------------------------
# scalar measures
# ---------------------------------------------------------------------------


def mean(dist: MixedDistribution) -> float:
    """Expected value."""
    return math.fsum(
        w * (o.value if isinstance(o, PointMass) else o.midpoint)
        for w, o in dist.components
    )


def _log_mgf(outcome, gamma: float) -> float:
    """ln E[exp(gamma Y)] for a single mixture component."""
    if isinstance(outcome, PointMass):
        return gamma * outcome.value
    z = gamma * outcome.width
    # keep everything in the log domain so wide segments cannot overflow
    if z > 700.0:
        return gamma * outcome.hi + math.log1p(-math.exp(-z)) - math.log(z)
    if z < -700.0:
        return gamma * outcome.lo + math.log1p(-math.exp(z)) - math.log(-z)
    if abs(z) < 1e-12:
        return gamma * outcome.midpoint
    return gamma * outcome.lo + math.log(math.expm1(z) / z)


def erm(gamma: float, dist: MixedDistribution) -> float:
    """Entropic risk measure; gamma = 0 returns the mean by continuity.

    The log-sum is max-shifted, so only a result outside the floating
    range raises, never an intermediate exponential.
    """
    gamma = float(gamma)
    if not math.isfinite(gamma):
        raise ValidationError("gamma must be finite")
    if gamma == 0.0:
        return mean(dist)
    terms = []
    weights = []
    for w, o in dist.components:
        if w <= 0.0:
            continue
        terms.append(_log_mgf(o, gamma))
        weights.append(w)
    shift = max(terms)
    if not math.isfinite(shift):
        raise EvaluationOverflowError(
            f"entropic evaluation overflowed at gamma={gamma!r}"
        )
    total = math.fsum(w * math.exp(t - shift) for w, t in zip(weights, terms))
    value = (shift + math.log(total)) / gamma
    if not math.isfinite(value):
        raise EvaluationOverflowError(
            f"entropic evaluation overflowed at gamma={gamma!r}"
        )
    return value


def value_at_risk(alpha: float, dist: MixedDistribution) -> float:
    """Smallest y with CDF(y) >= alpha, by exact scan of the piecewise CDF.

    The CDF is piecewise linear with jumps only at atoms, so scanning the
    sorted breakpoints and interpolating inside a segment is exact.
    """
    alpha = _check_alpha(alpha)
    if alpha == 0.0:
        return essential_inf(dist)
    points = set()
    for w, o in dist.components:
        if w <= 0.0:
            continue
        if isinstance(o, PointMass):
            points.add(o.value)
        else:
            points.add(o.lo)
            points.add(o.hi)
    breaks = sorted(points)
    prev = breaks[0]
    cdf_prev = dist.cdf(prev)
    if cdf_prev >= alpha:
        return prev
    for y in breaks[1:]:
        cdf_left = dist.cdf(y) - dist.atom_mass_at(y)  # Pr(Y < y)
        if cdf_left >= alpha:
            # the CDF is linear on (prev, y); invert it there
            slope = (cdf_left - cdf_prev) / (y - prev)
            return prev + (alpha - cdf_prev) / slope
        cdf_at = dist.cdf(y)
        if cdf_at >= alpha:
            return y
        prev, cdf_prev = y, cdf_at
    # alpha exceeded every accumulated mass (only possible through float
    # dust in the weights); the top of the support is the right answer
    return essential_sup(dist)


def cte(alpha: float, dist: MixedDistribution) -> float:
    """Conditional tail expectation at level alpha.

    Atoms straddling the quantile are split between the tail average and
    the quantile itself; when no mass lies strictly above the quantile the
    value is the essential supremum.
    """
    alpha = _check_alpha(alpha)
    v = value_at_risk(alpha, dist)
    tail_p = dist.tail_mass(v)
    if tail_p <= 0.0:
        return v
    beta = 1.0 - tail_p
    return (dist.tail_sum(v) + (beta - alpha) * v) / (1.0 - alpha)


def evaluate(rf: RiskFunctional, dist: MixedDistribution) -> float:
    """Dispatch a risk functional onto a distribution."""
    if not isinstance(rf, RF_CLASSES):
        raise ValidationError(f"unknown risk functional {rf!r}")
    comps = dist.components
    if len(comps) == 1 and isinstance(comps[0][1], PointMass):
        # every functional here maps a constant to itself
        return comps[0][1].value
    if isinstance(rf, Expectation):
        return mean(dist)
    if isinstance(rf, Erm):
        return erm(rf.gamma, dist)
    if isinstance(rf, ValueAtRisk):
        return value_at_risk(rf.alpha, dist)
    if isinstance(rf, Cte):
        return cte(rf.alpha, dist)
    return math.fsum(c * evaluate(term, dist) for c, term in rf.terms)


# ---------------------------------------------------------------------------
# disutility functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """Exponential disutility exp(gamma*c) - 1 with gamma > 0.

    The constant shift pins the zero cost to zero disutility; it cancels
    in any comparison between cost streams.
    """

    gamma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma) or self.gamma <= 0.0:
            raise ValidationError("Exponential disutility needs gamma > 0")


@dataclass(frozen=True)
class Linear:
    """Identity disutility."""


@dataclass(frozen=True)
class Power:
    """Power disutility c**k for k >= 1, defined on nonnegative costs."""

    k: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.k) or self.k < 1.0:
            raise ValidationError("Power disutility needs k >= 1")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear disutility through strictly increasing knots.

    Knots are (cost, disutility) pairs; the curve is extended beyond the
    first and last knots with their boundary slopes, and must pass
    through (0, 0).
    """

    knots: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(c), float(u)) for c, u in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise ValidationError("PiecewiseLinear needs at least two knots")
        for (c0, u0), (c1, u1) in zip(knots, knots[1:]):
            if not c1 > c0:
                raise ValidationError("PiecewiseLinear knot costs must increase")
            if not u1 > u0:
                raise ValidationError("PiecewiseLinear knot values must increase")
        for c, u in knots:
            if not (math.isfinite(c) and math.isfinite(u)):
                raise ValidationError("PiecewiseLinear knots must be finite")
        if abs(_pwl_apply(knots, 0.0)) > 1e-12:
            raise ValidationError("PiecewiseLinear must map cost 0 to disutility 0")


DisutilityFunction = Union[Exponential, Linear, Power, PiecewiseLinear]
DISUTILITY_CLASSES = (Exponential, Linear, Power, PiecewiseLinear)


def _pwl_apply(knots: Tuple[Tuple[float, float], ...], c: float) -> float:
    xs = [k[0] for k in knots]
    i = bisect_right(xs, c)
    if i == 0:
        (x0, y0), (x1, y1) = knots[0], knots[1]
    elif i == len(knots):
        (x0, y0), (x1, y1) = knots[-2], knots[-1]
    else:
        (x0, y0), (x1, y1) = knots[i - 1], knots[i]
    return y0 + (y1 - y0) * (c - x0) / (x1 - x0)


def apply_disutility(u: DisutilityFunction, c: float) -> float:
    """Evaluate the disutility at a single cost."""
    if isinstance(u, Linear):
        return c
    if isinstance(u, Exponential):
        try:
            return math.expm1(u.gamma * c)
        except OverflowError as exc:
            raise EvaluationOverflowError(
                f"exponential disutility overflowed at cost {c!r}"
            ) from exc
    if isinstance(u, Power):
        if c < 0.0:
            raise ValidationError("Power disutility is defined on costs >= 0")
        return c**u.k
    if isinstance(u, PiecewiseLinear):
        return _pwl_apply(u.knots, c)
    raise ValidationError(f"unknown disutility {u!r}")


def _segment_disutility_mean(u: DisutilityFunction, seg: UniformSegment) -> float:
    """E[u(Y)] for Y uniform on the segment, closed form where available."""
    if isinstance(u, Linear):
        return seg.midpoint
    if isinstance(u, Exponential):
        z = u.gamma * seg.width
        try:
            return math.exp(u.gamma * seg.lo) * math.expm1(z) / z - 1.0
        except OverflowError as exc:
            raise EvaluationOverflowError(
                f"exponential disutility overflowed on segment {seg!r}"
            ) from exc
    if isinstance(u, Power):
        if seg.lo < 0.0:
            raise ValidationError("Power disutility is defined on costs >= 0")
        k1 = u.k + 1.0
        return (seg.hi**k1 - seg.lo**k1) / (k1 * seg.width)
    if isinstance(u, PiecewiseLinear):
        interior = [c for c, _ in u.knots if seg.lo < c < seg.hi]
        integral, _ = quad(
            lambda x: _pwl_apply(u.knots, x),
            seg.lo,
            seg.hi,
            points=interior or None,
            epsabs=1e-12,
            epsrel=1e-10,
            limit=200,
        )
        return integral / seg.width
    raise ValidationError(f"unknown disutility {u!r}")


def pushforward_mean(u: DisutilityFunction, dist: MixedDistribution) -> float:
    """E[u(Y)] for a mixed distribution."""
    if not isinstance(u, DISUTILITY_CLASSES):
        raise ValidationError(f"unknown disutility {u!r}")
    return math.fsum(
        w
        * (
            apply_disutility(u, o.value)
            if isinstance(o, PointMass)
            else _segment_disutility_mean(u, o)
        )
        for w, o in dist.components
    )


def deu(
    u: DisutilityFunction,
    lam: float,
    marginals: Sequence[MixedDistribution],
) -> float:
    """Per-period expected disutility, discounted and summed.

    Only the per-period marginals matter here; dependence across periods
    is ignored by construction.
    """
    lam = float(lam)
    if not math.isfinite(lam) or not 0.0 <= lam <= 1.0:
        raise ValidationError(f"discount factor must lie in [0, 1], got {lam!r}")
    marginals = list(marginals)
    if not marginals:
        raise ValidationError("deu needs at least one per-period marginal")
    return math.fsum(
        lam**n * pushforward_mean(u, dist) for n, dist in enumerate(marginals)
    )
