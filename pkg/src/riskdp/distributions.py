"""Finite mixtures of point masses and uniform segments.

Every random quantity in this package is a finite mixture of atoms and
bounded uniform segments.  The class is closed under the operations the
evaluators need (affine maps, mixing, tail statistics), and every risk
measure downstream has an exact closed form on it, so nothing is ever
sampled or approximated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

from .errors import ValidationError

WEIGHT_TOL = 1e-12
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class PointMass:
    """All probability mass at a single value."""

    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValidationError("PointMass value must be finite")


@dataclass(frozen=True)
class UniformSegment:
    """Uniform density on [lo, hi] with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("UniformSegment endpoints must be finite")
        if not self.lo < self.hi:
            raise ValidationError(
                "UniformSegment requires lo < hi; use PointMass for a single value"
            )

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


Outcome = Union[PointMass, UniformSegment]
Component = Tuple[float, Outcome]


@dataclass(frozen=True)
class MixedDistribution:
    """Finite mixture of PointMass and UniformSegment components.

    Weights are nonnegative and sum to one within 1e-12.  Components keep
    their construction order; nothing is implicitly merged or sorted.
    """

    components: Tuple[Component, ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), o) for w, o in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValidationError("distribution needs at least one component")
        for w, outcome in comps:
            if not math.isfinite(w) or w < 0.0:
                raise ValidationError(f"component weight {w!r} must be finite and >= 0")
            if not isinstance(outcome, (PointMass, UniformSegment)):
                raise ValidationError(f"unsupported outcome {outcome!r}")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                f"component weights sum to {total!r}; must be 1 within {WEIGHT_TOL}"
            )

    # -- constructors --------------------------------------------------

    @classmethod
    def _trusted(cls, components: Tuple[Component, ...]) -> "MixedDistribution":
        # Fast path for internally generated components that are valid by
        # construction; skips the invariant scan.
        dist = object.__new__(cls)
        object.__setattr__(dist, "components", components)
        return dist

    @classmethod
    def point(cls, value: float) -> "MixedDistribution":
        return cls(((1.0, PointMass(value)),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "MixedDistribution":
        return cls(((1.0, UniformSegment(lo, hi)),))

    @classmethod
    def of_atoms(cls, pairs: Iterable[Tuple[float, float]]) -> "MixedDistribution":
        """Build an all-atom distribution from (weight, value) pairs."""
        return cls(tuple((w, PointMass(v)) for w, v in pairs))

    @classmethod
    def mix(
        cls, parts: Iterable[Tuple[float, "MixedDistribution"]]
    ) -> "MixedDistribution":
        """Mixture of distributions with the given nonnegative weights."""
        comps: List[Component] = []
        for p, dist in parts:
            if not math.isfinite(p) or p < 0.0:
                raise ValidationError(f"mixture weight {p!r} must be finite and >= 0")
            if p == 0.0:
                continue
            comps.extend((p * w, o) for w, o in dist.components)
        return cls(tuple(comps))

    # -- pointwise statistics ------------------------------------------

    def cdf(self, y: float) -> float:
        """Pr(Y <= y)."""
        total = 0.0
        for w, o in self.components:
            if isinstance(o, PointMass):
                if o.value <= y:
                    total += w
            elif y >= o.hi:
                total += w
            elif y > o.lo:
                total += w * (y - o.lo) / o.width
        return total

    def atom_mass_at(self, y: float) -> float:
        """Probability carried by atoms exactly at y."""
        return math.fsum(
            w for w, o in self.components if isinstance(o, PointMass) and o.value == y
        )

    def tail_mass(self, v: float) -> float:
        """Pr(Y > v)."""
        total = 0.0
        for w, o in self.components:
            if isinstance(o, PointMass):
                if o.value > v:
                    total += w
            elif v <= o.lo:
                total += w
            elif v < o.hi:
                total += w * (o.hi - v) / o.width
        return total

    def tail_sum(self, v: float) -> float:
        """E[Y * 1{Y > v}]."""
        parts = []
        for w, o in self.components:
            if isinstance(o, PointMass):
                if o.value > v:
                    parts.append(w * o.value)
            elif v <= o.lo:
                parts.append(w * o.midpoint)
            elif v < o.hi:
                # mass above v times the conditional mean of the clipped piece
                parts.append(w * (o.hi - v) / o.width * 0.5 * (v + o.hi))
        return math.fsum(parts)

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        comps = []
        for w, o in self.components:
            if isinstance(o, PointMass):
                comps.append({"w": w, "point": o.value})
            else:
                comps.append({"w": w, "uniform": [o.lo, o.hi]})
        return {"components": comps}

    @classmethod
    def from_json_dict(cls, data: dict) -> "MixedDistribution":
        if not isinstance(data, dict) or "components" not in data:
            raise ValidationError("distribution JSON must be {'components': [...]}")
        raw = data["components"]
        if not isinstance(raw, list):
            raise ValidationError("'components' must be a list")
        comps: List[Component] = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, dict) or "w" not in entry:
                raise ValidationError(f"component {i} must be an object with a 'w' key")
            w = entry["w"]
            if "point" in entry:
                comps.append((w, PointMass(float(entry["point"]))))
            elif "uniform" in entry:
                bounds = entry["uniform"]
                if not (isinstance(bounds, list) and len(bounds) == 2):
                    raise ValidationError(
                        f"component {i}: 'uniform' must be a [lo, hi] pair"
                    )
                comps.append((w, UniformSegment(float(bounds[0]), float(bounds[1]))))
            else:
                raise ValidationError(
                    f"component {i} needs either a 'point' or a 'uniform' key"
                )
        return cls(tuple(comps))


def essential_sup(dist: MixedDistribution) -> float:
    """Largest value carried with positive probability."""
    best = -math.inf
    for w, o in dist.components:
        if w <= 0.0:
            continue
        top = o.value if isinstance(o, PointMass) else o.hi
        if top > best:
            best = top
    return best


def essential_inf(dist: MixedDistribution) -> float:
    """Smallest value carried with positive probability."""
    best = math.inf
    for w, o in dist.components:
        if w <= 0.0:
            continue
        bottom = o.value if isinstance(o, PointMass) else o.lo
        if bottom < best:
            best = bottom
    return best


def affine_transform(dist: MixedDistribution, a: float, b: float) -> MixedDistribution:
    """Distribution of a*Y + b for a > 0; weights are unchanged."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError("affine coefficients must be finite")
    if a <= 0.0:
        raise ValidationError(f"affine scale must be positive, got {a!r}")
    comps = []
    for w, o in dist.components:
        if isinstance(o, PointMass):
            comps.append((w, PointMass(a * o.value + b)))
        else:
            comps.append((w, UniformSegment(a * o.lo + b, a * o.hi + b)))
    return MixedDistribution._trusted(tuple(comps))


def merge_atoms(dist: MixedDistribution, tol: float = MERGE_TOL) -> MixedDistribution:
    """Combine atoms whose values agree within tol (and identical segments).

    The merged atom sits at the weight-averaged value of its group, so the
    mean is preserved exactly.  Output order is deterministic: atoms sorted
    by value, then segments sorted by endpoints.
    """
    atoms = sorted(
        ((o.value, w) for w, o in dist.components if isinstance(o, PointMass)),
        key=lambda pair: pair[0],
    )
    segments = sorted(
        ((o.lo, o.hi, w) for w, o in dist.components if isinstance(o, UniformSegment))
    )
    comps: List[Component] = []
    i = 0
    while i < len(atoms):
        j = i
        while j + 1 < len(atoms) and atoms[j + 1][0] - atoms[i][0] <= tol:
            j += 1
        group = atoms[i : j + 1]
        weight = math.fsum(w for _, w in group)
        if weight > 0.0:
            value = math.fsum(v * w for v, w in group) / weight
        else:
            value = group[0][0]
        comps.append((weight, PointMass(value)))
        i = j + 1
    i = 0
    while i < len(segments):
        lo, hi, weight = segments[i]
        j = i + 1
        while (
            j < len(segments)
            and abs(segments[j][0] - lo) <= tol
            and abs(segments[j][1] - hi) <= tol
        ):
            weight += segments[j][2]
            j += 1
        comps.append((weight, UniformSegment(lo, hi)))
        i = j
    return MixedDistribution(tuple(comps))
