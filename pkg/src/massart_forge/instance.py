"""The m-dimensional labeled distribution with a hidden direction.

With probability p = 1 - eta a point is drawn with its projection onto the
hidden unit direction v distributed as A and labeled +1; otherwise the
projection follows B and the label is -1.  Both are standard Gaussian in
the orthogonal complement of v.  The flipping probability against the sign
rule "negative exactly on J2" is 0 on J1 u J2 and exactly eta elsewhere on
the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DensityGapError, RangeError
from .hardpair import HardPair, IntervalUnion, mass_in, sample

__all__ = [
    "LabeledSample",
    "MassartInstance",
    "make_instance",
    "build_interval_polynomial",
    "evaluate_from_roots",
    "sample_labeled",
    "sample_null",
    "flip_probability",
    "opt_error",
    "ptf_sign",
    "random_unit_vector",
]


class LabeledSample(NamedTuple):
    x: np.ndarray
    y: int


def build_interval_polynomial(region: IntervalUnion) -> np.ndarray:
    """Coefficients (ascending) of q(t) = prod_i (t - a_i)(t - b_i).

    q is negative exactly on the open interval interiors and positive
    outside the closure; every endpoint is a root.  Disjointness is
    enforced by the IntervalUnion type itself.
    """
    if len(region) == 0:
        raise ValueError("empty interval union")
    return npoly.polyfromroots(region.endpoints)


def evaluate_from_roots(roots: np.ndarray, t) -> np.ndarray:
    """q(t) as the explicit root product; numerically stable at any degree.

    The expanded coefficient form loses the sign near roots once the degree
    grows past ~20; the product form keeps relative error at ~degree * ulp.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.prod(t[:, None] - np.asarray(roots)[None, :], axis=1)


@dataclass(frozen=True, eq=False)
class MassartInstance:
    m: int
    v: np.ndarray
    eta: float
    p: float
    pair: HardPair
    J2_polynomial: np.ndarray  # ascending coefficients, degree 2*(2d+1)

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.v)) - 1.0) > 1e-12:
            raise RangeError(f"v must be a unit vector; |v| = {np.linalg.norm(self.v)}")
        if not (0.0 < self.eta <= 0.5):
            raise RangeError(f"eta = {self.eta} outside (0, 1/2]")

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.v if x.ndim > 1 else np.atleast_1d(float(x @ self.v))

    def off_support_mass(self) -> float:
        """Marginal mass of the mixture with projection outside J1 u J2."""
        joint = _merge_unions(self.pair.J1, self.pair.J2)
        in_a = mass_in(self.pair.A, joint)
        in_b = mass_in(self.pair.B, joint)
        return self.p * (1.0 - in_a) + (1.0 - self.p) * (1.0 - in_b)


def _merge_unions(u1: IntervalUnion, u2: IntervalUnion) -> IntervalUnion:
    return IntervalUnion(tuple(sorted(u1.intervals + u2.intervals)))


def make_instance(pair: HardPair, v: np.ndarray, eta: float) -> MassartInstance:
    v = np.asarray(v, dtype=float)
    return MassartInstance(
        m=len(v),
        v=v,
        eta=float(eta),
        p=1.0 - float(eta),
        pair=pair,
        J2_polynomial=build_interval_polynomial(pair.J2),
    )


def random_unit_vector(m: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal(m)
    return g / np.linalg.norm(g)


def _householder_vector(v: np.ndarray) -> np.ndarray:
    # u = v - alpha e_1 with alpha = -sign(v_1): |u|^2 = 2 (1 + |v_1|), never small
    u = v.copy()
    u[0] += math.copysign(1.0, v[0])
    return u


def embed_samples(v: np.ndarray, t: np.ndarray, z: np.ndarray) -> np.ndarray:
    """x = t v + (Gaussian in the orthogonal complement of v).

    The complement basis comes from the Householder reflector exchanging v
    with a signed first coordinate axis: deterministic and orthonormal.
    The reflection is applied as one fused rank-1 update; z supplies the
    m-1 coordinates orthogonal to the reflector's fixed axis.
    """
    u = _householder_vector(v)
    dot = z @ u[1:]
    dot *= 2.0 / (u @ u)
    x = np.multiply.outer(t, v)
    x -= dot[:, None] * u[None, :]
    x[:, 1:] += z
    return x


def sample_labeled(
    instance: MassartInstance, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """n draws from the labeled distribution as (X, y) arrays.

    Labels first, then the A-projections for the +1 block, the
    B-projections for the -1 block, then one Gaussian block for the
    orthogonal complement: a fixed consumption order for reproducibility.
    """
    if n < 1:
        raise RangeError(f"n = {n} must be at least 1")
    y = np.where(rng.random(n) < instance.p, 1, -1)
    t = np.empty(n)
    pos = y == 1
    n_pos = int(pos.sum())
    if n_pos:
        t[pos] = sample(instance.pair.A, rng, n_pos)
    if n - n_pos:
        t[~pos] = sample(instance.pair.B, rng, n - n_pos)
    z = rng.standard_normal((n, instance.m - 1))
    return embed_samples(instance.v, t, z), y


def sample_null(
    m: int, p: float, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """The indistinguishable baseline: Gaussian x, label independent of x."""
    if n < 1:
        raise RangeError(f"n = {n} must be at least 1")
    y = np.where(rng.random(n) < p, 1, -1)
    x = rng.standard_normal((n, m))
    return x, y


def flip_probability(instance: MassartInstance, x) -> np.ndarray | float:
    """Exact flipping probability at x: 0 on J1 u J2, eta elsewhere.

    Raises on projections falling in a density gap of the marginal, where
    the conditional label law is undefined.
    """
    t = instance.project(x)
    scalar = np.asarray(x).ndim == 1
    in_j = instance.pair.J1.contains(t) | instance.pair.J2.contains(t)
    gap = instance.pair.in_support_gap(t) & ~in_j
    if np.any(gap):
        bad = t[gap][0]
        raise DensityGapError(
            f"projection {bad!r} has zero marginal density; eta(x) undefined"
        )
    out = np.where(in_j, 0.0, instance.eta)
    return float(out[0]) if scalar else out


def opt_error(instance: MassartInstance) -> float:
    """E eta(x) = eta * (mixture mass with projection outside J1 u J2)."""
    return instance.eta * instance.off_support_mass()


def ptf_sign(instance: MassartInstance, x) -> np.ndarray | int:
    """-1 iff the projection lies in J2 (closed membership), else +1."""
    t = instance.project(x)
    out = np.where(instance.pair.J2.contains(t), -1, 1)
    return int(out[0]) if np.asarray(x).ndim == 1 else out
