"""Simulated statistical-query oracle, near-orthogonal direction sets,
baseline SQ learners, and the distinguishing experiment.

The oracle answers expectations of bounded functions to accuracy tau.
Honest mode averages the query over ceil(C/tau^2) fresh samples, which a
Chernoff bound keeps within tau except with probability < 1e-3 per query.
Adversarial mode answers the true expectation (closed form where the query
supports one, otherwise Monte Carlo certified to tau/4) plus a
deterministic perturbation of magnitude at most tau; the default adversary
rounds toward the null distribution's value, the least informative answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import moments
from .errors import DirectionSetError, QueryBudgetError, RangeError
from .hardpair import HardPair, IntervalUnion, build_hard_pair, mass_in, phi_mass
from .hardpair import sample as hp_sample
from .instance import (
    MassartInstance,
    make_instance,
    sample_labeled,
    sample_null,
)

__all__ = [
    "SQQuery",
    "OracleConfig",
    "SQOracle",
    "oracle_answer",
    "NullDistribution",
    "InstanceDistribution",
    "constant_query",
    "label_mean_query",
    "projected_moment_query",
    "projected_indicator_query",
    "near_orthogonal_set",
    "pair_failure_bound",
    "Hypothesis",
    "learner_constant",
    "learner_chow",
    "ExperimentReport",
    "distinguishing_experiment",
]

CLIP_RADIUS = 6.0  # moment queries clip the projection at 6 sigma; the
# clipped-tail bias (< 1e-6 for degree <= 4) is folded into the oracle's
# tau guarantee.


@dataclass(frozen=True)
class SQQuery:
    """A bounded query function (x, y) -> [-1, 1].

    ``exact`` optionally computes the true expectation for a given
    distribution object; queries without one fall back to certified Monte
    Carlo in adversarial mode.

    Queries that read x only through a few fixed directions can say so via
    ``directions`` (rows) and ``proj_evaluator``; the honest oracle then
    samples just the joint law of those projections and the label, which is
    distributionally identical to sampling full examples and projecting.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    description: str
    exact: Callable[[object], float] | None = None
    directions: np.ndarray | None = None
    proj_evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.clip(self.evaluator(x, y), -1.0, 1.0)

    def evaluate_projected(self, t: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.clip(self.proj_evaluator(t, y), -1.0, 1.0)


@dataclass(frozen=True)
class OracleConfig:
    tau: float
    mode: str = "honest"  # "honest" or "adversarial"
    sample_constant: float = 16.0
    query_budget: int = 1_000_000

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise RangeError(f"tau = {self.tau} outside (0, 1)")
        if self.mode not in ("honest", "adversarial"):
            raise RangeError(f"unknown oracle mode {self.mode!r}")

    @property
    def samples_per_query(self) -> int:
        return math.ceil(self.sample_constant / self.tau**2)


def _covariance_root(sigma: np.ndarray) -> np.ndarray:
    """Symmetric factor L with L L^T = sigma; exact zeros stay zero."""
    vals, vecs = np.linalg.eigh(sigma)
    return vecs * np.sqrt(np.maximum(vals, 0.0))[None, :]


class NullDistribution:
    """Gaussian examples with labels independent of them."""

    def __init__(self, m: int, p: float):
        self.m = m
        self.p = p

    def sample_xy(self, rng: np.random.Generator, n: int):
        return sample_null(self.m, self.p, rng, n)

    def sample_projected(self, rng: np.random.Generator, n: int, directions: np.ndarray):
        """(T, y) with T_ij = <directions_j, x_i>; same law as projecting."""
        y = np.where(rng.random(n) < self.p, 1, -1)
        k = len(directions)
        if k == 0:
            return np.empty((n, 0)), y
        root = _covariance_root(directions @ directions.T)
        return rng.standard_normal((n, k)) @ root.T, y

    def true_expectation(self, query: SQQuery) -> float | None:
        return query.exact(self) if query.exact is not None else None


class InstanceDistribution:
    """The hidden-direction labeled distribution."""

    def __init__(self, instance: MassartInstance):
        self.instance = instance
        self.m = instance.m
        self.p = instance.p

    def sample_xy(self, rng: np.random.Generator, n: int):
        return sample_labeled(self.instance, rng, n)

    def sample_projected(self, rng: np.random.Generator, n: int, directions: np.ndarray):
        """Joint law of (<u_j, x>)_j and y without materialising x.

        <u, x> = t <u, v> + (Gaussian on the complement of v projected on u);
        the second part across the requested directions is a centred
        Gaussian vector with covariance U U^T - (U v)(U v)^T.
        """
        instance = self.instance
        y = np.where(rng.random(n) < instance.p, 1, -1)
        t = np.empty(n)
        pos = y == 1
        n_pos = int(pos.sum())
        if n_pos:
            t[pos] = hp_sample(instance.pair.A, rng, n_pos)
        if n - n_pos:
            t[~pos] = hp_sample(instance.pair.B, rng, n - n_pos)
        k = len(directions)
        if k == 0:
            return np.empty((n, 0)), y
        uv = directions @ instance.v
        sigma = directions @ directions.T - np.outer(uv, uv)
        root = _covariance_root(sigma)
        return t[:, None] * uv[None, :] + rng.standard_normal((n, k)) @ root.T, y

    def true_expectation(self, query: SQQuery) -> float | None:
        return query.exact(self) if query.exact is not None else None


def _round_toward(value: float, target: float, tau: float) -> float:
    """Move value toward target by at most tau."""
    step = target - value
    return value + max(-tau, min(tau, step))


class SQOracle:
    """Budgeted query answering for one distribution.

    Holds mutable budget state; use one oracle per concurrent stream.
    """

    def __init__(
        self,
        distribution,
        config: OracleConfig,
        rng: np.random.Generator,
        null_reference: NullDistribution | None = None,
        adversary: Callable[[float, float, float], float] = _round_toward,
    ):
        self.distribution = distribution
        self.config = config
        self.rng = rng
        self.null_reference = null_reference
        self.adversary = adversary
        self.queries_used = 0

    def answer(self, query: SQQuery) -> float:
        if self.queries_used >= self.config.query_budget:
            raise QueryBudgetError(
                f"query budget {self.config.query_budget} exhausted"
            )
        self.queries_used += 1
        if self.config.mode == "honest":
            return self._empirical_mean(query, self.config.samples_per_query)
        true = self.distribution.true_expectation(query)
        if true is None:
            true = self._certified_monte_carlo(query)
        if self.null_reference is not None:
            null_val = self.null_reference.true_expectation(query)
            if null_val is None:
                null_val = true
        else:
            null_val = true
        return self.adversary(true, null_val, self.config.tau)

    def _empirical_mean(self, query: SQQuery, n: int) -> float:
        projected = (
            query.directions is not None
            and query.proj_evaluator is not None
            and hasattr(self.distribution, "sample_projected")
        )
        total = 0.0
        remaining = n
        while remaining > 0:
            chunk = min(remaining, 1 << 19)
            if projected:
                t, y = self.distribution.sample_projected(
                    self.rng, chunk, query.directions
                )
                total += float(np.sum(query.evaluate_projected(t, y)))
            else:
                x, y = self.distribution.sample_xy(self.rng, chunk)
                total += float(np.sum(query.evaluate(x, y)))
            remaining -= chunk
        return total / n

    def _certified_monte_carlo(self, query: SQQuery) -> float:
        # 4 sigma <= tau/4 for a [-1,1] query needs (16/tau)^2 samples
        n = math.ceil((16.0 / self.config.tau) ** 2)
        return self._empirical_mean(query, n)


def oracle_answer(
    query: SQQuery,
    distribution,
    config: OracleConfig,
    rng: np.random.Generator,
    null_reference: NullDistribution | None = None,
) -> float:
    """One-shot form of SQOracle.answer for a fresh oracle."""
    return SQOracle(distribution, config, rng, null_reference).answer(query)


# ---------------------------------------------------------------- queries


_NO_DIRECTIONS = np.empty((0, 0))


def constant_query() -> SQQuery:
    return SQQuery(
        evaluator=lambda x, y: np.ones(len(y)),
        description="constant 1",
        exact=lambda dist: 1.0,
        directions=_NO_DIRECTIONS,
        proj_evaluator=lambda t, y: np.ones(len(y)),
    )


def label_mean_query() -> SQQuery:
    return SQQuery(
        evaluator=lambda x, y: y.astype(float),
        description="E[y]",
        exact=lambda dist: 2.0 * dist.p - 1.0,
        directions=_NO_DIRECTIONS,
        proj_evaluator=lambda t, y: y.astype(float),
    )


def _signed_projection_moment(dist, u: np.ndarray, j: int) -> float:
    """E[y * <u, x>^j] in closed form via one-dimensional moments."""
    if isinstance(dist, NullDistribution):
        return (2.0 * dist.p - 1.0) * moments.gaussian_moment(j)
    instance = dist.instance
    gamma = float(u @ instance.v)
    s = math.sqrt(max(0.0, 1.0 - gamma**2))
    total = 0.0
    for i in range(j + 1):
        z_mom = moments.gaussian_moment(j - i)
        if z_mom == 0.0:
            continue
        proj = instance.p * moments.measure_moment(instance.pair.A, i) - (
            1.0 - instance.p
        ) * moments.measure_moment(instance.pair.B, i)
        total += math.comb(j, i) * gamma**i * s ** (j - i) * z_mom * proj
    return total


def projected_moment_query(u: np.ndarray, j: int, radius: float = CLIP_RADIUS) -> SQQuery:
    """phi(x, y) = y * clip(<u, x>, -R, R)^j / R^j, a bounded moment probe."""
    u = np.asarray(u, dtype=float)

    def evaluator(x, y):
        t = np.clip(x @ u, -radius, radius)
        return y * (t / radius) ** j

    return SQQuery(
        evaluator=evaluator,
        description=f"y*<u,x>^{j}/R^{j}",
        exact=lambda dist: _signed_projection_moment(dist, u, j) / radius**j,
        directions=u[None, :],
        proj_evaluator=lambda t, y: y * (np.clip(t[:, 0], -radius, radius) / radius) ** j,
    )


def projected_indicator_query(u: np.ndarray, region: IntervalUnion) -> SQQuery:
    """phi(x) = 1[<u, x> in region]; closed form when u is the hidden direction."""
    u = np.asarray(u, dtype=float)

    def exact(dist) -> float | None:
        if isinstance(dist, NullDistribution):
            return float(math.fsum(float(phi_mass(a, b)) for a, b in region.intervals))
        instance = dist.instance
        gamma = float(u @ instance.v)
        if abs(abs(gamma) - 1.0) > 1e-12:
            return None  # projection mixes A/B with an independent Gaussian
        flipped = (
            IntervalUnion(tuple(sorted((-b, -a) for a, b in region.intervals)))
            if gamma < 0
            else region
        )
        return instance.p * mass_in(instance.pair.A, flipped) + (
            1.0 - instance.p
        ) * mass_in(instance.pair.B, flipped)

    return SQQuery(
        evaluator=lambda x, y: region.contains(x @ u).astype(float),
        description="1[<u,x> in region]",
        exact=exact,
        directions=u[None, :],
        proj_evaluator=lambda t, y: region.contains(t[:, 0]).astype(float),
    )


# ----------------------------------------------------- direction sets


def pair_failure_bound(m: int, c: float) -> float:
    """Per-pair overlap failure probability bound, 2e^{-c^2 m/4} + 2e^{-m/32}."""
    return 2.0 * math.exp(-(c**2) * m / 4.0) + 2.0 * math.exp(-m / 32.0)


def near_orthogonal_set(
    m: int,
    c: float,
    target_size: int,
    rng: np.random.Generator,
    max_tries: int | None = None,
) -> np.ndarray:
    """Uniform unit vectors, rejection-resampled until pairwise |<u,v>| <= c.

    The default try budget is sized from the per-pair failure bound
    2e^{-c^2 m/4} + 2e^{-m/32}: ten attempts per requested vector, inflated
    by the bound's per-candidate rejection estimate (capped, since the
    union bound turns vacuous long before sampling actually struggles).
    """
    if not (0.0 < c <= 1.0):
        raise RangeError(f"c = {c} outside (0, 1]")
    if target_size < 1:
        raise RangeError("target_size must be at least 1")
    p_bound = pair_failure_bound(m, c)
    if max_tries is None:
        reject = min(0.9, (target_size - 1) * p_bound)
        max_tries = math.ceil(10.0 * target_size / (1.0 - reject))
    out = np.empty((target_size, m))
    count = 0
    tries = 0
    while count < target_size:
        if tries >= max_tries:
            raise DirectionSetError(
                f"gave up after {tries} tries with {count}/{target_size} vectors; "
                f"per-pair failure bound 2e^(-c^2 m/4) + 2e^(-m/32) = {p_bound:.3g}"
            )
        tries += 1
        g = rng.standard_normal(m)
        g /= np.linalg.norm(g)
        if count == 0 or np.max(np.abs(out[:count] @ g)) <= c:
            out[count] = g
            count += 1
    return out


# ----------------------------------------------------------- learners


@dataclass(frozen=True)
class Hypothesis:
    predict: Callable[[np.ndarray], np.ndarray]
    description: str

    def error(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(x) != y))


def learner_constant(oracle: SQOracle) -> Hypothesis:
    """Queries E[y] once and outputs the majority constant."""
    sign = 1 if oracle.answer(label_mean_query()) >= 0.0 else -1
    return Hypothesis(
        predict=lambda x: np.full(len(x), sign, dtype=int),
        description=f"constant {sign:+d}",
    )


def _monomial_exponents(m: int, degree: int) -> list[tuple[int, ...]]:
    from .lift import enumerate_basis

    return list(enumerate_basis(m, degree).exponents)


def _monomial_query(alpha: tuple[int, ...]) -> SQQuery:
    """phi(x, y) = y * prod_i clip(x_i, -R, R)^alpha_i / R^|alpha|."""
    touched = tuple(i for i, a in enumerate(alpha) if a)
    powers = tuple(alpha[i] for i in touched)
    deg = sum(alpha)
    m = len(alpha)
    dirs = np.zeros((len(touched), m))
    for row, i in enumerate(touched):
        dirs[row, i] = 1.0

    def evaluator(x, y):
        col = y.astype(float)
        for i, a in zip(touched, powers):
            col = col * np.clip(x[:, i], -CLIP_RADIUS, CLIP_RADIUS) ** a
        return col / CLIP_RADIUS**deg

    def proj_evaluator(t, y):
        col = y.astype(float)
        for row, a in enumerate(powers):
            col = col * np.clip(t[:, row], -CLIP_RADIUS, CLIP_RADIUS) ** a
        return col / CLIP_RADIUS**deg

    return SQQuery(
        evaluator=evaluator,
        description=f"y*x^{alpha}",
        directions=dirs,
        proj_evaluator=proj_evaluator,
    )


def learner_chow(oracle: SQOracle, basis_degree: int) -> Hypothesis:
    """Estimates the label-weighted moment of every monomial up to the
    given degree and thresholds the fitted linear functional.

    All interaction with the data goes through the oracle: one coefficient
    query per monomial, then one misclassification query per threshold
    candidate.  Candidates sweep the functional's guaranteed range
    [-sum|c|, sum|c|], whose extremes recover the constant hypotheses, so
    the learner never does worse than the better constant by more than
    query accuracy.
    """
    m = oracle.distribution.m
    exponents = _monomial_exponents(m, basis_degree)

    coeffs = np.empty(len(exponents))
    for i, alpha in enumerate(exponents):
        coeffs[i] = oracle.answer(_monomial_query(alpha))

    scale = float(np.sum(np.abs(coeffs))) + 1e-12  # |f(x)| <= scale pointwise

    def f_values(x: np.ndarray) -> np.ndarray:
        out = np.zeros(len(x))
        clipped = np.clip(x, -CLIP_RADIUS, CLIP_RADIUS)
        for c, alpha in zip(coeffs, exponents):
            if c == 0.0:
                continue
            col = np.full(len(x), c)
            for var, a in enumerate(alpha):
                if a:
                    col = col * clipped[:, var] ** a
            out += col / CLIP_RADIUS ** sum(alpha)
        return out

    best_theta, best_err = 0.0, math.inf
    for theta in np.linspace(-scale, scale, 9):
        err = oracle.answer(
            SQQuery(
                lambda x, y, theta=theta: (
                    np.where(f_values(x) - theta >= 0.0, 1, -1) != y
                ).astype(float),
                f"err(theta={theta:.4g})",
            )
        )
        if err < best_err:
            best_theta, best_err = theta, err

    return Hypothesis(
        predict=lambda x: np.where(f_values(x) - best_theta >= 0.0, 1, -1),
        description=f"chow degree<={basis_degree}, theta={best_theta:.4g}",
    )


# ------------------------------------------------------- experiment


@dataclass
class ExperimentReport:
    seed: int
    tau: float
    queries_used: int
    query_rows: list[dict]
    planted_gap: float
    max_moment_gap: float
    learner_errors: dict[str, float]
    nu: float
    rho: float
    alpha_chi: float
    N_bound: float
    c: float

    N_BOUND_CAVEAT = (
        "N_bound uses the direction-set exponent c^2 m/64 from the explicit "
        "pair bound; the generic lower bound only promises some Omega(m)."
    )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tau": self.tau,
            "queries_used": self.queries_used,
            "queries": self.query_rows,
            "gaps": {"planted": self.planted_gap, "moment_max": self.max_moment_gap},
            "learner_errors": self.learner_errors,
            "nu": self.nu,
            "rho": self.rho,
            "alpha_chi": self.alpha_chi,
            "N_bound": self.N_bound,
            "c": self.c,
            "n_bound_caveat": self.N_BOUND_CAVEAT,
        }


def _diagnostics(pair: HardPair, m: int, k: int = 12) -> tuple[float, float, float, float, float]:
    report = moments.moment_discrepancy_report(pair, k)
    nu = max(max(report.discrepancy_A[: k + 1]), max(report.discrepancy_B[: k + 1]))
    alpha_chi = (
        moments.chi_square_vs_gaussian(pair.A).closed_form
        + moments.chi_square_vs_gaussian(pair.B).closed_form
    )
    c = 1.0 / (144.0 * math.log(1.0 / pair.config.zeta) ** 2)
    rho = nu**2 + alpha_chi * c**k
    n_bound = math.exp(c**2 * m / 64.0) * rho / alpha_chi
    return nu, rho, alpha_chi, n_bound, c


def distinguishing_experiment(
    config,
    eta: float,
    m: int,
    oracle_config: OracleConfig,
    seed: int,
    n_directions: int = 20,
    direction_c: float = 0.3,
    moment_orders: tuple[int, ...] = (1, 2),
    learners: tuple[str, ...] = ("constant", "chow"),
    chow_degree: int = 2,
    holdout: int = 100_000,
) -> ExperimentReport:
    """Run the query battery on the planted and null distributions and
    train the baseline learners; one seed per call.

    The hidden direction and the probe directions come from one
    near-orthogonal set, so every probe satisfies |<u, v>| <= direction_c.
    Learners run on their own honest oracles; held-out errors use fresh
    samples, never oracle answers.
    """
    root = np.random.SeedSequence(seed)
    rng_dirs, rng_battery, rng_learn, rng_holdout = (
        np.random.default_rng(s) for s in root.spawn(4)
    )

    pair = build_hard_pair(config)
    vectors = near_orthogonal_set(m, direction_c, n_directions + 1, rng_dirs)
    v, directions = vectors[0], vectors[1:]
    instance = make_instance(pair, v, eta)
    dist_dv = InstanceDistribution(instance)
    dist_null = NullDistribution(m, 1.0 - eta)

    oracle_dv = SQOracle(dist_dv, oracle_config, rng_battery, null_reference=dist_null)
    oracle_null = SQOracle(dist_null, oracle_config, rng_battery, null_reference=dist_null)

    rows: list[dict] = []

    def run(query: SQQuery) -> float:
        ans_dv = oracle_dv.answer(query)
        ans_null = oracle_null.answer(query)
        rows.append(
            {
                "description": query.description,
                "answer_planted": ans_dv,
                "answer_null": ans_null,
                "true_planted": dist_dv.true_expectation(query),
                "true_null": dist_null.true_expectation(query),
                "gap": abs(ans_dv - ans_null),
            }
        )
        return abs(ans_dv - ans_null)

    planted_gap = run(projected_indicator_query(v, pair.J1))
    run(label_mean_query())
    max_moment_gap = 0.0
    for u in directions:
        for j in moment_orders:
            max_moment_gap = max(max_moment_gap, run(projected_moment_query(u, j)))

    learner_errors: dict[str, float] = {}
    x_hold, y_hold = sample_labeled(instance, rng_holdout, holdout)
    for name in learners:
        child = np.random.default_rng(root.spawn(1)[0])
        honest = OracleConfig(
            tau=oracle_config.tau,
            mode="honest",
            sample_constant=oracle_config.sample_constant,
            query_budget=oracle_config.query_budget,
        )
        oracle = SQOracle(dist_dv, honest, child, null_reference=dist_null)
        if name == "constant":
            hyp = learner_constant(oracle)
        elif name == "chow":
            hyp = learner_chow(oracle, chow_degree)
        else:
            raise RangeError(f"unknown learner {name!r}")
        learner_errors[name] = hyp.error(x_hold, y_hold)

    nu, rho, alpha_chi, n_bound, c = _diagnostics(pair, m)
    return ExperimentReport(
        seed=seed,
        tau=oracle_config.tau,
        queries_used=oracle_dv.queries_used + oracle_null.queries_used,
        query_rows=rows,
        planted_gap=planted_gap,
        max_moment_gap=max_moment_gap,
        learner_errors=learner_errors,
        nu=nu,
        rho=rho,
        alpha_chi=alpha_chi,
        N_bound=n_bound,
        c=c,
    )
