"""Bounded stochastic-process generators with analytically known ground truth.

Reproducibility: every path is drawn from a Philox counter-based generator
seeded with ``numpy.random.SeedSequence(seed)``, where ``seed`` is either a
plain integer or a ``(master_seed, replication_index)`` pair.  Replications
therefore use disjoint substreams and results are identical across platforms
and across serial/parallel execution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .mixing_bounds import MixingBudget

KINDS = ("iid_bounded", "hetero_mds", "finite_markov", "bernoulli_ar1")
IID_DISTS = ("bernoulli", "rademacher", "uniform")

# Tail contributions below this size are dropped when accumulating mixing
# coefficient sums for ergodic finite chains.
_PHI_TAIL_CUTOFF = 1e-15


@dataclass(frozen=True)
class ProcessSpec:
    """A named process with kind-specific parameters (JSON-serializable)."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        _validate_params(self.kind, self.params)

    def label(self) -> str:
        if self.kind == "iid_bounded":
            dist = self.params["dist"]
            if dist == "bernoulli":
                return f"iid_bernoulli(p={self.params['p']:g})"
            if dist == "uniform":
                return f"iid_uniform({self.params['a']:g},{self.params['b']:g})"
            return "iid_rademacher"
        if self.kind == "hetero_mds":
            return f"hetero_mds(K={len(self.params['scales'])})"
        if self.kind == "finite_markov":
            return f"finite_markov(states={len(self.params['h'])})"
        return "bernoulli_ar1"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise DomainError("process spec must be a mapping with a 'kind' field")
        return cls(kind=d["kind"], params=dict(d.get("params", {})))


def iid_bernoulli(p: float) -> ProcessSpec:
    return ProcessSpec("iid_bounded", {"dist": "bernoulli", "p": float(p)})


def iid_rademacher() -> ProcessSpec:
    return ProcessSpec("iid_bounded", {"dist": "rademacher"})


def iid_uniform(a: float, b: float) -> ProcessSpec:
    return ProcessSpec("iid_bounded", {"dist": "uniform", "a": float(a), "b": float(b)})


def hetero_mds(scales) -> ProcessSpec:
    """Bounded martingale differences Z_i = eps_i * s(i mod K) with
    independent sign flips eps_i and a fixed positive scale schedule s."""
    return ProcessSpec("hetero_mds", {"scales": [float(s) for s in scales]})


def finite_markov(transition, state_values) -> ProcessSpec:
    """Stationary ergodic finite chain emitting h(X_t) for state values h."""
    p = [[float(v) for v in row] for row in np.asarray(transition, dtype=float)]
    return ProcessSpec("finite_markov", {"P": p, "h": [float(v) for v in state_values]})


def bernoulli_ar1() -> ProcessSpec:
    """Dyadic AR(1): X_t = X_{t-1}/2 + eps_t/2 with Bernoulli(1/2) noise,
    started from its Uniform[0,1] stationary law."""
    return ProcessSpec("bernoulli_ar1", {})


def _validate_params(kind: str, params: dict) -> None:
    if kind == "iid_bounded":
        dist = params.get("dist")
        if dist not in IID_DISTS:
            raise DomainError(f"iid_bounded dist must be one of {IID_DISTS}, got {dist!r}")
        if dist == "bernoulli":
            p = params.get("p")
            if p is None or not (0.0 <= p <= 1.0):
                raise DomainError(f"bernoulli needs p in [0, 1], got {p!r}")
        if dist == "uniform":
            a, b = params.get("a"), params.get("b")
            if a is None or b is None or not (a < b):
                raise DomainError(f"uniform needs a < b, got a={a!r}, b={b!r}")
    elif kind == "hetero_mds":
        scales = params.get("scales")
        if not scales or any(s <= 0 for s in scales):
            raise DomainError("hetero_mds needs a nonempty list of positive scales")
    elif kind == "finite_markov":
        P = np.asarray(params.get("P"), dtype=float)
        h = params.get("h")
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise DomainError("P must be a square matrix")
        if h is None or len(h) != P.shape[0]:
            raise DomainError("h must list one value per state")
        _check_ergodic(P)


def _check_ergodic(P: np.ndarray) -> None:
    if np.any(P < -1e-12):
        raise DomainError("P must be elementwise nonnegative")
    rows = P.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > 1e-9):
        raise DomainError("P must be row-stochastic")
    s = P.shape[0]
    # Primitivity (irreducible + aperiodic) via Wielandt's exponent bound.
    power = np.linalg.matrix_power(P, (s - 1) ** 2 + 1)
    if np.any(power <= 0):
        raise DomainError("P must be ergodic (irreducible and aperiodic)")


def stationary_distribution(P) -> np.ndarray:
    """Stationary row vector pi of an ergodic chain via a least-squares solve."""
    P = np.asarray(P, dtype=float)
    _check_ergodic(P)
    s = P.shape[0]
    a = np.vstack([P.T - np.eye(s), np.ones((1, s))])
    b = np.zeros(s + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_long_run_variance(P, h) -> float:
    """Long-run variance Var_pi(h) + 2 sum_{k>=1} Cov_pi(h(X_0), h(X_k)).

    The covariance series is resolved exactly by the fundamental-matrix
    linear solve Z = (I - P + 1 pi)^{-1}: with h centered under pi,
    sum_{k>=1} P^k h_c = (Z - I) h_c.
    """
    P = np.asarray(P, dtype=float)
    h = np.asarray(h, dtype=float)
    pi = stationary_distribution(P)
    mu = float(pi @ h)
    hc = h - mu
    var = float(pi @ (hc * hc))
    s = P.shape[0]
    fundamental = np.linalg.inv(np.eye(s) - P + np.outer(np.ones(s), pi))
    tail = (fundamental - np.eye(s)) @ hc
    return var + 2.0 * float(pi @ (hc * tail))


def markov_phi_budget(P, n: int) -> MixingBudget:
    """Cumulative uniform-mixing budget Phi_n = sum_{k=1}^n phi(k) with
    phi(k) = max_x TV(P^k(x, .), pi) for a stationary ergodic finite chain.

    This TV quantity upper-bounds the mixing coefficient of the chain's
    natural filtration, hence provenance "analytic_bound".  Terms below
    1e-15 are dropped (the remaining geometric tail is negligible).
    """
    P = np.asarray(P, dtype=float)
    if n != int(n) or int(n) < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    pi = stationary_distribution(P)
    total = 0.0
    power = np.eye(P.shape[0])
    for _ in range(n):
        power = power @ P
        phi_k = 0.5 * float(np.max(np.abs(power - pi).sum(axis=1)))
        total += phi_k
        if phi_k < _PHI_TAIL_CUTOFF:
            break
    return MixingBudget(regime="phi", phi_sum=total, tv_norm=None, provenance="analytic_bound")


def bernoulli_ar1_budget(n: int) -> MixingBudget:
    """Conditional-CDF mixing budget of the dyadic AR(1): the lag-k
    coefficient is 2^{-k}, so Phi~_n = 1 - 2^{-n} <= 1.  The test function is
    the identity on [0, 1], whose TV norm is 1."""
    if n != int(n) or int(n) < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    phi_sum = 1.0 - 0.5**n
    return MixingBudget(
        regime="phi_tilde", phi_sum=phi_sum, tv_norm=1.0, provenance="analytic_bound"
    )


@dataclass(frozen=True)
class GroundTruth:
    """Analytic facts about a process: target mean, variances, bounds, and
    moments used by oracles and reports.  ``b_abs`` bounds ``|Z_i|``."""

    mu: float
    sigma2_marginal: float
    sigma2_longrun: float | None
    b_range: tuple[float, float]
    b_abs: float
    tv_norm: float | None
    m4: float | None

    @property
    def range_width(self) -> float:
        return self.b_range[1] - self.b_range[0]

    @property
    def b_centered(self) -> float:
        """Bound on |Z_i - mu| derived from the range."""
        return max(self.b_range[1] - self.mu, self.mu - self.b_range[0])


def ground_truth(spec: ProcessSpec) -> GroundTruth:
    kind, p = spec.kind, spec.params
    if kind == "iid_bounded":
        if p["dist"] == "bernoulli":
            q = p["p"]
            s2 = q * (1.0 - q)
            return GroundTruth(
                mu=q,
                sigma2_marginal=s2,
                sigma2_longrun=s2,
                b_range=(0.0, 1.0),
                b_abs=1.0,
                tv_norm=1.0,
                m4=q * (1.0 - q) * (1.0 - 3.0 * q + 3.0 * q * q),
            )
        if p["dist"] == "rademacher":
            return GroundTruth(
                mu=0.0,
                sigma2_marginal=1.0,
                sigma2_longrun=1.0,
                b_range=(-1.0, 1.0),
                b_abs=1.0,
                tv_norm=2.0,
                m4=1.0,
            )
        a, b = p["a"], p["b"]
        w = b - a
        return GroundTruth(
            mu=(a + b) / 2.0,
            sigma2_marginal=w * w / 12.0,
            sigma2_longrun=w * w / 12.0,
            b_range=(a, b),
            b_abs=max(abs(a), abs(b)),
            tv_norm=w,
            m4=w**4 / 80.0,
        )
    if kind == "hetero_mds":
        s = np.asarray(p["scales"], dtype=float)
        avg2 = float(np.mean(s * s))
        top = float(np.max(s))
        return GroundTruth(
            mu=0.0,
            sigma2_marginal=avg2,
            sigma2_longrun=avg2,
            b_range=(-top, top),
            b_abs=top,
            tv_norm=2.0 * top,
            m4=float(np.mean(s**4)),
        )
    if kind == "finite_markov":
        P = np.asarray(p["P"], dtype=float)
        h = np.asarray(p["h"], dtype=float)
        pi = stationary_distribution(P)
        mu = float(pi @ h)
        hc = h - mu
        return GroundTruth(
            mu=mu,
            sigma2_marginal=float(pi @ (hc * hc)),
            sigma2_longrun=markov_long_run_variance(P, h),
            b_range=(float(np.min(h)), float(np.max(h))),
            b_abs=float(np.max(np.abs(h))),
            tv_norm=float(np.max(h) - np.min(h)),
            m4=float(pi @ hc**4),
        )
    # bernoulli_ar1: stationary law is Uniform[0, 1]; AR coefficient 1/2
    # gives long-run variance (1/12) * (1 + 0.5) / (1 - 0.5) = 1/4.
    return GroundTruth(
        mu=0.5,
        sigma2_marginal=1.0 / 12.0,
        sigma2_longrun=0.25,
        b_range=(0.0, 1.0),
        b_abs=1.0,
        tv_norm=1.0,
        m4=1.0 / 80.0,
    )


def mixing_budget_for(spec: ProcessSpec, regime: str, n: int) -> MixingBudget | None:
    """Best available budget of the requested regime, or None when the
    process offers no valid bound for it."""
    if regime not in ("phi", "phi_tilde"):
        raise DomainError(f"regime must be 'phi' or 'phi_tilde', got {regime!r}")
    truth = ground_truth(spec)
    if spec.kind in ("iid_bounded", "hetero_mds"):
        # Independent coordinates: every mixing coefficient is exactly zero.
        return MixingBudget(regime=regime, phi_sum=0.0, tv_norm=truth.tv_norm, provenance="exact")
    if spec.kind == "finite_markov":
        base = markov_phi_budget(np.asarray(spec.params["P"], dtype=float), n)
        # The conditional-CDF coefficient never exceeds the uniform one, so
        # the same sum is a valid phi_tilde budget.
        return MixingBudget(
            regime=regime,
            phi_sum=base.phi_sum,
            tv_norm=truth.tv_norm,
            provenance="analytic_bound",
        )
    if spec.kind == "bernoulli_ar1":
        if regime == "phi":
            return None  # not uniformly mixing; only the weaker regime applies
        return bernoulli_ar1_budget(n)
    return None


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, (tuple, list)):
        entropy = tuple(int(v) for v in seed)
    else:
        entropy = int(seed)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _paths_from_uniforms(spec: ProcessSpec, u: np.ndarray) -> np.ndarray:
    """Map uniforms of shape (paths, n) to process values, one row per path."""
    kind, p = spec.kind, spec.params
    if kind == "iid_bounded":
        if p["dist"] == "bernoulli":
            return (u < p["p"]).astype(float)
        if p["dist"] == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        return p["a"] + (p["b"] - p["a"]) * u
    if kind == "hetero_mds":
        scales = np.asarray(p["scales"], dtype=float)
        pattern = scales[np.arange(u.shape[1]) % scales.size]
        return np.where(u < 0.5, -1.0, 1.0) * pattern
    if kind == "finite_markov":
        P = np.asarray(p["P"], dtype=float)
        h = np.asarray(p["h"], dtype=float)
        pi = stationary_distribution(P)
        cum_pi = np.cumsum(pi)
        cum_rows = np.cumsum(P, axis=1)
        cum_pi[-1] = 1.0  # guard the top bin against rounding undershoot
        cum_rows[:, -1] = 1.0
        n_paths, n = u.shape
        states = np.empty((n_paths, n), dtype=np.int64)
        states[:, 0] = (cum_pi[None, :] <= u[:, 0:1]).sum(axis=1)
        for t in range(1, n):
            states[:, t] = (cum_rows[states[:, t - 1]] <= u[:, t : t + 1]).sum(axis=1)
        return h[states]
    # bernoulli_ar1
    n_paths, n = u.shape
    x = np.empty((n_paths, n), dtype=float)
    x[:, 0] = u[:, 0]
    for t in range(1, n):
        x[:, t] = 0.5 * x[:, t - 1] + 0.5 * (u[:, t] < 0.5)
    return x


def simulate(spec: ProcessSpec, n: int, seed) -> tuple[np.ndarray, GroundTruth]:
    """Draw one length-n path; deterministic given (spec, n, seed).

    ``seed`` may be an int or a ``(master_seed, replication_index)`` pair;
    the pair form draws from the same substream the Monte Carlo harness uses
    for that replication.
    """
    if n != int(n) or int(n) < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    u = _generator(seed).random((1, n))
    values = _paths_from_uniforms(spec, u)[0]
    return values, ground_truth(spec)


def simulate_paths(spec: ProcessSpec, n: int, master_seed: int, indices) -> np.ndarray:
    """Draw len(indices) paths, one per replication substream, shape (r, n)."""
    if n != int(n) or int(n) < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    idx = list(indices)
    u = np.empty((len(idx), n), dtype=float)
    for row, i in enumerate(idx):
        u[row] = _generator((master_seed, i)).random(n)
    return _paths_from_uniforms(spec, u)
