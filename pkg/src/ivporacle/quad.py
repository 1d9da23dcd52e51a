"""Integral oracles for vector integrands on the unit interval.

Three oracle kinds estimate ``int_0^1 g(u) du`` for integrands from the
class with ``r`` derivatives and a ``rho``-Holder top derivative:

``deterministic``
    Composite interpolatory (Gauss) quadrature sized so the worst-case error
    over the class is at most ``eps1``; query budget grows like
    ``eps1 ** (-1 / (r + rho))``.

``randomized``
    A control-variate Monte Carlo scheme: the exact integral of a piecewise
    interpolant of ``g`` plus a plain Monte Carlo average of the interpolation
    residual.  Unbiased, with RMS error at most ``eps1 / 2`` on the class, so
    a single run lands within ``eps1`` with probability at least 3/4
    (Chebyshev).  Budget grows like ``eps1 ** (-1 / (r + rho + 1/2))``.

``quantum_sim``
    A statistical stand-in for a quantum integration device.  It computes a
    high-accuracy internal reference value and then emits, independently per
    component, the reference plus uniform noise within ``eps1`` (probability
    3/4) or a disjoint outlier band up to ``10 eps1`` (probability 1/4).
    Queries are charged at the modeled budget
    ``ceil(cost_constant * eps1 ** (-1 / (r + rho + 1)))``, not at the
    internal node count.

All oracles are deterministic functions of ``(g, config)``; the randomized
kinds draw from a generator seeded by ``config.seed``.  Integrands are
callables mapping a float array of shape ``(m,)`` to values of shape
``(m,)`` or ``(dim, m)``.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolationError

__all__ = [
    "KINDS",
    "IntegralEstimate",
    "OracleConfig",
    "integrate_deterministic",
    "integrate_randomized",
    "integrate_quantum_sim",
    "integrate_reference",
    "quantum_reference",
    "boost_median",
    "repetitions_for",
    "derive_seed",
]

KINDS = ("deterministic", "randomized", "quantum_sim")

#: Node count of the simulated-quantum internal reference, per component.
QUANTUM_REFERENCE_NODES = 10_000


@dataclasses.dataclass(frozen=True)
class IntegralEstimate:
    """One oracle output: the estimate, its price, and its target accuracy."""

    value: np.ndarray
    queries: int
    kind: str
    target_eps: float

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.value, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "value", v)
        if self.queries < 0:
            raise ContractViolationError("queries must be non-negative")
        if self.kind not in KINDS:
            raise ContractViolationError(f"kind must be one of {KINDS}, got {self.kind!r}")


@dataclasses.dataclass(frozen=True)
class OracleConfig:
    """Configuration shared by all oracle kinds.

    ``smoothness`` is the ``(r, rho)`` pair of the integrand class;
    ``eps1`` the per-call accuracy target; ``seed`` a non-negative 64-bit
    base seed (ignored by the deterministic kind); ``cost_constant`` the
    multiplier in every query-budget formula.
    """

    kind: str
    eps1: float
    smoothness: tuple[int, float]
    seed: int = 0
    cost_constant: float = 4.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.eps1 > 0:
            raise ContractViolationError("eps1 must be positive")
        r, rho = self.smoothness
        if not isinstance(r, int) or r < 0:
            raise ContractViolationError("smoothness r must be a non-negative integer")
        if not 0.0 < rho <= 1.0:
            raise ContractViolationError("smoothness rho must lie in (0, 1]")
        if r == 0 and rho != 1.0:
            raise ContractViolationError("r = 0 requires rho = 1")
        object.__setattr__(self, "smoothness", (r, float(rho)))
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ContractViolationError("seed must be a non-negative 64-bit integer")
        if not self.cost_constant > 0:
            raise ContractViolationError("cost_constant must be positive")


def _eval(g, u: np.ndarray) -> np.ndarray:
    """Evaluate an integrand on a batch, normalizing the result to (dim, m)."""
    out = np.asarray(g(np.asarray(u, dtype=float)), dtype=float)
    if out.ndim == 1:
        out = out[None, :]
    return out


@functools.lru_cache(maxsize=None)
def _gauss_rule(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [0, 1]; weights sum to 1."""
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1.0) / 2.0, w / 2.0


@functools.lru_cache(maxsize=None)
def _vandermonde_inv(q: int) -> np.ndarray:
    """Inverse Vandermonde on the q-point Gauss nodes of [0, 1].

    Maps node values to monomial coefficients of the local interpolant.
    """
    nodes, _ = _gauss_rule(q)
    v = np.vander(nodes, q, increasing=True)
    return np.linalg.inv(v)


def _panel_values(g, panels: int, q: int) -> np.ndarray:
    """Evaluate ``g`` on all panel Gauss nodes; shape (dim, panels, q)."""
    nodes_ref, _ = _gauss_rule(q)
    starts = np.arange(panels, dtype=float)
    nodes = ((starts[:, None] + nodes_ref[None, :]) / panels).reshape(-1)
    vals = _eval(g, nodes)
    return vals.reshape(vals.shape[0], panels, q)


def _panel_gauss(g, panels: int, q: int) -> np.ndarray:
    vals = _panel_values(g, panels, q)
    _, w_ref = _gauss_rule(q)
    return np.einsum("dpq,q->d", vals, w_ref) / panels


def integrate_reference(g, tol: float = 1e-12, max_panels: int = 4096) -> np.ndarray:
    """High-accuracy reference integral by panel-doubling composite Gauss.

    Doubles the panel count of a 16-point rule until two successive levels
    agree to ``tol`` in the max norm.  For analytic integrands this converges
    within a few levels; if ``max_panels`` is reached the finest estimate is
    returned as-is.
    """
    prev = _panel_gauss(g, 8, 16)
    panels = 16
    while panels <= max_panels:
        cur = _panel_gauss(g, panels, 16)
        if np.max(np.abs(cur - prev)) <= tol:
            return cur
        prev = cur
        panels *= 2
    return prev


def quantum_reference(g, dim: Optional[int] = None) -> np.ndarray:
    """Internal reference of the simulated-quantum oracle.

    Composite 10-point Gauss with exactly ``QUANTUM_REFERENCE_NODES * dim``
    nodes.  Exposed so a caller integrating the same ``g`` repeatedly (for
    boosting) can compute the reference once and pass it back in.
    """
    if dim is None:
        dim = getattr(g, "dim", None)
    if dim is None:
        dim = _eval(g, np.array([0.5])).shape[0]
    panels = (QUANTUM_REFERENCE_NODES * dim) // 10
    return _panel_gauss(g, panels, 10)


def _budget(cfg: OracleConfig, exponent_shift: float) -> int:
    r, rho = cfg.smoothness
    return math.ceil(cfg.cost_constant * cfg.eps1 ** (-1.0 / (r + rho + exponent_shift)))


def integrate_deterministic(g, cfg: OracleConfig) -> IntegralEstimate:
    """Composite Gauss quadrature sized to the class budget.

    Uses ``r + 1`` nodes per panel (exact for piecewise polynomials of
    degree ``r`` and beyond), with the panel count chosen so total queries
    stay within ``ceil(cost_constant * eps1 ** (-1/(r+rho)))``.
    """
    if cfg.kind != "deterministic":
        raise ContractViolationError(f"config kind {cfg.kind!r} does not match oracle")
    r, _ = cfg.smoothness
    q = r + 1
    budget = _budget(cfg, 0.0)
    panels = max(1, budget // q)
    value = _panel_gauss(g, panels, q)
    return IntegralEstimate(value=value, queries=panels * q, kind=cfg.kind, target_eps=cfg.eps1)


def integrate_randomized(g, cfg: OracleConfig) -> IntegralEstimate:
    """Control-variate Monte Carlo estimate.

    Splits the budget between a piecewise degree-``r`` interpolant of ``g``
    (integrated exactly) and uniform samples of the residual ``g - P``.  The
    estimator is unbiased; the interpolant reproduces polynomials of degree
    at most ``r`` exactly, so such integrands are computed to rounding error
    regardless of the seed.
    """
    if cfg.kind != "randomized":
        raise ContractViolationError(f"config kind {cfg.kind!r} does not match oracle")
    r, _ = cfg.smoothness
    q = r + 1
    budget = _budget(cfg, 0.5)
    panels = max(1, budget // (2 * q))
    nsamples = max(1, budget - panels * q)

    vals = _panel_values(g, panels, q)
    _, w_ref = _gauss_rule(q)
    det_part = np.einsum("dpq,q->d", vals, w_ref) / panels

    rng = np.random.default_rng(int(cfg.seed))
    u = rng.random(nsamples)
    idx = np.minimum((u * panels).astype(int), panels - 1)
    xi = u * panels - idx
    coeffs = np.einsum("pq,dkq->dkp", _vandermonde_inv(q), vals)
    local = coeffs[:, idx, :]  # (dim, nsamples, q)
    p_at_u = local[:, :, q - 1]
    for k in range(q - 2, -1, -1):
        p_at_u = p_at_u * xi + local[:, :, k]
    residual_mean = np.mean(_eval(g, u) - p_at_u, axis=1)
    return IntegralEstimate(value=det_part + residual_mean, queries=panels * q + nsamples,
                            kind=cfg.kind, target_eps=cfg.eps1)


def integrate_quantum_sim(g, cfg: OracleConfig, reference: Optional[np.ndarray] = None) -> IntegralEstimate:
    """Simulated quantum integral oracle.

    Emits, independently per component, ``reference + noise`` where the noise
    is uniform in ``[-eps1, eps1]`` with probability 3/4 and uniform over the
    outlier band ``[-10 eps1, -eps1) u (eps1, 10 eps1]`` otherwise, so a
    single call succeeds at the advertised 3/4 rate and boosting has genuine
    outliers to suppress.  ``reference`` short-circuits the internal
    quadrature when the caller already holds it; queries are always charged
    at the modeled budget.
    """
    if cfg.kind != "quantum_sim":
        raise ContractViolationError(f"config kind {cfg.kind!r} does not match oracle")
    budget = _budget(cfg, 1.0)
    if reference is None:
        base = g.detached() if hasattr(g, "detached") else g
        reference = quantum_reference(base)
    reference = np.atleast_1d(np.asarray(reference, dtype=float))
    rng = np.random.default_rng(int(cfg.seed))
    eps = cfg.eps1
    value = np.empty_like(reference)
    for j in range(reference.shape[0]):
        if rng.random() < 0.75:
            noise = rng.uniform(-eps, eps)
        else:
            magnitude = rng.uniform(eps, 10.0 * eps)
            noise = magnitude if rng.random() < 0.5 else -magnitude
        value[j] = reference[j] + noise
    return IntegralEstimate(value=value, queries=budget, kind=cfg.kind, target_eps=cfg.eps1)


def boost_median(run: Callable[[int], IntegralEstimate], k: int) -> IntegralEstimate:
    """Boost a probabilistic estimator by a componentwise median of ``k`` runs.

    ``run(j)`` must produce the ``j``-th independent estimate (callers derive
    per-run seeds from ``j``).  Runs execute and merge in index order, so the
    result does not depend on scheduling.  ``k = 1`` returns the single run
    unchanged.
    """
    if not isinstance(k, int) or k < 1:
        raise ContractViolationError(f"k must be a positive integer, got {k}")
    estimates = [run(j) for j in range(k)]
    first = estimates[0]
    if k == 1:
        return first
    stacked = np.stack([e.value for e in estimates])
    return IntegralEstimate(
        value=np.median(stacked, axis=0),
        queries=sum(e.queries for e in estimates),
        kind=first.kind,
        target_eps=first.target_eps,
    )


def repetitions_for(delta: float, n: int, c: float = 3.0) -> int:
    """Median repetitions for per-step success level ``(1 - delta)^(1/n)``.

    ``k = max(1, ceil(c * log2(1 / (1 - (1 - delta)^(1/n)))))``; the failure
    level per boosted call is split evenly (in probability) over the ``n``
    steps of a solve.  Requires ``0 < delta < 1/2``.
    """
    if not 0.0 < delta < 0.5:
        raise ContractViolationError(f"delta must lie in (0, 1/2), got {delta}")
    if not isinstance(n, int) or n < 1:
        raise ContractViolationError(f"n must be a positive integer, got {n}")
    if not c > 0:
        raise ContractViolationError(f"c must be positive, got {c}")
    per_step_failure = 1.0 - (1.0 - delta) ** (1.0 / n)
    return max(1, math.ceil(c * math.log2(1.0 / per_step_failure)))


def derive_seed(base: int, *path: int) -> int:
    """Fold a base seed and an integer path into a fresh 64-bit seed.

    Deterministic and collision-resistant; used to give every (step,
    repetition) pair its own independent stream.
    """
    ss = np.random.SeedSequence([int(base)] + [int(p) for p in path])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
