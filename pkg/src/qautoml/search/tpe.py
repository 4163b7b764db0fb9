"""Tree-structured Parzen estimator suggestions.

Completed trials are split at the ``gamma`` loss quantile into a good and a bad
set. Each parameter gets an independent density per set: a mixture of
truncated Gaussians at the observed (internal-scale) values for numeric
parameters, add-one smoothed frequencies for categorical ones. Candidates are
drawn from the good densities, walking the conditional tree top-down, and the
candidate with the largest good/bad density ratio over its active parameters
wins.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .space import Param, SearchSpace

N_STARTUP = 10
GAMMA = 0.25
N_CANDIDATES = 24


class ParzenNumeric:
    def __init__(self, p: Param, observations):
        self.lo, self.hi = p.internal_bounds()
        if p.kind == "INT_UNIFORM":
            self.lo -= 0.5
            self.hi += 0.5
        self.mus = np.asarray(observations, dtype=float)
        span = self.hi - self.lo
        n = self.mus.size
        self.sigma = max(span / math.sqrt(n), 1e-3 * span) if n else span
        if n:
            a = (self.lo - self.mus) / self.sigma
            b = (self.hi - self.mus) / self.sigma
            self.cdf_lo = ndtr(a)
            self.mass = np.maximum(ndtr(b) - self.cdf_lo, 1e-300)

    def sample(self, rng) -> float:
        if self.mus.size == 0:
            return float(rng.uniform(self.lo, self.hi))
        k = int(rng.integers(self.mus.size))
        u = self.cdf_lo[k] + rng.uniform() * self.mass[k]
        x = self.mus[k] + self.sigma * ndtri(min(max(u, 1e-300), 1 - 1e-16))
        return float(min(max(x, self.lo), self.hi))

    def log_density(self, x: float) -> float:
        if self.mus.size == 0:
            return -math.log(self.hi - self.lo)
        z = (x - self.mus) / self.sigma
        comp = np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi) * self.mass)
        return math.log(max(float(np.mean(comp)), 1e-300))


class ParzenCategorical:
    def __init__(self, p: Param, observations):
        counts = np.array([sum(1 for o in observations if o == opt) for opt in p.options], dtype=float)
        self.options = p.options
        self.weights = (counts + 1.0) / (counts.sum() + len(p.options))

    def sample(self, rng):
        return self.options[int(rng.choice(len(self.options), p=self.weights))]

    def log_density(self, value) -> float:
        return math.log(self.weights[self.options.index(value)])


def _density(p: Param, configs):
    obs = [c[p.id] for c in configs if p.id in c]
    if p.kind == "CATEGORICAL":
        return ParzenCategorical(p, obs)
    return ParzenNumeric(p, [p.to_internal(v) for v in obs])


def split_good_bad(losses, gamma: float = GAMMA):
    """Indices of the good and bad sets (stable by trial order on ties)."""
    losses = np.asarray(losses, dtype=float)
    order = np.argsort(losses, kind="stable")
    n_good = max(1, int(math.ceil(gamma * losses.size)))
    return order[:n_good], order[n_good:]


def tpe_suggest(
    space: SearchSpace,
    history,
    rng,
    n_startup: int = N_STARTUP,
    gamma: float = GAMMA,
    n_candidates: int = N_CANDIDATES,
) -> dict:
    ok = [t for t in history if t.status == "OK" and math.isfinite(t.loss)]
    if len(ok) < n_startup:
        return space.sample_random(rng)
    losses = np.array([t.loss for t in ok])
    if np.all(losses == losses[0]):
        return space.sample_random(rng)
    good_idx, bad_idx = split_good_bad(losses, gamma)
    good = [ok[i].config for i in good_idx]
    bad = [ok[i].config for i in bad_idx]
    l_dens = {p.id: _density(p, good) for p in space}
    g_dens = {p.id: _density(p, bad) for p in space}

    best, best_score = None, -math.inf
    for _ in range(n_candidates):
        cand: dict = {}
        score = 0.0
        for p in space:
            if not space.is_active(p, cand):
                continue
            raw = l_dens[p.id].sample(rng)
            value = raw if p.kind == "CATEGORICAL" else p.from_internal(raw)
            cand[p.id] = value
            x = value if p.kind == "CATEGORICAL" else p.to_internal(value)
            score += l_dens[p.id].log_density(x) - g_dens[p.id].log_density(x)
        if score > best_score:
            best, best_score = cand, score
    return best
