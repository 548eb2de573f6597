"""Domain model for weighted voting games with group-chosen weight-allocation rules.

Conventions used throughout the package:

- A group's vote margin theta lies in [-1, 1] (share for +1 minus share for -1).
- A rule maps theta to a weight margin in [-1, 1] and is odd and non-decreasing.
- sgn(0) = 0 inside rule evaluation: winner-take-all at theta = 0 splits the
  weight half-half, which preserves oddness on grids that hit 0 exactly.
- The collective decision is sgn of the weighted sum of margins; an exact tie
  is broken by a fair coin supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox


class ConfigError(ValueError):
    """A rule, profile, or distribution parameter is out of its valid range."""


class UnsupportedMethodError(RuntimeError):
    """The requested computation does not support the given inputs."""


class AccuracyError(RuntimeError):
    """A numeric method cannot reach its accuracy contract at the given settings."""


# ---------------------------------------------------------------------------
# groups and games


@dataclass(frozen=True)
class GroupSpec:
    """One voting group: a label, a positive weight, an optional population."""

    name: str
    weight: float
    population: Optional[float] = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("group name must be non-empty")
        if not (self.weight > 0):
            raise ConfigError(f"group {self.name!r}: weight must be > 0, got {self.weight}")
        if self.population is not None and not (self.population > 0):
            raise ConfigError(f"group {self.name!r}: population must be > 0, got {self.population}")


@dataclass(frozen=True)
class Game:
    """An ordered collection of groups with unique names."""

    groups: tuple[GroupSpec, ...]

    def __post_init__(self):
        if len(self.groups) < 1:
            raise ConfigError("a game needs at least one group")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ConfigError("group names must be unique")

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.groups)

    @property
    def weights(self) -> np.ndarray:
        return np.array([g.weight for g in self.groups], dtype=float)

    @property
    def total_weight(self) -> float:
        return float(sum(g.weight for g in self.groups))

    @property
    def populations(self) -> Optional[np.ndarray]:
        """Population vector, or None unless every group carries one."""
        pops = [g.population for g in self.groups]
        if any(p is None for p in pops):
            return None
        return np.array(pops, dtype=float)

    @property
    def has_dictator(self) -> bool:
        """True iff some group holds at least half the total weight."""
        return bool(max(g.weight for g in self.groups) >= 0.5 * self.total_weight)


def make_game(names: Sequence[str], weights: Sequence[float],
              populations: Optional[Sequence[float]] = None) -> Game:
    """Convenience constructor from parallel sequences."""
    if populations is None:
        populations = [None] * len(names)
    if not (len(names) == len(weights) == len(populations)):
        raise ValueError("names, weights, populations must have equal length")
    return Game(tuple(GroupSpec(n, float(w), None if p is None else float(p))
                      for n, w, p in zip(names, weights, populations)))


# ---------------------------------------------------------------------------
# rules

def _check_theta(theta):
    arr = np.asarray(theta, dtype=float)
    if np.any(arr < -1) or np.any(arr > 1):
        raise ValueError("vote margin outside [-1, 1]")
    return arr


@dataclass(frozen=True)
class Rule:
    """Base class: an odd, non-decreasing map from vote margin to weight margin."""

    def __call__(self, theta):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Interior discontinuities in (0, 1), for quadrature splitting."""
        return ()

    def sign_linear_coeffs(self) -> Optional[tuple[float, float]]:
        """(alpha, beta) with phi(theta) = alpha*sgn(theta) + beta*theta, or None."""
        return None

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class WTA(Rule):
    """Winner-take-all: the whole weight goes to the group's majority side."""

    def __call__(self, theta):
        return np.sign(theta)

    def sign_linear_coeffs(self):
        return (1.0, 0.0)


@dataclass(frozen=True)
class PR(Rule):
    """Proportional: the weight margin equals the vote margin."""

    def __call__(self, theta):
        return np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta)

    def sign_linear_coeffs(self):
        return (0.0, 1.0)


@dataclass(frozen=True)
class Mixed(Rule):
    """Fixed share `a` of the weight by winner-take-all, the rest proportionally."""

    a: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0):
            raise ConfigError(f"mixed rule share must be in [0, 1], got {self.a}")

    def __call__(self, theta):
        return self.a * np.sign(theta) + (1.0 - self.a) * np.asarray(theta, dtype=float)

    def sign_linear_coeffs(self):
        return (self.a, 1.0 - self.a)


@dataclass(frozen=True)
class CD(Rule):
    """District-style rule: a fixed amount `c` of this group's weight by
    winner-take-all, the remaining weight proportionally."""

    c: float
    weight: float

    def __post_init__(self):
        if not (0.0 < self.c <= self.weight):
            raise ConfigError(
                f"district amount must be in (0, weight], got c={self.c}, weight={self.weight}")

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        return (self.c * np.sign(t) + (self.weight - self.c) * t) / self.weight

    def sign_linear_coeffs(self):
        return (self.c / self.weight, (self.weight - self.c) / self.weight)


@dataclass(frozen=True)
class GP(Rule):
    """Scaled proportional rule phi(theta) = lam * theta."""

    lam: float

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigError(f"proportional coefficient must be in [0, 1], got {self.lam}")

    def __call__(self, theta):
        return self.lam * np.asarray(theta, dtype=float)

    def sign_linear_coeffs(self):
        return (0.0, self.lam)

    @property
    def is_zero(self) -> bool:
        return self.lam == 0.0


@dataclass(frozen=True)
class Zero(Rule):
    """Degenerate rule: always split the weight half-half."""

    def __call__(self, theta):
        return np.zeros_like(np.asarray(theta, dtype=float)) if np.ndim(theta) else 0.0

    def sign_linear_coeffs(self):
        return (0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return True


@dataclass(frozen=True)
class Step(Rule):
    """Odd piecewise-constant rule given by (threshold, value) pairs on (0, 1].

    For theta > 0, phi(theta) is the value attached to the largest threshold
    <= theta (0 below the first threshold); negative margins mirror.
    """

    table: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.table:
            raise ConfigError("step rule needs at least one (threshold, value) pair")
        ts = [t for t, _ in self.table]
        vs = [v for _, v in self.table]
        if any(not (0.0 <= t <= 1.0) for t in ts) or sorted(set(ts)) != ts:
            raise ConfigError("step thresholds must be strictly increasing within [0, 1]")
        if any(not (0.0 <= v <= 1.0) for v in vs) or sorted(vs) != vs:
            raise ConfigError("step values must be non-decreasing within [0, 1]")

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        ts = np.array([p[0] for p in self.table])
        vs = np.array([p[1] for p in self.table])
        idx = np.searchsorted(ts, np.abs(t), side="right") - 1
        mag = np.where(idx >= 0, vs[np.clip(idx, 0, len(vs) - 1)], 0.0)
        out = np.sign(t) * mag
        return out if np.ndim(theta) else float(out)

    def breakpoints(self):
        return tuple(t for t, _ in self.table if 0.0 < t < 1.0)


def eval_rule(rule: Rule, theta):
    """Evaluate a rule at margin(s) theta, validating the domain."""
    arr = _check_theta(theta)
    out = rule(arr)
    return out if np.ndim(theta) else float(out)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """One rule per group, aligned with the game's group order."""

    rules: tuple[Rule, ...]

    def __post_init__(self):
        if not self.rules:
            raise ConfigError("a profile needs at least one rule")

    @property
    def n(self) -> int:
        return len(self.rules)

    @property
    def is_symmetric(self) -> bool:
        return all(r == self.rules[0] for r in self.rules)

    @staticmethod
    def symmetric(rule: Rule, n: int) -> "Profile":
        return Profile((rule,) * n)

    @staticmethod
    def wta(n: int) -> "Profile":
        return Profile.symmetric(WTA(), n)

    @staticmethod
    def pr(n: int) -> "Profile":
        return Profile.symmetric(PR(), n)

    @staticmethod
    def zero(n: int) -> "Profile":
        return Profile.symmetric(Zero(), n)

    @staticmethod
    def mixed(a: float, n: int) -> "Profile":
        return Profile.symmetric(Mixed(a), n)

    @staticmethod
    def cd(c: float, game: Game) -> "Profile":
        """District profile: each group i plays CD(c, w_i); requires c <= min weight."""
        wmin = min(g.weight for g in game.groups)
        if not (0.0 < c <= wmin):
            raise ConfigError(f"district amount must be in (0, min weight], got c={c}, min={wmin}")
        return Profile(tuple(CD(c, g.weight) for g in game.groups))

    @staticmethod
    def gp(lams: Sequence[float]) -> "Profile":
        return Profile(tuple(GP(float(l)) for l in lams))

    def weighted_sign_linear_coeffs(self, game: Game) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """Vectors (A, B) with w_i*phi_i(theta) = A_i*sgn(theta) + B_i*theta, or None
        if some rule is not of that form (step rules)."""
        if self.n != game.n:
            raise ValueError("profile/game size mismatch")
        a = np.empty(self.n)
        b = np.empty(self.n)
        w = game.weights
        for i, r in enumerate(self.rules):
            cs = r.sign_linear_coeffs()
            if cs is None:
                return None
            a[i] = w[i] * cs[0]
            b[i] = w[i] * cs[1]
        return a, b

    def margins(self, theta: np.ndarray) -> np.ndarray:
        """Apply each group's rule to its margin column; theta is (..., n)."""
        t = np.asarray(theta, dtype=float)
        out = np.empty_like(t)
        for i, r in enumerate(self.rules):
            out[..., i] = r(t[..., i])
        return out


def decide(game: Game, profile: Profile, theta, tie_rng: Optional[Generator] = None) -> int:
    """Collective decision for one margin vector: sgn of the weighted margin sum.

    An exact tie is broken by a fair coin from `tie_rng`.
    """
    t = _check_theta(theta)
    if t.shape != (game.n,) or profile.n != game.n:
        raise ValueError(f"expected margin vector of length {game.n}")
    s = float(np.dot(game.weights, profile.margins(t)))
    if s > 0:
        return 1
    if s < 0:
        return -1
    if tie_rng is None:
        raise ValueError("tie occurred but no coin source was provided")
    return 1 if tie_rng.random() < 0.5 else -1


# ---------------------------------------------------------------------------
# margin distributions


@dataclass(frozen=True)
class DistributionMoments:
    """First absolute and second moments of the symmetric margin marginal."""

    mean_abs: float
    mean_sq: float


@dataclass(frozen=True)
class UniformIID:
    """Margins iid uniform on [-1, 1]."""

    is_iid = True

    def sample(self, rng: Generator, shape) -> np.ndarray:
        x = rng.random(shape)
        x *= 2.0
        x -= 1.0
        return x

    def moments(self) -> DistributionMoments:
        return DistributionMoments(0.5, 1.0 / 3.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + 1.0) / 2.0, 0.0, 1.0)

    def atoms(self):
        return None

    def grid_cells(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Midpoints and probabilities of m equal-mass cells."""
        mid = (np.arange(m) + 0.5) / m * 2.0 - 1.0
        return mid, np.full(m, 1.0 / m)


@dataclass(frozen=True)
class TwoAtomIID:
    """Margins iid on {-m, +m}, each with probability 1/2."""

    m: float = 0.5
    is_iid = True

    def __post_init__(self):
        if not (0.0 < self.m <= 1.0):
            raise ConfigError(f"atom magnitude must be in (0, 1], got {self.m}")

    def sample(self, rng: Generator, shape) -> np.ndarray:
        return np.where(rng.random(shape) < 0.5, -self.m, self.m)

    def moments(self) -> DistributionMoments:
        return DistributionMoments(self.m, self.m * self.m)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([-self.m, self.m]), np.array([0.5, 0.5])

    def grid_cells(self, m: int):
        return self.atoms()


@dataclass(frozen=True)
class DiscreteSymmetricIID:
    """Margins iid on a finite symmetric grid with symmetric probabilities."""

    values: tuple[float, ...]
    probs: tuple[float, ...]
    is_iid = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.shape != p.shape or v.size == 0:
            raise ConfigError("values and probs must be non-empty and of equal length")
        if np.any(np.abs(v) > 1) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ConfigError("support must lie in [-1, 1] and probs must sum to 1")
        pmf = {}
        for vi, pi in zip(v, p):
            pmf[round(float(vi), 12)] = pmf.get(round(float(vi), 12), 0.0) + float(pi)
        for vi, pi in pmf.items():
            if abs(pmf.get(round(-vi, 12), 0.0) - pi) > 1e-9:
                raise ConfigError("probability mass must be symmetric about 0")

    def sample(self, rng: Generator, shape) -> np.ndarray:
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        idx = rng.choice(len(v), size=shape, p=p / p.sum())
        return v[idx]

    def moments(self) -> DistributionMoments:
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        return DistributionMoments(float(np.dot(p, np.abs(v))), float(np.dot(p, v * v)))

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.values, dtype=float), np.asarray(self.probs, dtype=float)

    def grid_cells(self, m: int):
        return self.atoms()


@dataclass(frozen=True)
class OneFactor:
    """Correlated margins: a common fair sign S and iid draws Z_i from the
    marginal, combined as Theta_i = rho*S*|Z_i| + (1-rho)*Z_i.

    rho = 0 recovers the iid marginal exactly.
    """

    marginal: UniformIID | TwoAtomIID | DiscreteSymmetricIID = field(default_factory=UniformIID)
    rho: float = 0.0
    is_iid = False

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError(f"mixing weight must be in [0, 1], got {self.rho}")

    def sample(self, rng: Generator, shape) -> np.ndarray:
        z = self.marginal.sample(rng, shape)
        if self.rho == 0.0:
            return z
        # one common sign per joint draw: the last axis indexes groups
        sign_shape = shape[:-1] + (1,) if isinstance(shape, tuple) else ()
        s = np.where(rng.random(sign_shape) < 0.5, -1.0, 1.0)
        return np.clip(self.rho * s * np.abs(z) + (1.0 - self.rho) * z, -1.0, 1.0)

    def moments(self) -> DistributionMoments:
        base = self.marginal.moments()
        r = self.rho
        # |Theta| = |Z| on the matching-sign half, |1-2r||Z| on the other
        mean_abs = base.mean_abs * (1.0 + abs(1.0 - 2.0 * r)) / 2.0
        mean_sq = (r * r + (1.0 - r) ** 2) * base.mean_sq
        return DistributionMoments(mean_abs, mean_sq)


MarginDistribution = UniformIID | TwoAtomIID | DiscreteSymmetricIID | OneFactor


def moments(dist: MarginDistribution) -> DistributionMoments:
    """(E|Theta|, E[Theta^2]) of the margin marginal."""
    return dist.moments()


# ---------------------------------------------------------------------------
# deterministic streams

_TIE_JUMP = 1  # tie coins live one Philox jump away from the margin stream


def stream(seed: int, index: int) -> Generator:
    """Independent counter-based random stream for (seed, stream index)."""
    if not (0 <= seed < 2 ** 64 and 0 <= index < 2 ** 64):
        raise ValueError("seed and stream index must be 64-bit non-negative integers")
    return Generator(Philox(key=(seed << 64) | index))


def tie_stream(seed: int, index: int, slot: int = 0) -> Generator:
    """Coin-flip stream paired with stream(seed, index), one per consumer slot."""
    bg = Philox(key=(seed << 64) | index)
    return Generator(bg.jumped(_TIE_JUMP + slot))


def sample_margins(dist: MarginDistribution, n: int, rng: Generator) -> np.ndarray:
    """Draw one margin vector of length n from the joint distribution."""
    if n < 1:
        raise ValueError("need at least one group")
    return dist.sample(rng, (1, n))[0] if isinstance(dist, OneFactor) else dist.sample(rng, (n,))


def sgn(x):
    """Sign with sgn(0) = 0, matching the rule-evaluation convention."""
    return np.sign(x)


__all__ = [
    "AccuracyError", "CD", "ConfigError", "DiscreteSymmetricIID", "DistributionMoments",
    "GP", "Game", "GroupSpec", "MarginDistribution", "Mixed", "OneFactor", "PR", "Profile",
    "Rule", "Step", "TwoAtomIID", "UniformIID", "UnsupportedMethodError", "WTA", "Zero",
    "decide", "eval_rule", "make_game", "moments", "sample_margins", "sgn", "stream",
    "tie_stream",
]
