"""Problem instances and synthetic data generation.

Conventions used throughout the package: the design matrix X is n x p with
every column rescaled to l2 norm sqrt(n), observations follow
Y = X beta + eps with eps ~ N(0, sigma^2 I_n), and the noise-scale unit is
lam * sigma with lam = sqrt(2 log(p) / n).

Randomness comes exclusively from numpy Generators (PCG64).  Gaussian
variates use numpy's ziggurat transform; both are bit-stable for a fixed
numpy version, so every sampler below is a pure function of its arguments
and the generator state.  Support sets are drawn by a partial Fisher-Yates
shuffle, uniform over size-s subsets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

_EPS = np.finfo(float).eps


def column_normalize(entries: np.ndarray) -> np.ndarray:
    """Rescale each column of ``entries`` to l2 norm sqrt(n).

    Columns already at sqrt(n) up to a few ulp are left untouched, which
    makes the operation idempotent bit for bit.
    """
    entries = np.asarray(entries, dtype=float)
    n = entries.shape[0]
    norms = np.sqrt(np.einsum("ij,ij->j", entries, entries))
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a matrix with a zero column")
    scale = np.sqrt(n) / norms
    scale[np.abs(scale - 1.0) <= 32 * _EPS] = 1.0
    return entries * scale


@dataclass(frozen=True)
class DesignMatrix:
    """Dense n x p design whose columns have l2 norm sqrt(n).

    The constructor validates the normalization (1e-10 relative); use
    :meth:`from_raw` to normalize arbitrary input.  The entry array is
    copied and frozen so instances are safe to share across threads.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("design matrix must be two-dimensional")
        n, p = entries.shape
        if n < 1 or p < 1:
            raise ValueError("design matrix must have n >= 1 and p >= 1")
        norms = np.linalg.norm(entries, axis=0)
        if np.max(np.abs(norms - np.sqrt(n))) > 1e-10 * np.sqrt(n):
            raise ValueError(
                "columns must have l2 norm sqrt(n); use DesignMatrix.from_raw"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_raw(cls, entries: np.ndarray) -> "DesignMatrix":
        return cls(column_normalize(entries))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def gram(self) -> np.ndarray:
        """X^T X / n, the correlation matrix of the columns."""
        return self.entries.T @ self.entries / self.n


@dataclass(frozen=True)
class GroundTruth:
    """A target vector together with its support bookkeeping."""

    beta: np.ndarray
    support: tuple[int, ...]
    s: int

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        expected = tuple(int(j) for j in np.flatnonzero(beta))
        if tuple(self.support) != expected:
            raise ValueError("support must be exactly the nonzero index set")
        if self.s != len(expected):
            raise ValueError("s must equal |support|")

    @classmethod
    def from_beta(cls, beta: np.ndarray) -> "GroundTruth":
        beta = np.asarray(beta, dtype=float)
        support = tuple(int(j) for j in np.flatnonzero(beta))
        return cls(beta=beta, support=support, s=len(support))

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    @property
    def beta_min(self) -> float:
        """Smallest nonzero magnitude; +inf for the zero vector."""
        if self.s == 0:
            return float("inf")
        return float(np.min(np.abs(self.beta[list(self.support)])))


@dataclass(frozen=True)
class ProblemInstance:
    """One realization of Y = X beta + eps.

    ``seed`` is provenance only (whatever key was used to build the
    generator); ``recipe`` optionally carries the generating configuration
    so the instance can be serialized and regenerated bit for bit.
    """

    X: DesignMatrix
    truth: GroundTruth
    sigma: float
    Y: np.ndarray
    seed: object = None
    recipe: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        Y = np.array(self.Y, dtype=float)
        Y.setflags(write=False)
        object.__setattr__(self, "Y", Y)
        if self.X.p != self.truth.p:
            raise ValueError("design and truth dimensions disagree")
        if Y.shape != (self.X.n,):
            raise ValueError("Y must have length n")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    @property
    def n(self) -> int:
        return self.X.n

    @property
    def p(self) -> int:
        return self.X.p

    def to_json(self) -> str:
        """Serialize the generating recipe (not the raw data) as JSON."""
        if self.recipe is None:
            raise ValueError("instance carries no generation recipe")
        doc = dict(self.recipe)
        doc.update(n=self.n, p=self.p, s=self.truth.s, sigma=self.sigma)
        return json.dumps(doc, sort_keys=True)


def sample_support(p: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform size-s subset of {0..p-1} via a partial Fisher-Yates shuffle."""
    if not 0 <= s <= p:
        raise ValueError(f"need 0 <= s <= p, got s={s}, p={p}")
    idx = np.arange(p)
    for i in range(s):
        j = i + int(rng.integers(p - i))
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(idx[:s])


def sample_beta(p: int, s: int, scheme, rng: np.random.Generator) -> GroundTruth:
    """Draw a sparse target vector on a uniformly random support.

    ``scheme`` selects the nonzero law:

    * ``"gaussian_mixture"``: beta_i = mu_i (1 + |g_i|) with mu_i = +-1
      equiprobably and g_i standard normal, so every nonzero magnitude
      is at least 1;
    * ``("constant", v)``: beta_i = +-v equiprobably;
    * ``("explicit", values)``: the given s values, placed on the sorted
      support in order.
    """
    support = sample_support(p, s, rng)
    beta = np.zeros(p)
    if s > 0:
        if scheme == "gaussian_mixture":
            mu = 2.0 * rng.integers(2, size=s) - 1.0
            g = rng.standard_normal(s)
            values = mu * (1.0 + np.abs(g))
        elif isinstance(scheme, tuple) and scheme[0] == "constant":
            v = float(scheme[1])
            values = v * (2.0 * rng.integers(2, size=s) - 1.0)
        elif isinstance(scheme, tuple) and scheme[0] == "explicit":
            values = np.asarray(scheme[1], dtype=float)
            if values.shape != (s,):
                raise ValueError("explicit scheme needs exactly s values")
            if np.any(values == 0.0):
                raise ValueError("explicit values must be nonzero")
        else:
            raise ValueError(f"unknown beta scheme: {scheme!r}")
        beta[support] = values
    return GroundTruth(beta=beta, support=tuple(int(j) for j in support), s=s)


def synthesize(
    X: DesignMatrix,
    truth: GroundTruth,
    sigma: float,
    rng: np.random.Generator,
    seed: object = None,
    recipe: dict | None = None,
) -> ProblemInstance:
    """Y = X beta + sigma * eps with eps standard normal.

    The noise vector is drawn even when sigma = 0 so that the generator
    stream advances identically across noise levels.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if X.p != truth.p:
        raise ValueError(
            f"dimension mismatch: X has p={X.p}, beta has p={truth.p}"
        )
    eps = rng.standard_normal(X.n)
    Y = X.entries @ truth.beta + sigma * eps
    return ProblemInstance(X=X, truth=truth, sigma=sigma, Y=Y, seed=seed, recipe=recipe)


def snr(truth: GroundTruth, sigma: float) -> float:
    """Signal-to-noise ratio ||beta||_2^2 / sigma^2."""
    if sigma <= 0:
        raise ValueError("snr requires sigma > 0")
    return float(truth.beta @ truth.beta) / sigma ** 2


def noise_scale(p: int, n: int) -> float:
    """lam = sqrt(2 log(p) / n), the universal noise-correlation scale."""
    return float(np.sqrt(2.0 * np.log(p) / n))


def dump_matrix_csv(X: DesignMatrix, path) -> None:
    """Raw matrix dump, one row per line."""
    np.savetxt(path, X.entries, delimiter=",")
