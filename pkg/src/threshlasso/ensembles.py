"""Random design-matrix ensembles for the simulation studies.

Three families are supported: i.i.d. standard Gaussian entries, Gaussian
rows with Toeplitz covariance T(gamma)_{ij} = gamma^|i-j|, and i.i.d. +-1
Bernoulli entries.  Correlation structure is imposed first and the final
matrix is column-normalized to l2 norm sqrt(n) (Bernoulli matrices already
are, exactly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DesignMatrix, column_normalize

KINDS = ("gaussian_iid", "toeplitz", "bernoulli")


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw and at what size."""

    kind: str
    n: int
    p: int
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n < 1 or self.p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if self.kind == "toeplitz":
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise ValueError("toeplitz ensemble requires gamma in (0, 1)")
        elif self.gamma is not None:
            raise ValueError(f"gamma only applies to the toeplitz ensemble")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n, "p": self.p}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        return cls(
            kind=d["kind"],
            n=int(d["n"]),
            p=int(d["p"]),
            gamma=float(d["gamma"]) if d.get("gamma") is not None else None,
        )


def toeplitz_matrix(gamma: float, p: int) -> np.ndarray:
    """T(gamma) with entries gamma^|i-j|."""
    idx = np.arange(p)
    return gamma ** np.abs(idx[:, None] - idx[None, :])


def toeplitz_cholesky(gamma: float, p: int) -> np.ndarray:
    """Lower-triangular L with L L^T = T(gamma)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("toeplitz correlation requires gamma in (0, 1)")
    try:
        return np.linalg.cholesky(toeplitz_matrix(gamma, p))
    except np.linalg.LinAlgError as exc:  # T(gamma) is PD for gamma in (0,1)
        raise AssertionError(f"Cholesky of T({gamma}) failed unexpectedly") from exc


def generate(spec: EnsembleSpec, rng: np.random.Generator) -> DesignMatrix:
    """Draw one design matrix according to ``spec``."""
    if spec.kind == "gaussian_iid":
        raw = rng.standard_normal((spec.n, spec.p))
        return DesignMatrix(column_normalize(raw))
    if spec.kind == "toeplitz":
        L = toeplitz_cholesky(spec.gamma, spec.p)
        raw = rng.standard_normal((spec.n, spec.p)) @ L.T
        return DesignMatrix(column_normalize(raw))
    if spec.kind == "bernoulli":
        raw = 2.0 * rng.integers(2, size=(spec.n, spec.p)) - 1.0
        return DesignMatrix(raw)
    raise ValueError(f"unknown ensemble kind {spec.kind!r}")
