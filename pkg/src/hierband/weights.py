"""Weight schemes ``w[l, m]`` for the nested triangle penalty.

Level ``l`` (1..p-1) penalises the triangle pair made of subdiagonals
``1..l``; ``w[l, m]`` scales subdiagonal ``m`` inside that group. All built-in
schemes share ``w[l, l] = sqrt(2 l)``:

``group``
    ``w[l, m] = sqrt(2 l)`` if ``m == l`` else 0. Plain group lasso on
    subdiagonals, no hierarchy.
``simple``
    ``w[l, m] = sqrt(2 l)`` for every ``m <= l``.
``general``
    ``w[l, m] = sqrt(2 l) / (l - m + 1)``.

Weights are evaluated on demand; a scheme object stores no table unless
it is ``custom``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from os import PathLike

import numpy as np

KINDS = ("group", "simple", "general", "custom")


@dataclass(frozen=True)
class WeightScheme:
    """A weight scheme bound to a dimension ``p``.

    Parameters
    ----------
    kind : {"group", "simple", "general", "custom"}
    p : int
        Matrix dimension.
    table : ndarray of shape (p-1, p-1), optional
        Only for ``kind="custom"``. ``table[l-1, m-1]`` holds ``w[l, m]`` for
        ``m <= l``; entries above the diagonal are ignored.
    """

    kind: str
    p: int
    table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight scheme {self.kind!r}; expected one of {KINDS}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.kind == "custom":
            if self.table is None:
                raise ValueError("custom scheme needs a weight table")
            t = np.tril(np.asarray(self.table, dtype=float))
            if t.shape != (self.p - 1, self.p - 1):
                raise ValueError(f"custom table must be {(self.p - 1,) * 2}, got {t.shape}")
            _validate_table(t)
            object.__setattr__(self, "table", t)
        elif self.table is not None:
            raise ValueError("only the custom scheme takes a table")

    @property
    def hierarchical(self) -> bool:
        """True when every ``w[l, m]`` with ``m <= l`` is positive."""
        if self.kind == "group":
            return self.p <= 2
        if self.kind == "custom":
            lower = self.table[np.tril_indices(self.p - 1)]
            return bool(np.all(lower > 0))
        return True

    def _check(self, ell: int, m: int) -> None:
        if not (1 <= m <= ell <= self.p - 1):
            raise ValueError(f"need 1 <= m <= l <= p-1, got l={ell}, m={m}, p={self.p}")

    def weight(self, ell: int, m: int) -> float:
        self._check(ell, m)
        return float(self.level_weights(ell)[m - 1])

    def level_weights(self, ell: int) -> np.ndarray:
        """Vector ``(w[l, 1], ..., w[l, l])``."""
        if not 1 <= ell <= self.p - 1:
            raise ValueError(f"level l={ell} out of range 1..{self.p - 1}")
        wl = np.sqrt(2.0 * ell)
        if self.kind == "group":
            out = np.zeros(ell)
            out[-1] = wl
            return out
        if self.kind == "simple":
            return np.full(ell, wl)
        if self.kind == "general":
            m = np.arange(1, ell + 1)
            return wl / (ell - m + 1)
        return self.table[ell - 1, :ell].copy()

    def diag_weights(self) -> np.ndarray:
        """``w_l = w[l, l]`` for ``l = 1..p-1``."""
        if self.kind == "custom":
            return np.diagonal(self.table).copy()
        return np.sqrt(2.0 * np.arange(1, self.p))

    def net_weight(self, m: int) -> float:
        """``sum_{l=m}^{p-1} w[l, m]**2``, the total squared weight seen by subdiagonal ``m``."""
        if not 1 <= m <= self.p - 1:
            raise ValueError(f"level m={m} out of range 1..{self.p - 1}")
        return float(sum(self.level_weights(ell)[m - 1] ** 2 for ell in range(m, self.p)))


def _validate_table(t: np.ndarray) -> None:
    n = t.shape[0]
    for i in range(n):
        row = t[i, : i + 1]
        if np.any(row < 0) or not np.all(np.isfinite(row)):
            raise ValueError(f"weights at level {i + 1} must be finite and nonnegative")
        if row[-1] <= 0:
            raise ValueError(f"w[{i + 1},{i + 1}] must be positive")
        if row.max() > row[-1]:
            raise ValueError(f"level {i + 1} violates w[l,l] = max_m w[l,m]")


def make_scheme(kind: str, p: int) -> WeightScheme:
    return WeightScheme(kind, p)


def read_weight_csv(path: str | PathLike, p: int) -> WeightScheme:
    """Load a custom scheme from rows ``l,m,w`` (1-based, optional header)."""
    table = np.zeros((p - 1, p - 1))
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                ell, m, w = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError):
                if i == 0:
                    continue  # header
                raise ValueError(f"bad weight row {i + 1}: {row!r}") from None
            if not (1 <= m <= ell <= p - 1):
                raise ValueError(f"weight entry ({ell}, {m}) out of range for p={p}")
            table[ell - 1, m - 1] = w
    return WeightScheme("custom", p, table)
