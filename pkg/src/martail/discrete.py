"""Finite discrete laws with scalar or vector atoms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

MERGE_RTOL = 1e-9
MERGE_ATOL = 1e-300

PROVENANCES = ("drift_based", "closed_form", "dbj_atoms_only")


def _close(x: np.ndarray, y: np.ndarray, rtol: float) -> bool:
    both_nan = np.isnan(x) & np.isnan(y)
    with np.errstate(invalid="ignore"):
        near = np.abs(x - y) <= rtol * np.maximum(np.abs(x), np.abs(y)) + MERGE_ATOL
    return bool(np.all(both_nan | near))


@dataclass(frozen=True)
class DiscretePrediction:
    """Atoms with probability weights.

    Attributes
    ----------
    atoms : ndarray, shape (n, d)
        One row per atom; ``d = 1`` for scalar laws.
    weights : ndarray, shape (n,)
        Probabilities.  NaN when the law only enumerates atoms
        (``provenance == "dbj_atoms_only"``).
    merged : bool
        Whether coincident atoms were combined.
    provenance : str
        ``drift_based``, ``closed_form`` or ``dbj_atoms_only``.
    labels : tuple, optional
        Component names, e.g. horizons.
    """

    atoms: np.ndarray
    weights: np.ndarray
    merged: bool = False
    provenance: str = "drift_based"
    labels: Optional[tuple] = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.shape[0] != weights.size:
            raise ValueError("atoms and weights differ in length")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance != "dbj_atoms_only" and np.any(weights < 0):
            raise ValueError("negative weight")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.weights.size

    @property
    def scalar_atoms(self) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("law has vector atoms")
        return self.atoms[:, 0]

    def merge(self, rtol: float = MERGE_RTOL) -> "DiscretePrediction":
        """Sum the weights of atoms that agree within ``rtol`` (NaN matches NaN)."""
        if len(self) == 0:
            return self
        groups = _group(self.atoms, rtol)
        atoms = np.array([self.atoms[g[0]] for g in groups])
        weights = np.array([self.weights[g].sum() for g in groups])
        return DiscretePrediction(atoms, weights, True, self.provenance, self.labels)

    def normalized(self) -> "DiscretePrediction":
        total = self.weights.sum()
        return DiscretePrediction(self.atoms, self.weights / total, self.merged, self.provenance, self.labels)

    def weight_of(self, atom, rtol: float = 1e-9, atol: float = 1e-12) -> float:
        """Total weight on atoms equal to ``atom`` within tolerance."""
        target = np.atleast_1d(np.asarray(atom, dtype=float))
        hit = np.all(np.isclose(self.atoms, target, rtol=rtol, atol=atol, equal_nan=True), axis=1)
        return float(self.weights[hit].sum())

    def marginal(self, k: int) -> "DiscretePrediction":
        labels = None if self.labels is None else (self.labels[k],)
        return DiscretePrediction(self.atoms[:, k], self.weights, False, self.provenance, labels).merge()

    def map(self, fn, labels: Optional[tuple] = None) -> "DiscretePrediction":
        """Push the law forward through ``fn`` applied row-wise."""
        new_atoms = np.array([np.atleast_1d(fn(row)) for row in self.atoms], dtype=float)
        return DiscretePrediction(new_atoms, self.weights, False, self.provenance, labels).merge()

    def mean(self) -> np.ndarray:
        return self.weights @ self.atoms

    def to_dict(self) -> dict:
        return {
            "atoms": self.atoms.tolist(),
            "weights": self.weights.tolist(),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()))

    @classmethod
    def from_dict(cls, data: dict) -> "DiscretePrediction":
        return cls(
            np.asarray(data["atoms"], dtype=float),
            np.asarray(data["weights"], dtype=float),
            merged=True,
            provenance=data.get("provenance", "drift_based"),
        )

    @classmethod
    def from_json(cls, text: str) -> "DiscretePrediction":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    # json writes repr(float), which round-trips exactly; NaN becomes null
    if isinstance(obj, list):
        return [_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _group(atoms: np.ndarray, rtol: float) -> list:
    """Index groups of rows that agree within ``rtol``, in sorted order."""
    keys = np.where(np.isnan(atoms), np.inf, atoms)
    order = np.lexsort(keys.T[::-1])
    groups: list = []
    for idx in order:
        x = atoms[idx]
        hit = None
        for g in reversed(groups):
            y = atoms[g[0]]
            if _close(y, x, rtol):
                hit = g
                break
            if not np.isnan(x[0]) and not np.isnan(y[0]) and x[0] - y[0] > rtol * max(abs(x[0]), abs(y[0])) + MERGE_ATOL:
                # sorted on the first coordinate: nothing earlier can match
                break
        if hit is None:
            groups.append([idx])
        else:
            hit.append(idx)
    return groups


def total_variation(first: DiscretePrediction, second: DiscretePrediction, rtol: float = MERGE_RTOL) -> float:
    """Total-variation distance between two discrete laws on a common atom set."""
    if first.dim != second.dim:
        raise ValueError("laws live in different dimensions")
    atoms = np.vstack([first.atoms, second.atoms])
    signed = np.concatenate([first.weights, -second.weights])
    return 0.5 * float(sum(abs(signed[g].sum()) for g in _group(atoms, rtol)))


def from_pairs(pairs: Iterable, provenance: str = "closed_form") -> DiscretePrediction:
    """Build a merged law from ``(atom, weight)`` pairs."""
    pairs = list(pairs)
    atoms = np.array([np.atleast_1d(a) for a, _ in pairs], dtype=float)
    weights = np.array([w for _, w in pairs], dtype=float)
    return DiscretePrediction(atoms, weights, False, provenance).merge()
