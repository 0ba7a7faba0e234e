"""Dictionary-constrained best-subset selection by ordinary least squares.

Every entry of a selection dictionary is fitted by OLS (intercept always
included, never selected) and scored. Smaller scores are better for all
criteria; adjusted R-squared is negated to keep that orientation.
Cross-validation uses contiguous row blocks so repeated runs are
bit-for-bit identical; shuffling is opt-in via a seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import Dictionary, Universe, VarSet
from .errors import (
    DatasetTooSmall,
    EmptyDictionary,
    MissingValue,
    ParseError,
    RankDeficient,
    SchemaMismatch,
    Underdetermined,
)

CRITERIA = ("aic", "bic", "adjr2", "cv")

_MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "none"}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric design data: one column per universe variable plus an outcome."""

    universe: Universe
    outcome: str
    X: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]


def load_dataset(path, outcome: str, u: Universe) -> Dataset:
    """Read a CSV with a header row into a validated Dataset.

    The header must contain every universe name and the outcome column;
    extra columns are ignored. Cells must be finite numbers. Rows are
    reported 1-based counting the header, columns by name.
    """
    if outcome in u:
        raise SchemaMismatch(f"outcome column {outcome!r} is also a covariate")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty file: no header row") from None
        header = [h.strip() for h in header]
        positions = {}
        for idx, name in enumerate(header):
            if name not in positions:
                positions[name] = idx
        needed = list(u.names) + [outcome]
        for name in needed:
            if name not in positions:
                raise SchemaMismatch(f"missing column {name!r} in header")
        cols = [positions[name] for name in needed]
        rows = []
        for rownum, record in enumerate(reader, start=2):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            values = []
            for name, idx in zip(needed, cols):
                if idx >= len(record):
                    raise MissingValue(
                        f"row {rownum} has no value for column {name!r}",
                        row=rownum,
                        column=name,
                    )
                cell = record[idx].strip()
                if cell.lower() in _MISSING_TOKENS:
                    raise MissingValue(
                        f"missing value at row {rownum}, column {name!r}",
                        row=rownum,
                        column=name,
                    )
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"non-numeric cell {cell!r} at row {rownum}, column {name!r}",
                        row=rownum,
                        column=name,
                    ) from None
                if not math.isfinite(value):
                    raise MissingValue(
                        f"non-finite value at row {rownum}, column {name!r}",
                        row=rownum,
                        column=name,
                    )
                values.append(value)
            rows.append(values)
    if len(rows) < 2:
        raise DatasetTooSmall(f"need at least 2 data rows, found {len(rows)}")
    data = np.asarray(rows, dtype=np.float64)
    return Dataset(universe=u, outcome=outcome, X=data[:, : u.size], y=data[:, u.size])


@dataclass(frozen=True)
class FitResult:
    """One OLS fit: subset, intercept-first coefficients, and fit sums."""

    subset: VarSet
    intercept: float
    coefficients: tuple[float, ...]  # aligned with sorted(subset) names
    rss: float
    tss: float
    k: int  # parameters estimated: |subset| + 1 for the intercept

    def coefficient_map(self) -> dict[str, float]:
        return dict(zip(self.subset, self.coefficients))


def _design(d: Dataset, s: VarSet) -> np.ndarray:
    idx = [d.universe.index(name) for name in s]
    return np.column_stack([np.ones(d.n), d.X[:, idx]] if idx else [np.ones(d.n)])


def fit_ols(d: Dataset, s: VarSet) -> FitResult:
    """Least squares with intercept for one subset.

    Uses an orthogonal decomposition (numpy lstsq) rather than the
    normal equations. Rank deficiency is an error: silently dropping a
    column would change which subset was actually fitted.
    """
    k = len(s) + 1
    if k > d.n:
        raise Underdetermined(f"{k} parameters but only {d.n} rows")
    design = _design(d, s)
    beta, _, rank, _ = np.linalg.lstsq(design, d.y, rcond=None)
    if rank < k:
        raise RankDeficient(f"design for {s.to_text()} has rank {rank} < {k}")
    resid = d.y - design @ beta
    rss = float(resid @ resid)
    centered = d.y - d.y.mean()
    tss = float(centered @ centered)
    return FitResult(
        subset=s,
        intercept=float(beta[0]),
        coefficients=tuple(float(b) for b in beta[1:]),
        rss=rss,
        tss=tss,
        k=k,
    )


def score(f: FitResult, criterion: str, n: int) -> float:
    """Score a fit; smaller is always better.

    AIC and BIC use the gaussian profile likelihood with the variance
    counted as one extra parameter. Adjusted R-squared is negated.
    A perfect fit (rss exactly 0) scores -inf for every criterion, so
    perfect fits rank first and ties fall to the smaller subset.
    """
    if criterion not in ("aic", "bic", "adjr2"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if f.rss == 0.0:
        return float("-inf")
    if criterion == "aic":
        return n * math.log(f.rss / n) + 2 * (f.k + 1)
    if criterion == "bic":
        return n * math.log(f.rss / n) + (f.k + 1) * math.log(n)
    if n <= f.k:
        raise DatasetTooSmall(f"adjusted r2 needs n > {f.k}, have n={n}")
    r2 = 1.0 - f.rss / f.tss
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / (n - f.k)
    return -adjusted


@dataclass(frozen=True)
class ScoredModel:
    subset: VarSet
    score: float
    intercept: float
    coefficients: tuple[float, ...]


@dataclass(frozen=True)
class RankedModels:
    """All fitted models for one run, best first."""

    criterion: str
    models: tuple[ScoredModel, ...]

    @property
    def best(self) -> ScoredModel:
        return self.models[0]

    def ranking(self) -> list[tuple[VarSet, float]]:
        return [(m.subset, m.score) for m in self.models]


def _fold_bounds(n: int, folds: int) -> list[tuple[int, int]]:
    # Contiguous blocks whose sizes differ by at most one.
    base, rem = divmod(n, folds)
    bounds = []
    start = 0
    for i in range(folds):
        size = base + (1 if i < rem else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _cv_score(d: Dataset, s: VarSet, folds: int, order: np.ndarray) -> float:
    idx = [d.universe.index(name) for name in s]
    X = d.X[order][:, idx] if idx else np.empty((d.n, 0))
    y = d.y[order]
    total = 0.0
    for start, end in _fold_bounds(d.n, folds):
        train = np.concatenate([np.arange(0, start), np.arange(end, d.n)])
        design = np.column_stack([np.ones(train.size), X[train]])
        beta, _, rank, _ = np.linalg.lstsq(design, y[train], rcond=None)
        if rank < design.shape[1]:
            raise RankDeficient(
                f"training fold design for {s.to_text()} is rank deficient"
            )
        test = np.arange(start, end)
        pred = np.column_stack([np.ones(test.size), X[test]]) @ beta
        err = y[test] - pred
        total += float(err @ err)
    return total / d.n


def select_best(
    d: Dataset,
    D: Dictionary,
    criterion: str,
    folds: int | None = None,
    seed: int | None = None,
) -> RankedModels:
    """Fit and score every dictionary entry; return them ranked.

    ``criterion`` is one of aic, bic, adjr2, cv. Cross-validation
    requires ``folds``; its score is the held-out squared error pooled
    over all rows, and the reported coefficients still come from the
    full-data fit. ``seed`` shuffles rows before blocking into folds.
    Ties rank the smaller subset first, then canonical subset order.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    if criterion == "cv":
        if folds is None:
            raise ValueError("criterion 'cv' requires folds")
        if folds < 2:
            raise ValueError("folds must be at least 2")
        if folds > d.n:
            raise DatasetTooSmall(f"{folds} folds but only {d.n} rows")
    elif folds is not None:
        raise ValueError(f"folds only applies to criterion 'cv', not {criterion!r}")
    if not D.entries:
        raise EmptyDictionary(
            "the dictionary is empty (an incoherent rule admits no subsets), "
            "so there is nothing to select from"
        )
    if D.universe != d.universe:
        raise SchemaMismatch("dictionary and dataset use different universes")
    if criterion == "cv":
        largest = max(len(s) for s in D.entries)
        min_train = d.n - max(end - start for start, end in _fold_bounds(d.n, folds))
        if largest + 1 > min_train:
            raise DatasetTooSmall(
                f"training folds of {min_train} rows cannot fit {largest + 1} parameters"
            )
        if seed is None:
            order = np.arange(d.n)
        else:
            order = np.random.default_rng(seed).permutation(d.n)
    scored = []
    for subset in D.entries:
        fit = fit_ols(d, subset)
        if criterion == "cv":
            value = _cv_score(d, subset, folds, order)
        else:
            value = score(fit, criterion, d.n)
        scored.append(
            ScoredModel(
                subset=subset,
                score=value,
                intercept=fit.intercept,
                coefficients=fit.coefficients,
            )
        )
    scored.sort(key=lambda m: (m.score, len(m.subset), m.subset.mask))
    result = RankedModels(criterion=criterion, models=tuple(scored))
    assert result.best.subset.mask in set(D.masks())
    return result
