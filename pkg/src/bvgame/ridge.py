"""Ridge regression, synthetic data, CSV ingestion and the two-player lambda tournament."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import linalg


class DatasetError(ValueError):
    pass


class CSVParseError(DatasetError):
    pass


class MissingColumnError(DatasetError):
    pass


class NonNumericError(DatasetError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"non-numeric value {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column
        self.value = value


class ZeroVarianceError(DatasetError):
    pass


class SingularSystemError(np.linalg.LinAlgError):
    pass


class InsufficientRowsError(DatasetError):
    pass


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    column_names: Optional[tuple] = None
    target: Optional[str] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != y.size:
            raise DatasetError(f"features {X.shape} and labels {y.shape} do not align")
        n, p = X.shape
        if p < 1 or n < p:
            raise DatasetError(f"need n >= p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DatasetError("dataset contains non-finite values")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.column_names is not None:
            object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.column_names, self.target)

    def write_csv(self, path, target: str = "y") -> Path:
        path = Path(path)
        names = list(self.column_names or [f"x{k}" for k in range(self.p)])
        target = self.target or target
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + [target])
            for row, label in zip(self.features.tolist(), self.labels.tolist()):
                w.writerow([repr(v) for v in row] + [repr(label)])
        return path


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray
    lam: float

    def predict(self, x):
        return predict(self, x)


def _moments(X: np.ndarray, y: np.ndarray):
    n = X.shape[0]
    return X.T @ X / n, X.T @ y / n


def solve_ridge(gram: np.ndarray, moment: np.ndarray, lam: float) -> np.ndarray:
    """Solve ``(gram + lam I) w = moment``: Cholesky, or pivoted LU for an unpenalized fit."""
    p = gram.shape[0]
    A = gram + lam * np.eye(p)
    try:
        return linalg.cho_solve(linalg.cho_factor(A, lower=True), moment)
    except linalg.LinAlgError:
        if lam > 0:
            raise
    if np.linalg.matrix_rank(gram) < p:
        raise SingularSystemError("Gram matrix is rank-deficient; use lambda > 0")
    return linalg.solve(A, moment, assume_a="sym")


def fit_ridge(train: Dataset, lam: float) -> RidgeModel:
    """``w = (X'X/n + lam I)^-1 X'y/n``."""
    if not lam >= 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    gram, moment = _moments(train.features, train.labels)
    if lam == 0 and np.linalg.matrix_rank(gram) < train.p:
        raise SingularSystemError("Gram matrix is rank-deficient; use lambda > 0")
    return RidgeModel(solve_ridge(gram, moment, lam), float(lam))


def fit_ridge_path(train: Dataset, lams: Sequence[float]) -> np.ndarray:
    """Weights for every lambda, shape ``(len(lams), p)``; the moments are formed once."""
    gram, moment = _moments(train.features, train.labels)
    return np.vstack([solve_ridge(gram, moment, float(l)) for l in lams])


def predict(model: RidgeModel, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.weights.size:
        raise ValueError(f"expected {model.weights.size} features, got {x.shape[-1]}")
    out = x @ model.weights
    return float(out) if np.ndim(out) == 0 else out


def synth_data(n: int, p: int, w0=None, noise_sd: float = 1.0, seed: int = 0,
               bound: float = 1.0) -> Dataset:
    """Bounded uniform features on ``[-bound, bound]`` and labels ``w0'x + e``."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    w0 = np.ones(p) if w0 is None else np.asarray(w0, dtype=float)
    if w0.shape != (p,):
        raise ValueError(f"w0 must have length {p}")
    X = rng.uniform(-bound, bound, size=(n, p))
    e = rng.normal(0.0, 1.0, size=n) * noise_sd
    return Dataset(X, X @ w0 + e, tuple(f"x{k}" for k in range(p)), "y")


def asymptotic_bias_variance(gram, w0, x, sigma2: float, lam: float) -> tuple[float, float]:
    """Limiting bias and scaled variance of the ridge prediction at ``x``.

    bias = lam x'(G + lam I)^-1 w0,  V = sigma2 x'(G + lam I)^-1 G (G + lam I)^-1 x.
    """
    G = np.asarray(gram, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    x = np.asarray(x, dtype=float)
    A = G + lam * np.eye(G.shape[0])
    if lam == 0 and np.linalg.matrix_rank(G) < G.shape[0]:
        raise SingularSystemError("Gram matrix is rank-deficient at lambda = 0")
    fac = linalg.cho_factor(A, lower=True)
    u = linalg.cho_solve(fac, x)  # (G + lam I)^-1 x, A symmetric
    bias = lam * float(u @ w0)
    variance = sigma2 * float(u @ G @ u)
    return bias, variance


def load_csv(path, target: str) -> Dataset:
    """Read a headered, comma-separated numeric file; ``target`` becomes the label column."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVParseError(f"{path}: empty file") from None
        except csv.Error as exc:
            raise CSVParseError(f"{path}: {exc}") from exc
        header = [h.strip() for h in header]
        if target not in header:
            raise MissingColumnError(f"{path}: target column {target!r} not found (columns: {header})")
        rows = []
        try:
            for line_no, row in enumerate(reader, start=1):
                if not row:
                    continue
                if len(row) != len(header):
                    raise CSVParseError(
                        f"{path}: row {line_no} has {len(row)} fields, expected {len(header)}"
                    )
                vals = []
                for col, cell in zip(header, row):
                    cell = cell.strip()
                    try:
                        v = float(cell)
                    except ValueError:
                        raise NonNumericError(line_no, col, cell) from None
                    if not math.isfinite(v):
                        raise NonNumericError(line_no, col, cell)
                    vals.append(v)
                rows.append(vals)
        except csv.Error as exc:
            raise CSVParseError(f"{path}: {exc}") from exc
    if not rows:
        raise CSVParseError(f"{path}: no data rows")
    data = np.array(rows)
    t = header.index(target)
    names = tuple(h for k, h in enumerate(header) if k != t)
    return Dataset(np.delete(data, t, axis=1), data[:, t], names, target)


@dataclass(frozen=True)
class Standardizer:
    feature_mean: np.ndarray
    feature_sd: np.ndarray
    label_mean: float
    label_sd: float

    def inverse_labels(self, y):
        return np.asarray(y) * self.label_sd + self.label_mean

    def to_dict(self) -> dict:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_sd": self.feature_sd.tolist(),
            "label_mean": self.label_mean,
            "label_sd": self.label_sd,
        }


def standardize(data: Dataset) -> tuple[Dataset, Standardizer]:
    """z-score every feature and the label (population sd)."""
    X, y = data.features, data.labels
    mean, sd = X.mean(axis=0), X.std(axis=0)
    names = data.column_names or tuple(f"x{k}" for k in range(data.p))
    for k in range(data.p):
        if not sd[k] > 0:
            raise ZeroVarianceError(f"feature column {names[k]!r} has zero variance")
    y_mean, y_sd = float(y.mean()), float(y.std())
    if not y_sd > 0:
        raise ZeroVarianceError(f"label column {data.target or 'y'!r} has zero variance")
    out = Dataset((X - mean) / sd, (y - y_mean) / y_sd, data.column_names, data.target)
    return out, Standardizer(mean, sd, y_mean, y_sd)


@dataclass(frozen=True)
class TournamentSpec:
    lambda_grid: tuple = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0)
    test_fraction: float = 0.1
    repetitions: int = 100
    reward: float = 1.0
    seed: int = 0
    standardize: bool = True
    shared_halves: bool = False  # both players train on the same half (symmetry check)

    def __post_init__(self):
        grid = tuple(float(l) for l in self.lambda_grid)
        object.__setattr__(self, "lambda_grid", grid)
        if not grid:
            raise ValueError("lambda grid must be nonempty")
        if grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda grid must be nonnegative and increasing")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.reward > 0:
            raise ValueError("reward must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PayoffMatrix:
    grid: tuple
    player1: np.ndarray  # [i, j]: player 1 plays grid[i], player 2 plays grid[j]
    player2: np.ndarray
    spec: Optional[TournamentSpec] = None
    rounds: int = 0

    def trend_fraction(self, player: int) -> float:
        """Share of adjacent own-lambda steps along which the player's total does not increase."""
        if len(self.grid) < 2:
            return 1.0
        if player == 1:
            steps = np.diff(self.player1, axis=0)
        else:
            steps = np.diff(self.player2, axis=1)
        return float(np.mean(steps <= 0.0))

    def lower_bias_gain(self, player: int) -> tuple[float, float]:
        """Gain from own min-lambda over own max-lambda, against the opponent's (min, max) lambda."""
        if player == 1:
            M = self.player1
            return float(M[0, 0] - M[-1, 0]), float(M[0, -1] - M[-1, -1])
        M = self.player2
        return float(M[0, 0] - M[0, -1]), float(M[-1, 0] - M[-1, -1])

    def write(self, out_dir, prefix: str = "payoff") -> list[Path]:
        out_dir = Path(out_dir)
        paths = []
        for k, M in ((1, self.player1), (2, self.player2)):
            p = out_dir / f"{prefix}_player{k}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["lambda1\\lambda2"] + [repr(l) for l in self.grid])
                for lam, row in zip(self.grid, M.tolist()):
                    w.writerow([repr(lam)] + [repr(v) for v in row])
            paths.append(p)
        meta = {
            "grid": list(self.grid),
            "rounds_per_cell": self.rounds,
            "spec": self.spec.to_dict() if self.spec else None,
            "trend_fraction": {"player1": self.trend_fraction(1), "player2": self.trend_fraction(2)},
            "lower_bias_gain": {
                "player1": dict(zip(("vs_min", "vs_max"), self.lower_bias_gain(1))),
                "player2": dict(zip(("vs_min", "vs_max"), self.lower_bias_gain(2))),
            },
        }
        p = out_dir / f"{prefix}.json"
        p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(p)
        return paths


def _play(err1: np.ndarray, err2: np.ndarray, reward: float):
    """Summed payoffs for every lambda pair; err arrays are ``(n_lambda, n_test)``."""
    e1 = err1[:, None, :]
    e2 = err2[None, :, :]
    k1, k2 = np.abs(e1), np.abs(e2)
    w1 = reward - e1 * e1
    w2 = reward - e2 * e2
    tie = k1 == k2
    p1 = np.where(k1 < k2, w1, np.where(tie, 0.5 * w1, 0.0)).sum(axis=2)
    p2 = np.where(k2 < k1, w2, np.where(tie, 0.5 * w2, 0.0)).sum(axis=2)
    return p1, p2


def tournament(data: Dataset, spec: TournamentSpec) -> PayoffMatrix:
    """Repeat: hold out a test split, give each player a disjoint random half of
    the rest, fit one ridge model per lambda, and play every test point for
    every ``(lambda_1, lambda_2)`` pair, summing the payoffs."""
    if spec.standardize:
        data, _ = standardize(data)
    n = data.n
    n_test = int(math.ceil(spec.test_fraction * n))
    n_half = (n - n_test) // 2
    if n_test < 1 or n_half < data.p:
        raise InsufficientRowsError(
            f"{n} rows cannot be split into a test set and two training halves of >= {data.p} rows"
        )
    L = len(spec.lambda_grid)
    tot1 = np.zeros((L, L))
    tot2 = np.zeros((L, L))
    for rep in range(spec.repetitions):
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(rep,)))
        perm = rng.permutation(n)
        test = perm[:n_test]
        half1 = perm[n_test:n_test + n_half]
        half2 = half1 if spec.shared_halves else perm[n_test + n_half:n_test + 2 * n_half]
        X_test, y_test = data.features[test], data.labels[test]
        W1 = fit_ridge_path(data.subset(half1), spec.lambda_grid)
        W2 = fit_ridge_path(data.subset(half2), spec.lambda_grid)
        err1 = W1 @ X_test.T - y_test[None, :]
        err2 = W2 @ X_test.T - y_test[None, :]
        p1, p2 = _play(err1, err2, spec.reward)
        tot1 += p1
        tot2 += p2
    return PayoffMatrix(spec.lambda_grid, tot1, tot2, spec, rounds=n_test * spec.repetitions)
