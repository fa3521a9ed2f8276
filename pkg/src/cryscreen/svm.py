"""Kernel SVM with a from-scratch SMO trainer.

The trainer solves the soft-margin dual

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

by Platt-style pairwise updates: sweep all examples, and for each KKT
violator pick the partner index from a seeded shuffle, trying candidates
until one makes progress. Termination: a full sweep with no successful
update, or the max_passes cap (the model is then tagged non-converged
rather than failing; a screening tool prefers a usable model plus a
warning to a crash).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingleClassInput, TooFewSamples

# A pair step smaller than this is treated as no progress.
_MIN_ALPHA_STEP = 1e-10
# Dual variables within this slack of 0 or C count as at-bound; pair
# arithmetic leaves values like C - 1e-12 that must not be mistaken for
# margin-interior points.
_BOUND_EPS = 1e-8


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map x -> (x - mean) / std (population std).

    Zero-variance features get std = 1 and are flagged in constant_mask.
    """

    means: np.ndarray
    stds: np.ndarray
    constant_mask: np.ndarray

    def __post_init__(self):
        if len(self.means) != len(self.stds):
            raise ValueError("means and stds must have equal length")
        if np.any(self.stds <= 0):
            raise ValueError("stds must be positive")

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(means=np.zeros(dim), stds=np.ones(dim),
                   constant_mask=np.zeros(dim, dtype=bool))


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"            # "linear" | "rbf"
    gamma: float | None = None   # rbf only

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.gamma is None or self.gamma <= 0:
                raise ValueError("rbf kernel needs gamma > 0")

    @classmethod
    def default_for_dim(cls, dim: int) -> "KernelSpec":
        return cls(kind="rbf", gamma=1.0 / dim)


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass(frozen=True)
class TrainingMeta:
    C: float
    tolerance: float
    max_passes: int
    seed: int
    n_passes_run: int = 0
    converged: bool = True
    kkt_violations: int = 0


@dataclass(frozen=True)
class SvmModel:
    """Trained classifier: support vectors live in standardized space;
    decision_value standardizes incoming probes with the embedded map."""

    kernel: KernelSpec
    standardizer: Standardizer
    support_vectors: np.ndarray   # (n_sv, dim)
    dual_coefs: np.ndarray        # alpha_i * y_i
    bias: float
    training_meta: TrainingMeta

    @property
    def n_support_vectors(self) -> int:
        return self.support_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def kernel_eval(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dims {a.shape} vs {b.shape}")
    if spec.kind == "linear":
        return float(a @ b)
    d = a - b
    return float(np.exp(-spec.gamma * (d @ d)))


def _kernel_matrix(spec: KernelSpec, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """K[i, j] = K(rows[i], cols[j]) without Python-level loops."""
    if spec.kind == "linear":
        return rows @ cols.T
    sq = (np.sum(rows ** 2, axis=1)[:, None]
          + np.sum(cols ** 2, axis=1)[None, :]
          - 2.0 * (rows @ cols.T))
    return np.exp(-spec.gamma * np.maximum(sq, 0.0))


def standardize_fit(x_matrix: np.ndarray) -> Standardizer:
    x_matrix = np.asarray(x_matrix, dtype=np.float64)
    if x_matrix.ndim != 2 or x_matrix.shape[0] < 2:
        raise TooFewSamples("standardizer needs at least 2 rows")
    means = x_matrix.mean(axis=0)
    stds = x_matrix.std(axis=0)
    constant = stds == 0.0
    stds = np.where(constant, 1.0, stds)
    return Standardizer(means=means, stds=stds, constant_mask=constant)


def standardize_apply(s: Standardizer, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != len(s.means):
        raise DimensionMismatch(f"expected dim {len(s.means)}, got {x.shape[-1]}")
    return (x - s.means) / s.stds


def smo_train(x_matrix: np.ndarray, y: np.ndarray, kernel: KernelSpec,
              cfg: TrainConfig, standardizer: Standardizer | None = None) -> SvmModel:
    """Train on rows the caller has already standardized.

    The optional standardizer is embedded in the returned model so it can
    standardize future probes; when omitted, an identity map is embedded.
    Deterministic: identical inputs produce a bit-identical model.
    """
    x_matrix = np.asarray(x_matrix, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x_matrix.ndim != 2 or len(y) != x_matrix.shape[0]:
        raise ValueError("x_matrix must be (n, dim) with matching labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y > 0) or np.all(y < 0):
        raise SingleClassInput("need at least one example of each class")

    m = x_matrix.shape[0]
    gram = _kernel_matrix(kernel, x_matrix, x_matrix)
    alphas = np.zeros(m)
    bias = 0.0
    tol = cfg.tolerance
    c = cfg.C
    eps = _BOUND_EPS * max(1.0, c)
    rng = np.random.default_rng(cfg.seed)

    def decision_on_train(i: int) -> float:
        return float((alphas * y) @ gram[:, i]) + bias

    n_passes = 0
    prev_stall_bias = None
    for n_passes in range(1, cfg.max_passes + 1):
        changed = 0
        for i in range(m):
            err_i = decision_on_train(i) - y[i]
            violates = ((y[i] * err_i < -tol and alphas[i] < c - eps)
                        or (y[i] * err_i > tol and alphas[i] > eps))
            if not violates:
                continue
            for j in rng.permutation(m):
                if j == i:
                    continue
                step = _pair_step(alphas, y, gram, bias, i, int(j), err_i, c)
                if step is not None:
                    bias = step
                    changed += 1
                    break
        if changed:
            prev_stall_bias = None
            continue
        # Pair steps exhausted. The incrementally-updated bias can drift off
        # the KKT-feasible interval and mask remaining progress, so place it
        # from the current alphas and resweep; stop once that stops helping.
        bias = _kkt_bias(alphas, y, gram, c)
        if _count_violations(alphas, y, gram, bias, tol, c) == 0:
            break
        if prev_stall_bias is not None and abs(bias - prev_stall_bias) < 1e-12:
            break
        prev_stall_bias = bias

    bias = _kkt_bias(alphas, y, gram, c)
    violations = _count_violations(alphas, y, gram, bias, tol, c)
    sv_mask = alphas > eps
    if not np.any(sv_mask):
        sv_mask = np.ones(m, dtype=bool)  # degenerate data; keep decision = bias
    meta = TrainingMeta(C=c, tolerance=tol, max_passes=cfg.max_passes,
                        seed=cfg.seed, n_passes_run=n_passes,
                        converged=violations == 0, kkt_violations=violations)
    dim = x_matrix.shape[1]
    return SvmModel(
        kernel=kernel,
        standardizer=standardizer if standardizer is not None else Standardizer.identity(dim),
        support_vectors=x_matrix[sv_mask].copy(),
        dual_coefs=(alphas * y)[sv_mask].copy(),
        bias=float(bias),
        training_meta=meta,
    )


def _pair_step(alphas, y, gram, bias, i, j, err_i, c):
    """Attempt the analytic two-variable update; returns the new bias on
    progress, None when no step is possible for this pair."""
    a_i, a_j = alphas[i], alphas[j]
    if y[i] != y[j]:
        low, high = max(0.0, a_j - a_i), min(c, c + a_j - a_i)
    else:
        low, high = max(0.0, a_i + a_j - c), min(c, a_i + a_j)
    if high - low < _MIN_ALPHA_STEP:
        return None
    eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
    if eta >= 0:
        return None
    err_j = float((alphas * y) @ gram[:, j]) + bias - y[j]
    a_j_new = np.clip(a_j - y[j] * (err_i - err_j) / eta, low, high)
    if abs(a_j_new - a_j) < _MIN_ALPHA_STEP:
        return None
    a_i_new = a_i + y[i] * y[j] * (a_j - a_j_new)

    b1 = (bias - err_i - y[i] * (a_i_new - a_i) * gram[i, i]
          - y[j] * (a_j_new - a_j) * gram[i, j])
    b2 = (bias - err_j - y[i] * (a_i_new - a_i) * gram[i, j]
          - y[j] * (a_j_new - a_j) * gram[j, j])
    alphas[i], alphas[j] = a_i_new, a_j_new
    if 0 < a_i_new < c:
        return b1
    if 0 < a_j_new < c:
        return b2
    return (b1 + b2) / 2.0


def _kkt_bias(alphas, y, gram, c) -> float:
    """Bias consistent with the current dual variables.

    Margin-interior points pin it exactly (mean for stability); otherwise
    the bound constraints define an interval and its midpoint is used.
    """
    eps = _BOUND_EPS * max(1.0, c)
    g = (alphas * y) @ gram
    interior = (alphas > eps) & (alphas < c - eps)
    bounds = y - g
    if np.any(interior):
        return float(np.mean(bounds[interior]))
    is_lower = ((alphas <= eps) & (y > 0)) | ((alphas >= c - eps) & (y < 0))
    lowers = bounds[is_lower]
    uppers = bounds[~is_lower]
    if lowers.size == 0:
        return float(np.min(uppers))
    if uppers.size == 0:
        return float(np.max(lowers))
    return float((np.max(lowers) + np.min(uppers)) / 2.0)


def _count_violations(alphas, y, gram, bias, tol, c) -> int:
    eps = _BOUND_EPS * max(1.0, c)
    margins = y * ((alphas * y) @ gram + bias)
    at_zero = alphas <= eps
    at_c = alphas >= c - eps
    interior = ~at_zero & ~at_c
    bad = ((at_zero & (margins < 1 - tol))
           | (interior & (np.abs(margins - 1) > tol))
           | (at_c & (margins > 1 + tol)))
    return int(np.count_nonzero(bad))


def decision_value(model: SvmModel, x: np.ndarray) -> float:
    """f(x) = sum_i dual_coefs[i] K(sv_i, standardize(x)) + bias."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"expected dim {model.dim}, got {x.shape}")
    z = standardize_apply(model.standardizer, x)
    k = _kernel_matrix(model.kernel, model.support_vectors, z[None, :])[:, 0]
    return float(model.dual_coefs @ k + model.bias)


def decision_values(model: SvmModel, x_matrix: np.ndarray) -> np.ndarray:
    """Vectorized decision function over rows of x_matrix."""
    x_matrix = np.asarray(x_matrix, dtype=np.float64)
    if x_matrix.shape[-1] != model.dim:
        raise DimensionMismatch(f"expected dim {model.dim}, got {x_matrix.shape[-1]}")
    z = standardize_apply(model.standardizer, x_matrix)
    k = _kernel_matrix(model.kernel, z, model.support_vectors)
    return k @ model.dual_coefs + model.bias


def predict(model: SvmModel, x: np.ndarray) -> int:
    """sign(f(x)) with the documented fail-safe: f(x) = 0 maps to +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def dual_objective(model: SvmModel) -> float:
    """Dual objective of the stored solution, for optimality checks."""
    alphas = np.abs(model.dual_coefs)
    gram = _kernel_matrix(model.kernel, model.support_vectors, model.support_vectors)
    quad = model.dual_coefs @ gram @ model.dual_coefs
    return float(np.sum(alphas) - 0.5 * quad)
