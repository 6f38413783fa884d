"""Objective functions with diminishing returns on the unit box.

Everything here evaluates a nonnegative differentiable function
F: [0,1]^n -> R+ whose gradient is antitone (x >= y componentwise implies
grad F(x) <= grad F(y)), together with an analytic gradient oracle and a
smoothness constant L valid in the 2-norm sense.  Three closed-form
families are provided (exact multilinear extensions of small set
functions, nonpositive-Hessian quadratics, and smoothed concave-of-modular
sums), plus the test utilities used to cross-examine any instance:
a diminishing-returns residual and a central-difference gradient.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, InputError

#: inputs may stray from the unit box by round-off; they are clamped
CLAMP_TOL = 1e-12

#: smoothing floor for the concave-of-modular family (a bare square root
#: has an unbounded derivative at 0, so some floor is required for a
#: finite smoothness constant)
SQRT_FLOOR = 1e-3

_MAX_GROUND_SET = 20


def _as_point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"expected a point of dimension {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("point contains NaN or infinity")
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class DrFunction:
    """Value/gradient oracle pair for one objective instance.

    Instances are immutable and evaluation is pure, so a single instance
    may be shared freely between threads.  ``L`` bounds the Lipschitz
    constant of the gradient; ``monotone`` is True only when the gradient
    is nonnegative everywhere on the box.
    """

    n: int
    L: float
    monotone: bool
    value_fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def value(self, x) -> float:
        return float(self.value_fn(_as_point(x, self.n)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.grad_fn(_as_point(x, self.n)), dtype=float)

    def with_smoothness(self, L: float) -> "DrFunction":
        """Copy of this instance carrying a caller-supplied constant L."""
        if L < 0:
            raise InputError("smoothness constant must be nonnegative")
        return dataclasses.replace(self, L=float(L))


# --- set functions and their multilinear extensions ---------------------------


@dataclass(frozen=True, eq=False)
class SetFunction:
    """Set function on a ground set of size m, stored as a full value table.

    ``table[s]`` is the value of the subset whose bitmask is s (bit i set
    means element i is in the subset).  Ground sets are capped at 20
    elements so the table and all exhaustive checks stay exact.
    """

    m: int
    table: np.ndarray

    def __post_init__(self):
        if self.m < 0 or self.m > _MAX_GROUND_SET:
            raise CapacityError(f"ground-set size must be in [0, {_MAX_GROUND_SET}], got {self.m}")
        if self.table.shape != (1 << self.m,):
            raise InputError(f"value table must have length 2^{self.m}")
        if not np.all(np.isfinite(self.table)):
            raise InputError("value table contains NaN or infinity")
        if np.any(self.table < 0):
            raise InputError("set-function values must be nonnegative")

    def value(self, subset) -> float:
        """Value of a subset given as a bitmask or an iterable of indices."""
        if isinstance(subset, (int, np.integer)):
            mask = int(subset)
        else:
            mask = 0
            for i in subset:
                if not 0 <= int(i) < self.m:
                    raise InputError(f"element {i} outside ground set of size {self.m}")
                mask |= 1 << int(i)
        if not 0 <= mask < (1 << self.m):
            raise InputError("subset bitmask out of range")
        return float(self.table[mask])

    def max_value(self) -> float:
        return float(np.max(self.table)) if self.table.size else 0.0


def set_function_from_table(values: Sequence[float]) -> SetFunction:
    table = np.asarray(values, dtype=float)
    m = int(table.size).bit_length() - 1
    if table.size != (1 << m):
        raise InputError(f"table length {table.size} is not a power of two")
    return SetFunction(m, table)


def coverage_function(subsets: Sequence[Sequence[int]],
                      weights: Sequence[float] | None = None,
                      n_elements: int | None = None) -> SetFunction:
    """Weighted coverage: f(S) = total weight of elements covered by S.

    The ground set is the list of covering subsets; ``weights`` are per
    universe element (default all ones).
    """
    m = len(subsets)
    if m > _MAX_GROUND_SET:
        raise CapacityError(f"at most {_MAX_GROUND_SET} covering sets supported, got {m}")
    max_elt = max((max(s) for s in subsets if len(s) > 0), default=-1)
    if n_elements is None:
        n_elements = max_elt + 1
    if max_elt >= n_elements:
        raise InputError("subset references an element outside the universe")
    w = np.ones(n_elements) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n_elements,):
        raise InputError(f"need one weight per universe element ({n_elements})")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError("element weights must be finite and nonnegative")

    covered = np.zeros((m, n_elements), dtype=bool)
    for i, s in enumerate(subsets):
        covered[i, list(s)] = True
    table = np.zeros(1 << m)
    for mask in range(1 << m):
        members = [i for i in range(m) if mask >> i & 1]
        union = np.any(covered[members], axis=0) if members else np.zeros(n_elements, dtype=bool)
        table[mask] = float(w[union].sum())
    return SetFunction(m, table)


def set_is_monotone(f: SetFunction, tol: float = 1e-12) -> bool:
    """Exhaustive marginal check: adding any element never decreases f."""
    table = f.table
    for i in range(f.m):
        bit = 1 << i
        without = np.array([s for s in range(1 << f.m) if not s & bit])
        if np.any(table[without | bit] < table[without] - tol):
            return False
    return True


def set_is_submodular(f: SetFunction, tol: float = 1e-9) -> bool:
    """Pairwise marginal check, equivalent to the subset-chain definition."""
    table = f.table
    for i in range(f.m):
        for j in range(i + 1, f.m):
            bi, bj = 1 << i, 1 << j
            base = np.array([s for s in range(1 << f.m) if not s & (bi | bj)])
            lhs = table[base | bi] + table[base | bj]
            rhs = table[base | bi | bj] + table[base]
            if np.any(lhs < rhs - tol):
                return False
    return True


def _subset_weights(x: np.ndarray) -> np.ndarray:
    """Probability of each subset under independent inclusion with marginals x."""
    w = np.ones(1)
    for xi in x:
        w = np.concatenate([w * (1.0 - xi), w * xi])
    return w


def multilinear_extension(f: SetFunction, L: float | None = None) -> DrFunction:
    """Exact multilinear extension of a set function on up to 20 elements.

    The value at x is the expectation of f over the random subset that
    includes element i independently with probability x_i; the gradient
    component i is the value gap between pinning x_i to 1 and to 0.
    Unless overridden, L is set to the safe bound m^2 * max_S f(S).
    """
    if f.m > _MAX_GROUND_SET:
        raise CapacityError(f"multilinear extension supports m <= {_MAX_GROUND_SET}")
    table = f.table.copy()
    m = f.m

    def value(x: np.ndarray) -> float:
        return float(table @ _subset_weights(x))

    def grad(x: np.ndarray) -> np.ndarray:
        g = np.empty(m)
        for i in range(m):
            hi = x.copy()
            lo = x.copy()
            hi[i] = 1.0
            lo[i] = 0.0
            g[i] = float(table @ (_subset_weights(hi) - _subset_weights(lo)))
        return g

    if L is None:
        L = float(m * m) * f.max_value()
    return DrFunction(m, float(L), set_is_monotone(f), value, grad,
                      name=f"multilinear(m={m})")


# --- closed-form instance families ---------------------------------------------


def _spectral_norm(H: np.ndarray, rel_tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest singular value by power iteration on H^T H."""
    n = H.shape[0]
    B = H.T @ H
    v = 1.0 + 0.007 * np.arange(1, n + 1)  # deterministic, generically non-orthogonal
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        norm = np.linalg.norm(w)
        if norm <= 1e-300:
            return 0.0
        v = w / norm
        lam_new = float(v @ (B @ v))
        if abs(lam_new - lam) <= rel_tol * max(lam_new, 1e-300):
            return float(np.sqrt(lam_new))
        lam = lam_new
    return float(np.sqrt(lam))


def make_quadratic(H, c) -> DrFunction:
    """Quadratic instance x . c + x^T H x / 2 + d with H symmetric, H <= 0 entrywise.

    The offset d lifts the minimum over the box to zero; because the
    function is concave along every coordinate, that minimum sits at one
    of the 2^n box vertices and is found exactly by enumeration.
    """
    H = np.asarray(H, dtype=float)
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    if H.shape != (n, n):
        raise InputError(f"H must be {n}x{n} to match c")
    if not np.all(np.isfinite(H)) or not np.all(np.isfinite(c)):
        raise InputError("H and c must be finite")
    if np.any(H > 0):
        raise InputError("H must be entrywise nonpositive")
    if not np.allclose(H, H.T, atol=1e-12):
        raise InputError("H must be symmetric")
    if n > _MAX_GROUND_SET:
        raise CapacityError(f"vertex enumeration supports n <= {_MAX_GROUND_SET}")

    vmin = np.inf
    for mask in range(1 << n):
        v = np.array([(mask >> i) & 1 for i in range(n)], dtype=float)
        vmin = min(vmin, float(c @ v + 0.5 * v @ H @ v))
    d = -vmin

    def value(x: np.ndarray) -> float:
        return float(c @ x + 0.5 * x @ H @ x + d)

    def grad(x: np.ndarray) -> np.ndarray:
        return c + H @ x

    monotone = bool(np.all(c + H @ np.ones(n) >= 0.0))
    return DrFunction(n, _spectral_norm(H), monotone, value, grad, name=f"quadratic(n={n})")


def make_concave_modular(weights: Sequence[Sequence[float]], n: int | None = None) -> DrFunction:
    """Sum of sqrt(floor + w_k . x) terms, shifted to vanish at the origin."""
    ws = [np.asarray(w, dtype=float) for w in weights]
    if ws:
        n = ws[0].shape[0] if n is None else n
    elif n is None:
        raise InputError("dimension n is required when the weight list is empty")
    for w in ws:
        if w.shape != (n,):
            raise InputError("all weight vectors must share one dimension")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InputError("weight vectors must be finite and nonnegative")
        if not np.any(w > 0):
            raise InputError("weight vectors must be nonzero")

    W = np.array(ws).reshape(len(ws), n) if ws else np.zeros((0, n))
    base = len(ws) * np.sqrt(SQRT_FLOOR)
    L = float(np.sum(np.sum(W * W, axis=1)) / (4.0 * SQRT_FLOOR ** 1.5))

    def value(x: np.ndarray) -> float:
        return float(np.sum(np.sqrt(SQRT_FLOOR + W @ x)) - base)

    def grad(x: np.ndarray) -> np.ndarray:
        if W.shape[0] == 0:
            return np.zeros(n)
        return (W / (2.0 * np.sqrt(SQRT_FLOOR + W @ x))[:, None]).sum(axis=0)

    return DrFunction(int(n), L, True, value, grad, name=f"concave_modular(k={len(ws)})")


# --- verification utilities -----------------------------------------------------


def check_dr_inequality(f: DrFunction, x, y) -> float:
    """Residual of the diminishing-returns inequality at the pair (x, y).

    Returns <grad F(x), y - x> - [F(max(x,y)) + F(min(x,y)) - 2 F(x)],
    which is nonnegative (up to round-off) for every valid instance.
    """
    x = _as_point(x, f.n)
    y = _as_point(y, f.n)
    lhs = float(f.grad(x) @ (y - x))
    rhs = f.value(np.maximum(x, y)) + f.value(np.minimum(x, y)) - 2.0 * f.value(x)
    return lhs - rhs


def finite_diff_grad(f: DrFunction, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient with the stencil clamped into the box.

    Near the boundary the stencil degenerates to a one-sided difference;
    the divisor always matches the actual spread of the stencil points.
    """
    if h <= 0:
        raise InputError(f"finite-difference step must be positive, got {h}")
    x = _as_point(x, f.n)
    g = np.empty(f.n)
    for i in range(f.n):
        hi = x.copy()
        lo = x.copy()
        hi[i] = min(x[i] + h, 1.0)
        lo[i] = max(x[i] - h, 0.0)
        g[i] = (f.value(hi) - f.value(lo)) / (hi[i] - lo[i])
    return g


def empirical_smoothness(f: DrFunction, samples: int = 100, seed: int = 0) -> float:
    """Largest observed gradient-difference ratio over random pairs in the box."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        x = rng.uniform(size=f.n)
        y = rng.uniform(size=f.n)
        dist = float(np.linalg.norm(y - x))
        if dist < 1e-12:
            continue
        best = max(best, float(np.linalg.norm(f.grad(y) - f.grad(x))) / dist)
    return best


# --- JSON loading ----------------------------------------------------------------

INSTANCE_KINDS = ("coverage", "quadratic", "concave_modular", "table")


def instance_from_json(obj: dict) -> tuple[DrFunction, SetFunction | None]:
    """Build an instance from its JSON description.

    Returns the objective together with the underlying set function for
    the coverage and table kinds (None for the smooth families).  An
    optional "L" field overrides the default smoothness constant of the
    set-function kinds.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("instance JSON must be an object with a 'kind' key")
    kind = obj["kind"]
    if kind == "coverage":
        sf = coverage_function(obj["subsets"], obj.get("weights"), obj.get("n_elements"))
        L = obj.get("L")
        return multilinear_extension(sf, None if L is None else float(L)), sf
    if kind == "table":
        sf = set_function_from_table(obj["values"])
        if "m" in obj and int(obj["m"]) != sf.m:
            raise InputError(f"declared m={obj['m']} does not match table length 2^{sf.m}")
        L = obj.get("L")
        return multilinear_extension(sf, None if L is None else float(L)), sf
    if kind == "quadratic":
        return make_quadratic(obj["H"], obj["c"]), None
    if kind == "concave_modular":
        n = obj.get("n")
        return make_concave_modular(obj["weights"], None if n is None else int(n)), None
    raise InputError(f"unknown instance kind {kind!r}; expected one of {INSTANCE_KINDS}")
