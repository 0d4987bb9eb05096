"""
Infinite-width kernels by depth-wise composition, and their spectra.

Kernels are propagated on the strict upper triangle only; the diagonal of a
unit-diagonal kernel stays exactly 1 and the NTK diagonal is the closed-form
geometric sum, so every diagonal entry is bit-identical.

Public API:
- GramMatrix
- gram_from_inputs(X) -> GramMatrix
- propagate_kernel(K, d, L) -> GramMatrix
- propagate_trace(K, d, L) -> list[GramMatrix]
- compose_values(d, values, L) -> ndarray
- ntk_matrix(K, d, L) -> GramMatrix
- ntk_diagonal(d, L) -> float
- NtkSeries
- Spectrum, spectrum(K) -> Spectrum
- eigen_lb_check(f, K, delta) -> dict
- separation_delta(K) / nonsingularity_delta(K)
- gershgorin_check(K) / hadamard_psd_check(A, B)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from deepcond.dual.duals import DualActivation, dual_derivative_eval, dual_eval
from deepcond.errors import DomainError, NumericalError

log = logging.getLogger("deepcond.conditioning")

MAX_N = 4096
SYMMETRY_TOL = 1e-12
UNIT_TOL = 1e-9
CLAMP_TOL = 1e-9
DUAL_UNIT_TOL = 1e-6
EIGEN_LB_TOL = 1e-9
GERSHGORIN_TOL = 1e-9
HADAMARD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    unit_diagonal: bool

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def from_entries(cls, entries, unit_diagonal: Optional[bool] = None) -> "GramMatrix":
        """Validate symmetry and shape; infer the unit-diagonal flag when not given."""
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DomainError("kernel matrix must be square and non-empty", {"shape": list(a.shape)})
        if a.shape[0] > MAX_N:
            raise DomainError(f"n must not exceed {MAX_N}", {"n": a.shape[0]})
        if not np.all(np.isfinite(a)):
            raise DomainError("kernel matrix has non-finite entries")
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(a)))):
            raise DomainError("kernel matrix is not symmetric", {"max_asymmetry": asym})
        a = (a + a.T) / 2.0
        on_sphere = bool(np.all(np.abs(np.diag(a) - 1.0) <= UNIT_TOL))
        if unit_diagonal is None:
            unit_diagonal = on_sphere
        if unit_diagonal:
            if not on_sphere:
                raise DomainError("unit-diagonal kernel has diagonal entries != 1",
                                  {"max_deviation": float(np.max(np.abs(np.diag(a) - 1.0)))})
            if np.max(np.abs(a)) > 1.0 + UNIT_TOL:
                raise DomainError("unit-diagonal kernel has entries outside [-1, 1]")
            a = np.clip(a, -1.0, 1.0)
            np.fill_diagonal(a, 1.0)
        a.setflags(write=False)
        return cls(entries=a, unit_diagonal=bool(unit_diagonal))

    def off_diagonal(self) -> np.ndarray:
        iu = np.triu_indices(self.n, 1)
        return self.entries[iu]


def gram_from_inputs(X) -> GramMatrix:
    x = np.atleast_2d(np.asarray(X, dtype=float))
    return GramMatrix.from_entries(x @ x.T)


def _from_upper(values: np.ndarray, n: int, diagonal: float) -> np.ndarray:
    out = np.empty((n, n))
    iu = np.triu_indices(n, 1)
    out[iu] = values
    out[(iu[1], iu[0])] = values
    np.fill_diagonal(out, diagonal)
    return out


def _require_kernel_dual(K: GramMatrix, d: DualActivation) -> None:
    if not K.unit_diagonal:
        raise DomainError("composition needs unit-norm inputs; use general_norm_propagate")
    top = float(dual_eval(d, 1.0))
    if abs(top - 1.0) > DUAL_UNIT_TOL:
        raise DomainError(f"activation {d.name!r} is not square-normalized",
                          {"sigma_hat_one": top})


def _step(d: DualActivation, values: np.ndarray) -> np.ndarray:
    """One application of sigma_hat with clamping of float drift."""
    out = np.asarray(dual_eval(d, values), dtype=float)
    excursion = float(np.max(np.abs(out) - 1.0, initial=0.0))
    if excursion > CLAMP_TOL:
        raise NumericalError("composed correlation left [-1, 1]", {"excursion": excursion})
    if excursion > 0:
        log.debug("clamped correlation drift %.3e", excursion)
    return np.clip(out, -1.0, 1.0)


def compose_values(d: DualActivation, values, L: int) -> np.ndarray:
    """sigma_hat^(L) applied entrywise to correlations of unit-norm inputs (e.g. a cross-kernel block)."""
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    out = np.clip(np.asarray(values, dtype=float), -1.0, 1.0)
    for _ in range(L):
        out = _step(d, out)
    return out


def propagate_trace(K: GramMatrix, d: DualActivation, L: int) -> List[GramMatrix]:
    """Kernels at depths 0..L."""
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    _require_kernel_dual(K, d)
    n = K.n
    values = K.off_diagonal()
    out = [K]
    for _ in range(L):
        values = _step(d, values)
        m = _from_upper(values, n, 1.0)
        m.setflags(write=False)
        out.append(GramMatrix(entries=m, unit_diagonal=True))
    return out


def propagate_kernel(K: GramMatrix, d: DualActivation, L: int) -> GramMatrix:
    return propagate_trace(K, d, L)[-1]


def ntk_diagonal(d: DualActivation, L: int) -> float:
    """(D^(L+1) - 1)/(D - 1) with D = sigma_hat'(1); L + 1 when D = 1."""
    slope = float(dual_derivative_eval(d, 1.0))
    if not np.isfinite(slope):
        raise DomainError(f"activation {d.name!r} has unbounded sigma_hat'(1); its NTK diverges",
                          {"derivative_at_one": slope})
    if abs(slope - 1.0) <= 1e-12:
        return float(L + 1)
    return (slope ** (L + 1) - 1.0) / (slope - 1.0)


def _ntk_values(d: DualActivation, rho: np.ndarray, L: int) -> np.ndarray:
    sigma = rho.copy()
    theta = rho.copy()
    for _ in range(L):
        slope = np.asarray(dual_derivative_eval(d, sigma), dtype=float)
        sigma = _step(d, sigma)
        theta = theta * slope + sigma
    return theta


def ntk_matrix(K: GramMatrix, d: DualActivation, L: int) -> GramMatrix:
    """Theta_l = Theta_{l-1} sigma_hat'(Sigma_{l-1}) + Sigma_l, Sigma_0 = Theta_0 = K."""
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    _require_kernel_dual(K, d)
    diag = ntk_diagonal(d, L)
    values = _ntk_values(d, K.off_diagonal(), L)
    m = _from_upper(values, K.n, diag)
    m.setflags(write=False)
    return GramMatrix(entries=m, unit_diagonal=False)


class NtkSeries:
    """The depth-L NTK as a function of the input correlation."""

    def __init__(self, dual: DualActivation, depth: int):
        if depth < 0:
            raise DomainError("depth must be non-negative", {"L": depth})
        self.dual = dual
        self.depth = depth
        self.name = f"ntk[{dual.name}, L={depth}]"

    def __call__(self, rho):
        r = np.asarray(rho, dtype=float)
        out = _ntk_values(self.dual, np.atleast_1d(r).ravel(), self.depth).reshape(r.shape)
        return float(out) if out.ndim == 0 else out

    def coefficients(self, degree: int = 30) -> np.ndarray:
        """Power-series coefficients up to `degree`, from the truncated dual series."""
        b = np.asarray(self.dual.squared, dtype=float)
        db = b[1:] * np.arange(1, b.size)
        identity = np.zeros(degree + 1)
        identity[1] = 1.0
        sigma, theta = identity.copy(), identity.copy()
        for _ in range(self.depth):
            slope = _compose_series(db, sigma, degree)
            sigma = _compose_series(b, sigma, degree)
            theta = P.polymul(theta, slope)[: degree + 1] + sigma
        return theta[: degree + 1]


def _compose_series(outer: np.ndarray, inner: np.ndarray, degree: int) -> np.ndarray:
    acc = np.zeros(degree + 1)
    acc[0] = outer[-1]
    for coef in outer[-2::-1]:
        acc = P.polymul(acc, inner)[: degree + 1]
        acc = np.pad(acc, (0, degree + 1 - acc.size))
        acc[0] += coef
    return acc


# ==================================
# Spectra
# ==================================
@dataclass(frozen=True, eq=False)
class Spectrum:
    lambda_min: float
    lambda_max: float
    kappa: float
    eigenvalues: np.ndarray
    degenerate: bool


def spectrum(K: Union[GramMatrix, np.ndarray]) -> Spectrum:
    """Full symmetric eigendecomposition; lambda_min <= 0 sets `degenerate` and kappa = nan."""
    a = K.entries if isinstance(K, GramMatrix) else np.asarray(K, dtype=float)
    if a.shape[0] > MAX_N:
        raise DomainError(f"n must not exceed {MAX_N}", {"n": a.shape[0]})
    try:
        eig = scipy.linalg.eigh(a, eigvals_only=True, driver="ev", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("symmetric eigensolver failed", {"reason": str(exc), "n": a.shape[0]}) from exc
    eig = np.sort(eig)
    eig.setflags(write=False)
    lo, hi = float(eig[0]), float(eig[-1])
    degenerate = lo <= 0.0
    kappa = float("nan") if degenerate else hi / lo
    return Spectrum(lambda_min=lo, lambda_max=hi, kappa=kappa, eigenvalues=eig, degenerate=degenerate)


def separation_delta(K: GramMatrix) -> Tuple[float, Optional[Tuple[int, int]]]:
    """1 - max off-diagonal |K_ij| and the attaining pair (None when n = 1)."""
    if K.n == 1:
        return 1.0, None
    iu = np.triu_indices(K.n, 1)
    off = np.abs(K.entries[iu])
    k = int(np.argmax(off))
    return 1.0 - float(off[k]), (int(iu[0][k]), int(iu[1][k]))


def nonsingularity_delta(K: GramMatrix) -> float:
    return spectrum(K).lambda_min


def _apply(f, a: np.ndarray) -> np.ndarray:
    if isinstance(f, DualActivation):
        return np.asarray(dual_eval(f, a), dtype=float)
    return np.asarray(f(a), dtype=float)


def _value_at(f, r: float) -> float:
    return float(_apply(f, np.array([r]))[0])


def eigen_lb_check(f: Union[DualActivation, NtkSeries], K: GramMatrix, delta: float) -> Dict[str, Any]:
    """lambda_min(f[K]) >= f(1) - f(1 - delta) for K >= delta I with unit diagonal."""
    if not K.unit_diagonal:
        raise DomainError("eigenvalue lower bound needs a unit-diagonal kernel")
    if not 0.0 < delta <= 1.0:
        raise DomainError("delta must lie in (0, 1]", {"delta": delta})
    base = spectrum(K).lambda_min
    if base < delta - SYMMETRY_TOL:
        raise DomainError("kernel does not dominate delta * I", {"lambda_min": base, "delta": delta})
    image = _apply(f, np.asarray(K.entries))
    lhs = spectrum((image + image.T) / 2.0).lambda_min
    rhs = _value_at(f, 1.0) - _value_at(f, 1.0 - delta)
    holds = lhs >= rhs - EIGEN_LB_TOL
    if not holds:
        log.warning("eigenvalue lower bound violated: %.6g < %.6g", lhs, rhs)
    return {"ok": holds, "holds": holds, "lhs_min": lhs, "rhs_bound": rhs, "delta": delta}


def gershgorin_check(K: GramMatrix, eig: Optional[Spectrum] = None) -> Dict[str, Any]:
    """Eigenvalues of K / K_11 lie in 1 +/- (n-1) max|offdiag|; `eig` may pass spectrum(K)."""
    a = np.asarray(K.entries)
    scale = float(a[0, 0])
    if scale <= 0:
        raise DomainError("kernel diagonal must be positive", {"K11": scale})
    normalized = a / scale
    spread = (K.n - 1) * (float(np.max(np.abs(normalized[np.triu_indices(K.n, 1)]))) if K.n > 1 else 0.0)
    if eig is None:
        eig = spectrum(normalized)
        lo, hi = eig.lambda_min, eig.lambda_max
    else:
        # a precomputed spectrum is of K itself
        lo, hi = eig.lambda_min / scale, eig.lambda_max / scale
    issues = []
    if hi > 1.0 + spread + GERSHGORIN_TOL:
        issues.append({"bound": "lambda_max", "value": hi, "limit": 1.0 + spread})
    if lo < 1.0 - spread - GERSHGORIN_TOL:
        issues.append({"bound": "lambda_min", "value": lo, "limit": 1.0 - spread})
    return {"ok": not issues, "issues": issues, "spread": spread}


def hadamard_psd_check(A, B) -> Dict[str, Any]:
    """The entrywise product of two PSD matrices is PSD."""
    a, b = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    for label, m in (("A", a), ("B", b)):
        if spectrum(m).lambda_min < -HADAMARD_TOL:
            raise DomainError(f"{label} is not positive semidefinite")
    lo = spectrum(a * b).lambda_min
    return {"ok": lo >= -HADAMARD_TOL, "lambda_min": lo}
