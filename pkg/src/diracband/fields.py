"""Trigonometric fields over a lattice, smoothing measures, and potentials.

Everything here is a finitely supported Fourier series indexed by reciprocal
coefficient vectors N: scalar, vector (C^n) or matrix (C^MxM) valued.  The
two workhorse operations are

* `averaged_potential`: the direction average of a vector field along a
  lattice vector gamma combined with a line mollification along a transverse
  unit vector et.  In Fourier form it keeps only modes orthogonal to gamma
  and multiplies each by the measure transform at 2 pi (N, et).
* `condition_value`: a bracket for the key smallness quantity
  |gamma| / pi * sup over transverse unit et of the sup-norm of
  (avg A, et) + i (avg A, e); below 1 the averaged field is weak enough for
  the lower-bound machinery downstream.

Sup-norms are always reported as brackets (grid maximum, coefficient sum):
lo <= true sup <= hi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .clifford import CliffordRep, class_flags
from .lattice import Lattice
from .util import check_unit, gauss_legendre_panels, golden_max, orthonormal_complement

KINDS = ("scalar", "vector", "matrix")


def _coeff_norm(kind: str, value) -> float:
    if kind == "scalar":
        return abs(complex(value))
    if kind == "vector":
        return float(np.linalg.norm(value))
    return float(np.linalg.norm(value, ord=2))


class FourierField:
    """Finitely supported Fourier series over the reciprocal lattice.

    coeffs maps integer coefficient tuples N to values: complex scalars,
    complex (n,) vectors or complex (dim, dim) matrices.  `real=True` asserts
    the conjugate symmetry c(-N) = conj(c(N)) (real-valued field);
    `hermitian=True` asserts c(-N) = c(N)^H (Hermitian-matrix-valued field).
    Keys are stored sorted, so iteration order and floating-point sums are
    reproducible.
    """

    def __init__(self, lattice: Lattice, kind: str, coeffs: dict,
                 real: bool = False, hermitian: bool = False,
                 dim: Optional[int] = None) -> None:
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.lattice = lattice
        self.kind = kind
        n = lattice.n
        if kind == "vector":
            dim = n if dim is None else dim
            if dim != n:
                raise ValueError("vector fields must have one component per axis")
        if kind == "matrix" and dim is None:
            raise ValueError("matrix fields need an explicit dim")
        self.dim = dim
        store = {}
        for key in sorted(tuple(int(c) for c in k) for k in coeffs):
            raw = coeffs[key]  # int tuples hash-compare equal to numpy-int tuples
            if len(key) != n:
                raise ValueError(f"coefficient index {key} has wrong length")
            if kind == "scalar":
                val = complex(raw)
            else:
                val = np.asarray(raw, dtype=complex)
                want = (dim,) if kind == "vector" else (dim, dim)
                if val.shape != want:
                    raise ValueError(f"coefficient at {key} must have shape {want}")
                val = val.copy()
                val.flags.writeable = False
            store[tuple(key)] = val
        self.coeffs = store
        self.real = bool(real)
        self.hermitian = bool(hermitian)
        if self.real:
            self._check_pair_symmetry(lambda v: np.conj(v), "real-valued")
        if self.hermitian:
            if kind != "matrix":
                raise ValueError("hermitian flag applies to matrix fields")
            self._check_pair_symmetry(lambda v: np.conj(v).T, "Hermitian-valued")

    def _check_pair_symmetry(self, mate: Callable, label: str) -> None:
        for key, val in self.coeffs.items():
            neg = tuple(-c for c in key)
            other = self.coeff(neg)
            if np.max(np.abs(np.asarray(other) - mate(np.asarray(val)))) > 1e-12:
                raise ValueError(f"coefficients violate the {label} symmetry at {key}")

    # -- basic queries -----------------------------------------------------

    def support(self) -> tuple:
        return tuple(self.coeffs.keys())

    def is_empty(self) -> bool:
        return not self.coeffs

    def support_radius(self) -> float:
        """max |2 pi N| over the support (0 for the empty field)."""
        if not self.coeffs:
            return 0.0
        vecs = self.lattice.dual_point(np.array(list(self.coeffs), dtype=float))
        return float(2.0 * math.pi * np.max(np.linalg.norm(vecs, axis=1)))

    def _zero_value(self):
        if self.kind == "scalar":
            return 0.0j
        if self.kind == "vector":
            return np.zeros(self.dim, dtype=complex)
        return np.zeros((self.dim, self.dim), dtype=complex)

    def coeff(self, key):
        return self.coeffs.get(tuple(int(c) for c in key), self._zero_value())

    def mean(self):
        """Zeroth Fourier coefficient (the cell average)."""
        return self.coeff((0,) * self.lattice.n)

    # -- evaluation --------------------------------------------------------

    def _stacked(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.array(list(self.coeffs), dtype=np.int64)
        vals = np.array([self.coeffs[tuple(k)] for k in keys], dtype=complex)
        return keys, vals

    def evaluate(self, points: np.ndarray):
        """Synthesise the series at one point (n,) or a batch (P, n).

        Real-flagged fields return real arrays (the imaginary residue is a
        roundoff quantity and is dropped).
        """
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = points[None, :] if single else points
        if self.is_empty():
            shape = (pts.shape[0],) if self.kind == "scalar" else (
                (pts.shape[0], self.dim) if self.kind == "vector"
                else (pts.shape[0], self.dim, self.dim))
            out = np.zeros(shape, dtype=float if self.real else complex)
            return out[0] if single else out
        keys, vals = self._stacked()
        nvecs = keys @ self.lattice.reciprocal
        phases = np.exp(2.0j * math.pi * (nvecs @ pts.T))  # (S, P)
        out = np.tensordot(phases.T, vals, axes=(1, 0))
        if self.real:
            out = out.real
        return out[0] if single else out

    def evaluate_cell_grid(self, grid_per_axis: int):
        """Values on the uniform fractional grid of the period cell.

        Only the integer coefficients enter: x = sum xi_j E_j gives
        (N, x) = sum m_j xi_j.
        """
        n = self.lattice.n
        m = int(grid_per_axis)
        if m < 1:
            raise ValueError("grid_per_axis must be positive")
        if self.is_empty():
            shape = (m ** n,) if self.kind == "scalar" else (
                (m ** n, self.dim) if self.kind == "vector"
                else (m ** n, self.dim, self.dim))
            return np.zeros(shape, dtype=float if self.real else complex)
        keys, vals = self._stacked()
        axes = [np.arange(m) / m] * n
        mesh = np.meshgrid(*axes, indexing="ij")
        xi = np.stack([g.ravel() for g in mesh], axis=1)  # (G, n)
        phases = np.exp(2.0j * math.pi * (keys @ xi.T))  # (S, G)
        out = np.tensordot(phases.T, vals, axes=(1, 0))
        if self.real:
            out = out.real
        return out

    # -- arithmetic --------------------------------------------------------

    def _binary(self, other: "FourierField", sign: float) -> "FourierField":
        if not isinstance(other, FourierField):
            raise TypeError("can only combine FourierField instances")
        if other.kind != self.kind or other.lattice is not self.lattice and \
                not np.array_equal(other.lattice.basis, self.lattice.basis):
            raise ValueError("fields must share kind and lattice")
        out = {}
        for key in sorted(set(self.coeffs) | set(other.coeffs)):
            out[key] = np.asarray(self.coeff(key)) + sign * np.asarray(other.coeff(key))
        return FourierField(self.lattice, self.kind, out,
                            real=self.real and other.real,
                            hermitian=self.hermitian and other.hermitian,
                            dim=self.dim)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)


def zero_field(lattice: Lattice, kind: str, dim: Optional[int] = None,
               real: bool = True) -> FourierField:
    hermitian = kind == "matrix"
    return FourierField(lattice, kind, {}, real=real, hermitian=hermitian, dim=dim)


# ---------------------------------------------------------------------------
# smoothing measures
# ---------------------------------------------------------------------------

def _bump_ramp(s):
    """Smooth monotone 0 -> 1 ramp; exactly 0 for s <= 0 and 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s >= 1.0] = 1.0
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        a = np.exp(-1.0 / sm)
        b = np.exp(-1.0 / (1.0 - sm))
        out[mid] = a / (a + b)
    return out


def _bump_ramp_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        a = np.exp(-1.0 / sm)
        b = np.exp(-1.0 / (1.0 - sm))
        da = a / sm ** 2
        db = b / (1.0 - sm) ** 2
        out[mid] = (da * b + a * db) / (a + b) ** 2
    return out


@dataclass(frozen=True)
class MeasureSpec:
    """Even measure on the line described through its Fourier transform.

    The transform equals 1 on [-2 pi h, 2 pi h].  `dirac` is the unit point
    mass (transform identically 1; any plateau radius is valid, stored as
    +inf by default).  `plateau` has a smooth even transform that is 1 up to
    2 pi h and 0 beyond 2 pi h1, built from the standard exp(-1/s) ramp; its
    total variation is estimated by integrating |density| of the synthesised
    inverse transform and is recorded in norm_bound.
    """

    kind: str
    h: float
    h1: Optional[float]
    norm_bound: float
    abs_sup: float = 1.0

    @staticmethod
    def dirac(h: float = math.inf) -> "MeasureSpec":
        if h <= 0:
            raise ValueError("plateau radius must be positive")
        return MeasureSpec(kind="dirac", h=float(h), h1=None, norm_bound=1.0)

    @staticmethod
    def plateau(h: float, h1: float) -> "MeasureSpec":
        if not (0.0 < h < h1):
            raise ValueError("need 0 < h < h1")
        norm = _plateau_norm(float(h), float(h1))
        return MeasureSpec(kind="plateau", h=float(h), h1=float(h1),
                           norm_bound=norm)

    def transform(self, p):
        """Fourier transform evaluated at p (vectorised)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "dirac":
            return np.ones_like(p)
        lo = 2.0 * math.pi * self.h
        hi = 2.0 * math.pi * self.h1
        return _bump_ramp((hi - np.abs(p)) / (hi - lo))

    def density(self, t):
        """Synthesised density of the plateau measure (dirac has none)."""
        if self.kind != "plateau":
            raise ValueError("only the plateau measure has a density")
        return _plateau_density(self.h, self.h1, np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "h": None if math.isinf(self.h) else self.h,
                "h1": self.h1, "norm_bound": self.norm_bound}


def _plateau_density(h: float, h1: float, t: np.ndarray) -> np.ndarray:
    hi = 2.0 * math.pi * h1
    lo = 2.0 * math.pi * h
    # enough panels to resolve the oscillation cos(p t) over [0, hi]
    tmax = float(np.max(np.abs(t))) if t.size else 1.0
    panels = int(max(24, math.ceil(1.5 * hi * max(tmax, 1.0) / (2.0 * math.pi)) + 8))
    nodes, weights = gauss_legendre_panels(0.0, hi, panels)
    vals = _bump_ramp((hi - nodes) / (hi - lo))
    # 1/pi * integral of transform * cos(p t) dp
    return (np.cos(np.outer(t, nodes)) @ (weights * vals)) / math.pi


@lru_cache(maxsize=32)
def _plateau_norm(h: float, h1: float) -> float:
    """Total variation of the plateau measure: integral of |density|.

    |density| is not smooth across its zeros, so each block is split at
    bracketed sign changes and the sign-definite pieces are integrated
    separately.
    """

    def point(t: float) -> float:
        return float(_plateau_density(h, h1, np.array([t]))[0])

    total = 0.0
    step = max(2.0, 4.0 / h1)
    t0 = 0.0
    quiet = 0
    while t0 < 400.0 * step:
        t1 = t0 + step
        grid = np.linspace(t0, t1, 129)
        vals = _plateau_density(h, h1, grid)
        # zeros can land exactly on grid points (their value is then pure
        # roundoff of either sign): snap those to cuts, and bracket a zero
        # only between decisively signed neighbours
        eps = 1e-13 * max(1.0, float(np.max(np.abs(vals))))
        cuts = [float(g) for g in grid[1:-1][np.abs(vals[1:-1]) <= eps]]
        for i in np.nonzero((np.abs(vals[:-1]) > eps) & (np.abs(vals[1:]) > eps)
                            & (np.sign(vals[:-1]) != np.sign(vals[1:])))[0]:
            fa, fb = point(grid[i]), point(grid[i + 1])
            if fa * fb < 0.0:
                cuts.append(brentq(point, grid[i], grid[i + 1], xtol=1e-13))
            else:
                cuts.append(0.5 * (grid[i] + grid[i + 1]))
        cuts = [t0] + sorted(cuts) + [t1]
        part = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            nodes, weights = gauss_legendre_panels(a, b, panels=2, order=12)
            part += abs(float(np.sum(weights * _plateau_density(h, h1, nodes))))
        total += part
        t0 = t1
        if part < 1e-10 * max(total, 1.0):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    return 2.0 * total


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

class PotentialSet:
    """Vector potential A plus the two matrix potentials, with their classes.

    Every V0 coefficient must commute with the first n generators and every
    V1 coefficient must anticommute with them (the zero matrix does both).
    `composite` packs everything into one matrix-valued field
    V0 + V1 - sum_j A_j alpha_j, which is how the potential enters a fiber.
    """

    def __init__(self, A: FourierField, V0: FourierField, V1: FourierField,
                 rep: CliffordRep) -> None:
        if A.kind != "vector":
            raise ValueError("A must be a vector field")
        if V0.kind != "matrix" or V1.kind != "matrix":
            raise ValueError("V0 and V1 must be matrix fields")
        if V0.dim != rep.M or V1.dim != rep.M:
            raise ValueError(f"matrix potentials must act on C^{rep.M}")
        if A.lattice.n != rep.n:
            raise ValueError("field dimension and generator count disagree")
        for name, field, idx in (("V0", V0, 0), ("V1", V1, 1)):
            for key, val in field.coeffs.items():
                commutes, anticommutes = class_flags(val, rep)
                ok = commutes if idx == 0 else anticommutes
                if not ok:
                    raise ValueError(
                        f"{name} coefficient at {key} is not in class s{idx}")
        self.A = A
        self.V0 = V0
        self.V1 = V1
        self.rep = rep
        self.lattice = A.lattice

    @classmethod
    def zero(cls, lattice: Lattice, rep: CliffordRep) -> "PotentialSet":
        return cls(zero_field(lattice, "vector"),
                   zero_field(lattice, "matrix", dim=rep.M),
                   zero_field(lattice, "matrix", dim=rep.M), rep)

    @property
    def is_empty(self) -> bool:
        return self.A.is_empty() and self.V0.is_empty() and self.V1.is_empty()

    def composite(self) -> FourierField:
        rep = self.rep
        out = {}
        keys = sorted(set(self.A.coeffs) | set(self.V0.coeffs) | set(self.V1.coeffs))
        for key in keys:
            val = np.zeros((rep.M, rep.M), dtype=complex)
            val += np.asarray(self.V0.coeff(key))
            val += np.asarray(self.V1.coeff(key))
            a = np.asarray(self.A.coeff(key))
            for j in range(rep.n):
                val -= a[j] * rep.alphas[j]
            out[key] = val
        return FourierField(self.lattice, "matrix", out, dim=rep.M)

    def support_radius(self) -> float:
        return max(self.A.support_radius(), self.V0.support_radius(),
                   self.V1.support_radius())


def sup_norm(field: FourierField, grid_per_axis: Optional[int] = None
             ) -> tuple[float, float]:
    """Bracket (lo, hi) for the sup of the pointwise norm of the field.

    hi is the coefficient-norm sum (a rigorous upper bound); lo is the
    maximum over a uniform cell grid (a rigorous lower bound).  Pointwise
    norms: |.| for scalars, Euclidean for vectors, spectral for matrices.
    """
    if field.is_empty():
        return 0.0, 0.0
    hi = 0.0
    for val in field.coeffs.values():
        hi += _coeff_norm(field.kind, val)
    if grid_per_axis is None:
        keys = np.array(list(field.coeffs), dtype=np.int64)
        span = int(np.max(np.max(keys, axis=0) - np.min(keys, axis=0)))
        grid_per_axis = int(min(33, max(2 * span + 1, 9)))
    vals = field.evaluate_cell_grid(grid_per_axis)
    if field.kind == "scalar":
        lo = float(np.max(np.abs(vals)))
    elif field.kind == "vector":
        lo = float(np.max(np.linalg.norm(vals, axis=1)))
    else:
        lo = float(np.max(np.linalg.svd(vals, compute_uv=False)[:, 0]))
    return lo, hi


def w_norm(pot: PotentialSet, grid_per_axis: Optional[int] = None) -> float:
    """Certified upper bound n * sup|A| + sup|V0| + sup|V1| on the potential size."""
    n = pot.rep.n
    return (n * sup_norm(pot.A, grid_per_axis)[1]
            + sup_norm(pot.V0, grid_per_axis)[1]
            + sup_norm(pot.V1, grid_per_axis)[1])


# ---------------------------------------------------------------------------
# direction averaging
# ---------------------------------------------------------------------------

def averaged_potential(A: FourierField, gamma_coeffs, measure: MeasureSpec,
                       et: np.ndarray) -> FourierField:
    """Average A along the lattice vector gamma and mollify along et.

    Fourier coefficients: modes with (N, gamma) != 0 (an exact integer test
    on the coefficient vectors) are annihilated; surviving modes are scaled
    by the measure transform at 2 pi (N, et).  Requires et to be a unit
    vector orthogonal to gamma.
    """
    if A.kind != "vector":
        raise ValueError("averaging applies to vector fields")
    lattice = A.lattice
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    if gnorm == 0.0:
        raise ValueError("gamma must be nonzero")
    et = check_unit(np.asarray(et, dtype=float), "et")
    if abs(float(np.dot(et, gvec))) > 1e-10 * gnorm:
        raise ValueError("et must be orthogonal to gamma")
    out = {}
    for key, val in A.coeffs.items():
        if int(np.dot(np.asarray(key, dtype=np.int64), gc)) != 0:
            continue
        nvec = lattice.dual_point(key)
        mult = float(measure.transform(2.0 * math.pi * float(np.dot(nvec, et))))
        if mult == 0.0:
            continue
        out[key] = mult * np.asarray(val)
    return FourierField(lattice, "vector", out, real=A.real)


@dataclass(frozen=True)
class ConditionValue:
    """Bracket for the averaged-field smallness quantity."""

    theta_lo: float
    theta_hi: float
    best_et: tuple
    f_lo: float
    f_hi: float
    samples: int

    @property
    def holds(self) -> bool:
        return self.theta_hi < 1.0

    @property
    def excluded(self) -> bool:
        return self.theta_lo >= 1.0

    def to_dict(self) -> dict:
        return {"theta_lo": self.theta_lo, "theta_hi": self.theta_hi,
                "best_et": [float(c) for c in self.best_et],
                "f_lo": self.f_lo, "f_hi": self.f_hi, "samples": self.samples}


def _mean_size(A: FourierField) -> float:
    return _coeff_norm(A.kind, A.mean())


def _orthogonal_support(A: FourierField, gc: np.ndarray):
    """Nonzero support modes orthogonal to gamma, in stored (sorted) order."""
    keys = [k for k in A.coeffs
            if int(np.dot(np.asarray(k, dtype=np.int64), gc)) == 0 and any(k)]
    if not keys:
        return None, None, None
    karr = np.array(keys, dtype=np.int64)
    vals = np.array([np.asarray(A.coeffs[k]) for k in keys])  # (S, n)
    nvecs = karr @ A.lattice.reciprocal  # (S, n)
    return karr, vals, nvecs


def _grid_phases(karr: np.ndarray, n: int, grid: int) -> np.ndarray:
    mesh = np.meshgrid(*([np.arange(grid) / grid] * n), indexing="ij")
    xi = np.stack([g.ravel() for g in mesh], axis=1)
    return np.exp(2.0j * math.pi * (karr @ xi.T))  # (S, G)


def condition_value(A: FourierField, gamma_coeffs, measure: MeasureSpec,
                    sphere_samples: int = 4096, scan_grid: int = 16,
                    refine_grid: int = 48, rng=None) -> ConditionValue:
    """Bracket the smallness quantity theta for a zero-mean vector field.

    hi comes from the coefficient sum |gamma| / pi * sum over modes
    orthogonal to gamma of sup|transform| * b_N, with b_N = |A_N| for
    real-valued fields and the slightly larger certified combination bound
    for complex-valued ones.  lo scans unit vectors et orthogonal to gamma
    (a uniform circle scan plus golden-section refinement when n = 3,
    seeded random directions otherwise) and takes grid maxima of
    |(avg A, et) + i (avg A, e)|.
    """
    if A.kind != "vector":
        raise ValueError("condition_value applies to vector fields")
    if _mean_size(A) > 1e-13:
        raise ValueError("the field must have zero mean")
    lattice = A.lattice
    n = lattice.n
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    if gnorm == 0.0:
        raise ValueError("gamma must be nonzero")
    e = gvec / gnorm

    # certified upper bound
    hi_sum = 0.0
    for key, val in sorted(A.coeffs.items()):
        ik = np.asarray(key, dtype=np.int64)
        if int(np.dot(ik, gc)) != 0 or not np.any(ik):
            continue
        v = np.asarray(val)
        if A.real:
            bound = float(np.linalg.norm(v))
        else:
            axial = complex(np.dot(v, e))
            bound = float(np.linalg.norm(v - axial * e)) + abs(axial)
        hi_sum += measure.abs_sup * bound
    f_hi = hi_sum
    theta_hi = gnorm * f_hi / math.pi

    # sampled lower bound
    karr, vals, nvecs = _orthogonal_support(A, gc)
    if karr is None:
        zero_et = orthonormal_complement(e)[0]
        return ConditionValue(0.0, 0.0, tuple(float(c) for c in zero_et),
                              0.0, 0.0, 0)
    phases = _grid_phases(karr, n, scan_grid)

    def sup_for_et(et_batch: np.ndarray, use_phases) -> np.ndarray:
        # coefficients of (avg A, et) + i (avg A, e) per sample
        mult = measure.transform(2.0 * math.pi * (nvecs @ et_batch.T))  # (S, B)
        comb = vals @ et_batch.T + 1.0j * (vals @ e)[:, None]  # (S, B)
        rows = (mult * comb).T  # (B, S)
        g = rows @ use_phases  # (B, G)
        return np.max(np.abs(g), axis=1)

    perp = orthonormal_complement(e)
    if n == 3:
        u, v = perp[0], perp[1]
        phis = np.arange(sphere_samples) * (2.0 * math.pi / sphere_samples)
        best_val, best_phi = -1.0, 0.0
        chunk = 256
        for i in range(0, sphere_samples, chunk):
            batch_phi = phis[i:i + chunk]
            ets = np.outer(np.cos(batch_phi), u) + np.outer(np.sin(batch_phi), v)
            sups = sup_for_et(ets, phases)
            j = int(np.argmax(sups))
            if sups[j] > best_val:
                best_val, best_phi = float(sups[j]), float(batch_phi[j])
        # refine around the best angle on a finer cell grid
        fphases = _grid_phases(karr, n, refine_grid)

        def objective(phi: float) -> float:
            et = math.cos(phi) * u + math.sin(phi) * v
            return float(sup_for_et(et[None, :], fphases)[0])

        width = 2.0 * math.pi / sphere_samples
        phi_star, f_best = golden_max(objective, best_phi - width, best_phi + width)
        if f_best < best_val:
            phi_star, f_best = best_phi, objective(best_phi)
        best_et = math.cos(phi_star) * u + math.sin(phi_star) * v
        f_lo = max(f_best, best_val)
        samples = sphere_samples
    else:
        rng = np.random.default_rng(0 if rng is None else rng)
        raw = rng.standard_normal((sphere_samples, n - 1))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        ets = raw @ perp
        sups = sup_for_et(ets, phases)
        j = int(np.argmax(sups))
        fphases = _grid_phases(karr, n, refine_grid)
        f_lo = float(sup_for_et(ets[j][None, :], fphases)[0])
        f_lo = max(f_lo, float(sups[j]))
        best_et = ets[j]
        samples = sphere_samples
    theta_lo = gnorm * f_lo / math.pi
    return ConditionValue(theta_lo=theta_lo, theta_hi=theta_hi,
                          best_et=tuple(float(c) for c in best_et),
                          f_lo=f_lo, f_hi=f_hi, samples=samples)


def averaged_sup_bracket(A: FourierField, gamma_coeffs, measure: MeasureSpec,
                         et: np.ndarray, grid_per_axis: int = 32
                         ) -> tuple[float, float]:
    """Bracket of sup |averaged field| (vector norm) for one fixed et."""
    av = averaged_potential(A, gamma_coeffs, measure, et)
    return sup_norm(av, grid_per_axis)
