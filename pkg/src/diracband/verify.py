"""Empirical verification harnesses for the spectral lower bounds.

Everything in this module produces EMPIRICAL certificates: statements about
dense truncations of the fiber operators on explicit mode windows and
quasimomentum grids, never proofs.  Reports carry the truncation metadata
(cutoff, mode count, grids) and, where available, closed-form cross-checks
and randomized lower-bound probes.

The three checks:

* `verify_thomas_bound`: on the face (k, gamma) = pi, scan imaginary shifts
  kappa and test sigma_min >= theta * pi / |gamma| * damping_factor; report
  the smallest shift after which the bound holds on the whole grid.
* `verify_weighted_split`: the two-zone weighted inequality; modes inside the
  critical annulus are weighted by the damped floor, the rest by their free
  factor g_minus.
* `weighted_floor`: the all-mode weighted floor (weights g_minus), whose
  value is exactly 1 for the free operator.

`condition_chain_pipeline` drives the direction searcher with the
Sobolev-weighted atomic measure built from a field's coefficients and
validates the smallness chain (sampled sup <= orthogonal coefficient sum <=
Cauchy-Schwarz split) at every sampled transverse direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clifford import CliffordRep
from .fiber import (FiberPoint, ModeSet, assemble, sigma_min, sigma_min_probe,
                    weighted_sigma_min)
from .fields import (ConditionValue, FourierField, MeasureSpec, PotentialSet,
                     averaged_potential, condition_value, sup_norm, w_norm)
from .gauge import damping_factor, default_kernel_constant
from .lattice import Lattice, SphereMeasure, find_gamma
from .util import orthonormal_complement, pmap


def k_face_grid(lattice: Lattice, gamma_coeffs, points_per_axis: int = 5
                ) -> np.ndarray:
    """Uniform grid on the face (k, gamma) = pi of the dual cell.

    Anchored at pi gamma / |gamma|^2 and spanned by the projections of the
    scaled reciprocal basis vectors onto the orthogonal complement of gamma
    (a greedy deterministic choice of n-1 independent projections).
    """
    if points_per_axis < 1:
        raise ValueError("points_per_axis must be positive")
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    if gnorm == 0.0:
        raise ValueError("gamma must be nonzero")
    e = gvec / gnorm
    base = math.pi * gvec / gnorm ** 2
    n = lattice.n

    spans: list[np.ndarray] = []
    accepted: list[np.ndarray] = []
    for row in lattice.reciprocal:
        w = 2.0 * math.pi * row
        w = w - float(np.dot(w, e)) * e
        w = w - float(np.dot(w, e)) * e  # second pass tightens orthogonality
        r = w.copy()
        for b in accepted:
            r = r - float(np.dot(r, b)) * b
        norm = float(np.linalg.norm(r))
        if norm > 1e-9 * (float(np.linalg.norm(w)) + 1.0):
            spans.append(w)
            accepted.append(r / norm)
        if len(spans) == n - 1:
            break
    if len(spans) != n - 1:
        raise ValueError("could not span the transverse section")

    m = points_per_axis
    steps = [np.arange(m) / m] * (n - 1)
    mesh = np.meshgrid(*steps, indexing="ij")
    fracs = np.stack([g.ravel() for g in mesh], axis=1)  # (m^(n-1), n-1)
    return base[None, :] + fracs @ np.array(spans)


def _default_kappas(gnorm: float, count: int = 3) -> list[float]:
    return [math.pi / gnorm * 2.0 ** j for j in range(count)]


def _default_cutoff(kappas, wn: float, ks: np.ndarray) -> float:
    kmax = float(np.max(np.linalg.norm(ks, axis=1)))
    return 3.0 * (max(kappas) + wn) + kmax


@dataclass
class ThomasBoundReport:
    gamma_coeffs: tuple
    gamma_norm: float
    theta: float
    condition: ConditionValue
    damping: float
    bound: float
    kappas: list
    k_points: list
    sigma: np.ndarray  # (len k, len kappas)
    kappa_star: Optional[float]
    cutoff: float
    mode_count: int
    dim: int
    w_bound: float
    kernel_constant: float
    free_closed_form: Optional[np.ndarray] = None
    probe: Optional[dict] = None
    refinement: Optional[dict] = None

    @property
    def holds(self) -> bool:
        return self.kappa_star is not None

    def margin_rows(self) -> list:
        rows = []
        for i, k in enumerate(self.k_points):
            for j, kap in enumerate(self.kappas):
                rows.append({"k_index": i, "kappa": kap,
                             "sigma_min": float(self.sigma[i, j]),
                             "bound": self.bound,
                             "margin": float(self.sigma[i, j]) - self.bound})
        return rows

    def to_dict(self) -> dict:
        out = {
            "verdict": "EMPIRICAL",
            "gamma_coeffs": [int(c) for c in self.gamma_coeffs],
            "gamma_norm": self.gamma_norm,
            "theta": self.theta,
            "condition": self.condition.to_dict(),
            "damping": self.damping,
            "bound": self.bound,
            "kappas": [float(k) for k in self.kappas],
            "k_points": [[float(c) for c in k] for k in self.k_points],
            "sigma_table": [[float(s) for s in row] for row in self.sigma],
            "kappa_star": self.kappa_star,
            "holds": self.holds,
            "cutoff": self.cutoff,
            "mode_count": self.mode_count,
            "dim": self.dim,
            "w_bound": self.w_bound,
            "kernel_constant": self.kernel_constant,
        }
        if self.free_closed_form is not None:
            out["free_closed_form"] = [[float(s) for s in row]
                                       for row in self.free_closed_form]
        if self.probe is not None:
            out["probe"] = self.probe
        if self.refinement is not None:
            out["refinement"] = self.refinement
        return out


def _sigma_table(lattice: Lattice, rep: CliffordRep, pot: PotentialSet,
                 ks: np.ndarray, e: np.ndarray, kappas, cutoff: float,
                 threads: int) -> tuple[np.ndarray, int, int]:
    modes = ModeSet.from_cutoff(lattice, cutoff)
    nodes = [(i, j) for i in range(ks.shape[0]) for j in range(len(kappas))]

    def solve(node):
        i, j = node
        fiber = FiberPoint(k=ks[i], e=e, kappa=float(kappas[j]))
        return sigma_min(assemble(lattice, rep, modes, fiber, pot))

    values = pmap(solve, nodes, threads)
    table = np.zeros((ks.shape[0], len(kappas)))
    for (i, j), v in zip(nodes, values):
        table[i, j] = v
    return table, len(modes), len(modes) * rep.M


def _free_table(lattice: Lattice, ks: np.ndarray, e: np.ndarray, kappas,
                cutoff: float) -> np.ndarray:
    modes = ModeSet.from_cutoff(lattice, cutoff)
    table = np.zeros((ks.shape[0], len(kappas)))
    for i in range(ks.shape[0]):
        for j, kap in enumerate(kappas):
            fiber = FiberPoint(k=ks[i], e=e, kappa=float(kap))
            gm = [math.hypot(float(np.dot(x, e)),
                             kap - math.sqrt(max(float(np.dot(x, x))
                                                 - float(np.dot(x, e)) ** 2, 0.0)))
                  for x in ks[i] + 2.0 * math.pi * modes.vectors]
            table[i, j] = min(gm)
    return table


def _kappa_star(sigma: np.ndarray, kappas, bound: float) -> Optional[float]:
    ok = np.min(sigma, axis=0) >= bound  # per kappa, worst k
    star = None
    for j in range(len(kappas) - 1, -1, -1):
        if ok[j]:
            star = float(kappas[j])
        else:
            break
    return star


def verify_thomas_bound(lattice: Lattice, rep: CliffordRep, pot: PotentialSet,
                        gamma_coeffs, measure: MeasureSpec, theta: float,
                        kappas=None, k_points_per_axis: int = 5,
                        cutoff: Optional[float] = None,
                        kernel_constant: Optional[float] = None,
                        refine_factor: Optional[float] = None,
                        probe_count: int = 0, seed: int = 0,
                        sphere_samples: int = 4096,
                        threads: int = 1) -> ThomasBoundReport:
    """Scan the shifted fibers on the face (k, gamma) = pi against the bound.

    The bound is theta * pi / |gamma| * damping_factor(A).  Preconditions:
    the smallness bracket must stay below 1 and theta must fit inside
    (0, 1 - theta_hi).  kappa_star is the smallest scanned shift from which
    the bound holds at every grid node for all larger scanned shifts.
    """
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    e = gvec / gnorm
    cond = condition_value(pot.A, gc, measure, sphere_samples=sphere_samples)
    if cond.theta_hi >= 1.0:
        raise ValueError("averaged-field bracket reaches 1; bound unavailable")
    if not 0.0 < theta < 1.0 - cond.theta_hi:
        raise ValueError("theta must lie in (0, 1 - theta_hi)")
    const = default_kernel_constant() if kernel_constant is None else kernel_constant
    damping = damping_factor(pot.A, gc, measure.h, measure, const)
    bound = theta * math.pi / gnorm * damping

    ks = k_face_grid(lattice, gc, k_points_per_axis)
    if kappas is None:
        kappas = _default_kappas(gnorm)
    kappas = [float(k) for k in kappas]
    if sorted(kappas) != kappas:
        raise ValueError("kappas must be increasing")
    wn = w_norm(pot)
    if cutoff is None:
        cutoff = _default_cutoff(kappas, wn, ks)

    sigma, mode_count, dim = _sigma_table(lattice, rep, pot, ks, e, kappas,
                                          cutoff, threads)
    report = ThomasBoundReport(
        gamma_coeffs=tuple(int(c) for c in gc), gamma_norm=gnorm, theta=theta,
        condition=cond, damping=damping, bound=bound, kappas=kappas,
        k_points=[tuple(float(c) for c in k) for k in ks], sigma=sigma,
        kappa_star=_kappa_star(sigma, kappas, bound), cutoff=float(cutoff),
        mode_count=mode_count, dim=dim, w_bound=wn, kernel_constant=const)
    if pot.is_empty:
        report.free_closed_form = _free_table(lattice, ks, e, kappas, cutoff)
    if probe_count > 0:
        i, j = np.unravel_index(int(np.argmin(sigma)), sigma.shape)
        modes = ModeSet.from_cutoff(lattice, cutoff)
        op = assemble(lattice, rep, modes,
                      FiberPoint(k=ks[i], e=e, kappa=kappas[j]), pot)
        probe_val = sigma_min_probe(op, count=probe_count, seed=seed)
        report.probe = {"k_index": int(i), "kappa": float(kappas[j]),
                        "count": probe_count, "seed": seed,
                        "probe_min": probe_val,
                        "consistent": bool(probe_val >= sigma[i, j] - 1e-9)}
    if refine_factor is not None:
        fine_cutoff = float(cutoff) * float(refine_factor)
        fine_sigma, fine_modes, fine_dim = _sigma_table(
            lattice, rep, pot, ks, e, kappas, fine_cutoff, threads)
        rel = np.abs(fine_sigma - sigma) / np.maximum(np.abs(fine_sigma), 1e-300)
        report.refinement = {
            "cutoff": fine_cutoff,
            "mode_count": fine_modes,
            "dim": fine_dim,
            "max_rel_change": float(np.max(rel)),
            "kappa_star": _kappa_star(fine_sigma, kappas, bound),
            "sigma_table": [[float(s) for s in row] for row in fine_sigma],
        }
    return report


# ---------------------------------------------------------------------------
# weighted bounds
# ---------------------------------------------------------------------------

def _annulus_mask(modes: ModeSet, k: np.ndarray, e: np.ndarray, kappa: float,
                  beta: float) -> np.ndarray:
    xs = k[None, :] + 2.0 * math.pi * modes.vectors
    axial = xs @ e
    perp = np.linalg.norm(xs - np.outer(axial, e), axis=1)
    return (np.abs(axial) < beta) & (np.abs(kappa - perp) < beta)


@dataclass
class WeightedSplitReport:
    gamma_coeffs: tuple
    gamma_norm: float
    delta: float
    beta: float
    condition: ConditionValue
    damping: float
    floor: float
    rows: list = field(default_factory=list)
    one_minus_delta_star: float = math.nan
    cutoff: float = 0.0
    mode_count: int = 0
    kernel_constant: float = 0.0

    @property
    def holds(self) -> bool:
        return bool(self.rows) and all(r["passes"] for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "verdict": "EMPIRICAL",
            "gamma_coeffs": [int(c) for c in self.gamma_coeffs],
            "gamma_norm": self.gamma_norm,
            "delta": self.delta,
            "beta": self.beta,
            "condition": self.condition.to_dict(),
            "damping": self.damping,
            "floor": self.floor,
            "rows": self.rows,
            "one_minus_delta_star": self.one_minus_delta_star,
            "holds": self.holds,
            "cutoff": self.cutoff,
            "mode_count": self.mode_count,
            "kernel_constant": self.kernel_constant,
        }


def verify_weighted_split(lattice: Lattice, rep: CliffordRep, pot: PotentialSet,
                          gamma_coeffs, measure: MeasureSpec, delta: float,
                          beta: float, kappas, k_points_per_axis: int = 3,
                          cutoff: Optional[float] = None,
                          kernel_constant: Optional[float] = None,
                          sphere_samples: int = 4096,
                          threads: int = 1) -> WeightedSplitReport:
    """Two-zone weighted lower bound on the face (k, gamma) = pi.

    Per node, modes in the critical annulus (half-width beta) get the damped
    floor, damping * (1 - theta_hi) * pi / |gamma|, as weight and the rest
    their free factor g_minus; the check is whether the squared weighted
    minimum stays above 1 - delta.  Requires every kappa > beta.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    kappas = [float(k) for k in kappas]
    if not all(k > beta for k in kappas):
        raise ValueError("every kappa must exceed beta")
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    e = gvec / gnorm
    cond = condition_value(pot.A, gc, measure, sphere_samples=sphere_samples)
    if cond.theta_hi >= 1.0:
        raise ValueError("averaged-field bracket reaches 1; floor unavailable")
    const = default_kernel_constant() if kernel_constant is None else kernel_constant
    damping = damping_factor(pot.A, gc, measure.h, measure, const)
    floor = damping * (1.0 - cond.theta_hi) * math.pi / gnorm

    ks = k_face_grid(lattice, gc, k_points_per_axis)
    if cutoff is None:
        cutoff = _default_cutoff(kappas, w_norm(pot), ks)
    modes = ModeSet.from_cutoff(lattice, cutoff)

    report = WeightedSplitReport(
        gamma_coeffs=tuple(int(c) for c in gc), gamma_norm=gnorm, delta=delta,
        beta=beta, condition=cond, damping=damping, floor=floor,
        cutoff=float(cutoff), mode_count=len(modes), kernel_constant=const)

    nodes = [(i, j) for i in range(ks.shape[0]) for j in range(len(kappas))]

    def solve(node):
        i, j = node
        kap = kappas[j]
        fiber = FiberPoint(k=ks[i], e=e, kappa=kap)
        mask = _annulus_mask(modes, ks[i], e, kap, beta)
        op = assemble(lattice, rep, modes, fiber, pot)
        weights = op.mode_g_factors()[:, 0]  # same floats the auto path uses
        weights[mask] = floor
        value = weighted_sigma_min(op, weights)
        return {"k_index": i, "kappa": kap, "annulus_modes": int(np.sum(mask)),
                "ratio_sq": value * value,
                "passes": bool(value * value >= 1.0 - delta)}

    report.rows = pmap(solve, nodes, threads)
    report.one_minus_delta_star = min(r["ratio_sq"] for r in report.rows)
    return report


def weighted_floor(lattice: Lattice, rep: CliffordRep, pot: PotentialSet,
                   gamma_coeffs, kappas, k_points_per_axis: int = 3,
                   cutoff: Optional[float] = None, threads: int = 1) -> dict:
    """All-mode weighted floor: min over the grid of sigma_min(D W^{-1}).

    Weights are the free factors g_minus.  For the free operator the value
    is exactly 1 at every node; for small potentials it obeys the
    perturbation floor 1 - W |gamma| / pi, which is reported alongside.
    """
    gc = np.asarray(gamma_coeffs, dtype=np.int64)
    gvec = lattice.point(gc)
    gnorm = float(np.linalg.norm(gvec))
    e = gvec / gnorm
    kappas = [float(k) for k in kappas]
    ks = k_face_grid(lattice, gc, k_points_per_axis)
    wn = w_norm(pot)
    if cutoff is None:
        cutoff = _default_cutoff(kappas, wn, ks)
    modes = ModeSet.from_cutoff(lattice, cutoff)
    nodes = [(i, j) for i in range(ks.shape[0]) for j in range(len(kappas))]

    def solve(node):
        i, j = node
        kap = kappas[j]
        fiber = FiberPoint(k=ks[i], e=e, kappa=kap)
        op = assemble(lattice, rep, modes, fiber, pot)
        value = weighted_sigma_min(op, op.mode_g_factors()[:, 0])
        return {"k_index": i, "kappa": kap, "ratio": value}

    rows = pmap(solve, nodes, threads)
    worst = min(r["ratio"] for r in rows)
    return {
        "verdict": "EMPIRICAL",
        "gamma_coeffs": [int(c) for c in gc],
        "gamma_norm": gnorm,
        "kappas": kappas,
        "rows": rows,
        "ratio_min": worst,
        "perturbation_floor": 1.0 - wn * gnorm / math.pi,
        "w_bound": wn,
        "cutoff": float(cutoff),
        "mode_count": len(modes),
    }


# ---------------------------------------------------------------------------
# direction-search pipeline
# ---------------------------------------------------------------------------

def sobolev_direction_measure(A: FourierField, q: float) -> SphereMeasure:
    """Atomic sphere measure with weight |N|^2q |A_N|^2 at each direction N/|N|.

    Parallel modes accumulate onto the same atom (reduced integer direction);
    opposite modes stay antipodal atoms.
    """
    lattice = A.lattice
    acc: dict = {}
    for key, val in A.coeffs.items():
        ik = np.asarray(key, dtype=np.int64)
        if not np.any(ik):
            continue
        g = int(np.gcd.reduce(np.abs(ik)[np.abs(ik) > 0]))
        prim = tuple(int(c) for c in ik // g)
        nvec = lattice.dual_point(key)
        weight = float(np.linalg.norm(nvec)) ** (2.0 * q) * \
            float(np.linalg.norm(np.asarray(val))) ** 2
        acc[prim] = acc.get(prim, 0.0) + weight
    points, weights = [], []
    for prim in sorted(acc):
        nvec = lattice.dual_point(prim)
        points.append(nvec / float(np.linalg.norm(nvec)))
        weights.append(acc[prim])
    if not points:
        return SphereMeasure(points=np.zeros((0, lattice.n)),
                             weights=np.zeros(0))
    return SphereMeasure(points=np.array(points), weights=np.array(weights))


def condition_chain_pipeline(A: FourierField, q: float, h: float, h1: float,
                             R0_list, et_samples: int = 16,
                             grid_per_axis: int = 32,
                             search_window: Optional[float] = None,
                             seed: int = 0) -> dict:
    """Search directions over growing radii and validate the smallness chain.

    For each R0 the searcher runs on the Sobolev-weighted atomic measure of
    A; at every sampled transverse direction et the chain

        |gamma| * grid-sup |avg A|  <=  |gamma| * sum of |A_N| over the
        orthogonal modes with |(N, et)| <= h1  <=  Cauchy-Schwarz split

    is asserted.  Requires 2 q > n - 2 (summability of the weights) and a
    zero-mean A.  The outer member per R0 is reported so its decay across
    radii can be observed.
    """
    lattice = A.lattice
    n = lattice.n
    if not 2.0 * q > n - 2:
        raise ValueError("need 2 q > n - 2")
    if np.max(np.abs(np.asarray(A.mean()))) > 1e-13:
        raise ValueError("the field must have zero mean")
    if not 0.0 < h < h1:
        raise ValueError("need 0 < h < h1")
    mu1 = sobolev_direction_measure(A, q)
    mu = MeasureSpec.plateau(h, h1)
    sobolev_total = float(np.sum(mu1.weights))

    rows = []
    for R0 in R0_list:
        cert = find_gamma(lattice, mu1, h, float(R0), search_window)
        gc = np.asarray(cert.gamma_coeffs, dtype=np.int64)
        gnorm = cert.gamma_norm
        e = np.asarray(cert.gamma, dtype=float) / gnorm

        orth = []
        for key, val in A.coeffs.items():
            ik = np.asarray(key, dtype=np.int64)
            if not np.any(ik) or int(np.dot(ik, gc)) != 0:
                continue
            nvec = lattice.dual_point(key)
            orth.append((key, float(np.linalg.norm(nvec)), nvec,
                         float(np.linalg.norm(np.asarray(val)))))
        right_sq = sum(r ** (2.0 * q) * a * a for _, r, _, a in orth)

        if n == 3:
            perp = orthonormal_complement(e)
            angles = np.arange(et_samples) * (2.0 * math.pi / et_samples)
            ets = np.outer(np.cos(angles), perp[0]) + \
                np.outer(np.sin(angles), perp[1])
        else:
            rng = np.random.default_rng(seed)
            raw = rng.standard_normal((et_samples, n - 1))
            raw /= np.linalg.norm(raw, axis=1, keepdims=True)
            ets = raw @ orthonormal_complement(e)

        per_et = []
        chain_ok = True
        for et in ets:
            av = averaged_potential(A, gc, mu, et)
            f_lo = gnorm * sup_norm(av, grid_per_axis)[0]
            sel = [(r, a) for _, r, nvec, a in orth
                   if abs(float(np.dot(nvec, et))) <= h1]
            middle = gnorm * sum(a for _, a in sel)
            inv_sum = sum(r ** (-2.0 * q) for r, _ in sel)
            outer = gnorm * math.sqrt(inv_sum) * math.sqrt(right_sq)
            ok = (f_lo <= middle * (1.0 + 1e-12) + 1e-15 and
                  middle <= outer * (1.0 + 1e-12) + 1e-15)
            chain_ok = chain_ok and ok
            per_et.append({"et": [float(c) for c in et], "f_lo": f_lo,
                           "middle": middle, "outer": outer, "ok": bool(ok)})
        rows.append({
            "R0": float(R0),
            "certificate": cert.to_dict(),
            "orthogonal_modes": len(orth),
            "f_lo_max": max(p["f_lo"] for p in per_et),
            "middle_max": max(p["middle"] for p in per_et),
            "outer_max": max(p["outer"] for p in per_et),
            "chain_ok": bool(chain_ok),
            "per_et": per_et,
        })
    outer_values = [r["outer_max"] for r in rows]
    return {
        "verdict": "EMPIRICAL",
        "q": q,
        "h": h,
        "h1": h1,
        "measure_norm": mu.norm_bound,
        "sobolev_total": sobolev_total,
        "atom_count": int(mu1.points.shape[0]),
        "rows": rows,
        "outer_values": outer_values,
        "outer_decreasing": all(b < a + 1e-15 for a, b in
                                zip(outer_values[:-1], outer_values[1:])),
        "chain_ok": all(r["chain_ok"] for r in rows),
    }
