"""Shared builders and independent oracles for the test suite.

The oracles here recompute library quantities through a different route
(real-space quadrature, FFT collocation, brute-force enumeration) so the
tests compare two genuinely independent computations.
"""

import math

import numpy as np

from diracband import FourierField, MeasureSpec
from diracband.util import gauss_legendre_panels


def random_real_vector_field(lattice, rng, pairs=4, span=2, scale=0.05):
    """Zero-mean real-valued vector field with `pairs` conjugate mode pairs."""
    n = lattice.n
    coeffs = {}
    while len(coeffs) < 2 * pairs:
        key = tuple(int(c) for c in rng.integers(-span, span + 1, size=n))
        if key == (0,) * n or key in coeffs or tuple(-c for c in key) in coeffs:
            continue
        val = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        coeffs[key] = val
        coeffs[tuple(-c for c in key)] = np.conj(val)
    return FourierField(lattice, "vector", coeffs, real=True)


def random_complex_vector_field(lattice, rng, count=5, span=2, scale=0.05):
    """Zero-mean vector field without conjugate symmetry."""
    n = lattice.n
    coeffs = {}
    while len(coeffs) < count:
        key = tuple(int(c) for c in rng.integers(-span, span + 1, size=n))
        if key == (0,) * n or key in coeffs:
            continue
        coeffs[key] = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return FourierField(lattice, "vector", coeffs)


def average_by_quadrature(A, gamma_coeffs, measure, et, points, t_span=30.0):
    """Real-space averaging oracle.

    Integrates A over one full period along gamma (Gauss grid; the integrand
    is a trigonometric polynomial, so this is exact to rounding) and then
    against the measure along et.  The plateau measure enters through its
    synthesised density, not through the transform the library multiplies
    with.
    """
    lattice = A.lattice
    gvec = lattice.point(np.asarray(gamma_coeffs, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    tau_nodes, tau_w = gauss_legendre_panels(0.0, 1.0, panels=6, order=12)

    if measure.kind == "dirac":
        offsets = tau_nodes[:, None] * gvec[None, :]
        weights = tau_w
    else:
        t_nodes, t_w = gauss_legendre_panels(-t_span, t_span,
                                             panels=int(3 * t_span), order=8)
        dens = measure.density(t_nodes)
        offsets = (tau_nodes[:, None, None] * gvec[None, None, :]
                   - t_nodes[None, :, None] * np.asarray(et)[None, None, :])
        offsets = offsets.reshape(-1, lattice.n)
        weights = (tau_w[:, None] * (t_w * dens)[None, :]).ravel()

    out = np.zeros((points.shape[0], lattice.n), dtype=complex)
    for i, x in enumerate(points):
        vals = A.evaluate(x[None, :] + offsets)
        out[i] = weights @ vals
    return out


def fft_apply_oracle(lattice, rep, modes, fiber, pot, phi):
    """Collocation route for the fiber action on a window state.

    phi has shape (m, M): one spinor per window mode.  The potential part is
    applied by pointwise multiplication on a coefficient-space FFT grid large
    enough that no product mode aliases; the symbol part is diagonal.  Valid
    whenever every (mode + potential offset) stays inside the grid's
    representable band, which the caller arranges by using an inner-supported
    phi.
    """
    n = lattice.n
    M = rep.M
    coords = np.asarray(modes.coords, dtype=np.int64)
    span = int(np.max(np.abs(coords))) if len(coords) else 0
    pot_span = 0
    composite = pot.composite()
    if composite.coeffs:
        pot_span = int(max(max(abs(c) for c in key) for key in composite.coeffs))
    g = 2 * (span + pot_span) + 3

    def place(keys, values, shape_tail):
        arr = np.zeros((g,) * n + shape_tail, dtype=complex)
        for key, val in zip(keys, values):
            arr[tuple(np.asarray(key) % g)] = val
        return arr

    phi_grid = place(coords, phi, (M,))
    pot_grid = place(list(composite.coeffs), list(composite.coeffs.values()),
                     (M, M))
    axes = tuple(range(n))
    phi_x = np.fft.ifftn(phi_grid, axes=axes) * g ** n
    pot_x = np.fft.ifftn(pot_grid, axes=axes) * g ** n
    prod_x = np.einsum("...ij,...j->...i", pot_x, phi_x)
    prod_c = np.fft.fftn(prod_x, axes=axes) / g ** n

    out = np.zeros((len(coords), M), dtype=complex)
    from diracband import symbol
    for i, row in enumerate(coords):
        out[i] = symbol(rep, lattice, fiber, row) @ phi[i]
        out[i] += prod_c[tuple(row % g)]
    return out


def brute_force_gamma(lattice, measure, h, R0, window):
    """Exhaustive searcher oracle: plain loops, no shared code path.

    Rebuilds the objective (slab ratio, then largest min orthogonal length,
    then shortest gamma, then lexicographic coefficients) from scratch.
    """
    n = lattice.n
    inv = np.linalg.inv(lattice.basis)
    bound = [int(math.floor(R0 * float(np.linalg.norm(inv[:, j])) + 1e-9))
             for j in range(n)]
    dual_bound = [int(math.floor(window * float(np.linalg.norm(lattice.basis[j]))
                                 + 1e-9)) for j in range(n)]
    duals = []
    for idx in np.ndindex(*[2 * b + 1 for b in dual_bound]):
        mc = tuple(i - b for i, b in zip(idx, dual_bound))
        if all(c == 0 for c in mc):
            continue
        v = np.asarray(mc, dtype=float) @ lattice.reciprocal
        if float(np.linalg.norm(v)) <= window:
            duals.append((mc, float(np.linalg.norm(v))))

    best_key, best = None, None
    scale1 = R0 ** (1.0 / (n - 1))
    for idx in np.ndindex(*[2 * b + 1 for b in bound]):
        mc = tuple(i - b for i, b in zip(idx, bound))
        if all(c == 0 for c in mc):
            continue
        gvec = np.asarray(mc, dtype=float) @ lattice.basis
        gnorm = float(np.linalg.norm(gvec))
        if gnorm > R0:
            continue
        slab = 0.0
        for p, w in zip(measure.points, measure.weights):
            if abs(float(np.dot(p, gvec))) <= h:
                slab += w
        total = float(np.sum(measure.weights))
        denom = max(h, R0 ** (-1.0 / (n - 1))) / gnorm
        ratio = (slab / total) / denom if total > 0 else 0.0
        orth = [ln for c, ln in duals if sum(a * b for a, b in zip(c, mc)) == 0]
        orth_key = -min(orth) / scale1 if orth else -math.inf
        key = (ratio, orth_key, gnorm, mc)
        if best_key is None or key < best_key:
            best_key, best = key, mc
    return best, best_key
