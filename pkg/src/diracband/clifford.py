"""Anticommuting Hermitian generators and the matrix classes they induce.

The operator algebra is built from n+1 Hermitian matrices that pairwise
anticommute and square to the identity.  For n space dimensions the matrices
act on C^M with M = 2^ceil((n+1)/2); they are produced by a fixed chain of
Pauli tensor products, so every build is reproducible and the entries are
exact (0, +/-1, +/-i).

A matrix L is classified by how it moves through the first n generators:
commuting with all of them ("s0"), anticommuting with all of them ("s1"),
or neither.  Potentials entering the fiber operators live in these classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_EYE2 = np.eye(2, dtype=complex)


def _kron_chain(factors) -> np.ndarray:
    return reduce(np.kron, factors)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CliffordRep:
    """A concrete set of n+1 anticommuting Hermitian involutions on C^M."""

    n: int
    M: int
    alphas: tuple  # n+1 read-only (M, M) arrays

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.M, dtype=complex)


def build_clifford(n: int) -> CliffordRep:
    """Construct the generator set for n space dimensions.

    The chain is deterministic: pairs (Z^(j-1) x X x I..., Z^(j-1) x Y x I...)
    for j = 1..m followed by Z^m, truncated to the first n+1 matrices, with
    m = ceil((n+1)/2).
    """
    if n < 2:
        raise ValueError("need at least two space dimensions")
    m = (n + 2) // 2
    mats = []
    for j in range(1, m + 1):
        pre = [PAULI_Z] * (j - 1)
        post = [_EYE2] * (m - j)
        mats.append(_kron_chain(pre + [PAULI_X] + post))
        mats.append(_kron_chain(pre + [PAULI_Y] + post))
    mats.append(_kron_chain([PAULI_Z] * m))
    alphas = tuple(_readonly(a) for a in mats[: n + 1])
    return CliffordRep(n=n, M=2 ** m, alphas=alphas)


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def clifford_contraction(rep: CliffordRep, v: np.ndarray) -> np.ndarray:
    """Sum v_j alpha_j over the first n generators; v may be complex."""
    v = np.asarray(v)
    if v.shape != (rep.n,):
        raise ValueError(f"coefficient vector must have length {rep.n}")
    out = np.zeros((rep.M, rep.M), dtype=complex)
    for vj, aj in zip(v, rep.alphas[: rep.n]):
        out += vj * aj
    return out


def classify_matrix(L: np.ndarray, rep: CliffordRep, tol: float = 1e-12) -> str:
    """Return "s0", "s1" or "neither" for the matrix L.

    "s0" means L commutes with alpha_1..alpha_n entrywise within `tol`,
    "s1" means it anticommutes with all of them.  The zero matrix satisfies
    both relations and is surfaced as "s0".
    """
    L = np.asarray(L, dtype=complex)
    if L.shape != (rep.M, rep.M):
        raise ValueError(f"matrix must be {rep.M} x {rep.M}")
    commutes = all(
        np.max(np.abs(L @ a - a @ L)) <= tol for a in rep.alphas[: rep.n]
    )
    anticommutes = all(
        np.max(np.abs(L @ a + a @ L)) <= tol for a in rep.alphas[: rep.n]
    )
    if commutes:
        return "s0"
    if anticommutes:
        return "s1"
    return "neither"


def class_flags(L: np.ndarray, rep: CliffordRep, tol: float = 1e-12
                ) -> tuple[bool, bool]:
    """(commutes, anticommutes) flags against the first n generators."""
    L = np.asarray(L, dtype=complex)
    if L.shape != (rep.M, rep.M):
        raise ValueError(f"matrix must be {rep.M} x {rep.M}")
    commutes = all(
        np.max(np.abs(L @ a - a @ L)) <= tol for a in rep.alphas[: rep.n]
    )
    anticommutes = all(
        np.max(np.abs(L @ a + a @ L)) <= tol for a in rep.alphas[: rep.n]
    )
    return commutes, anticommutes


def symmetrize(L: np.ndarray, rep: CliffordRep, s: int) -> np.ndarray:
    """Orthogonal projection of L onto the class "s0" (s=0) or "s1" (s=1).

    Averages L over conjugation by each generator with the appropriate sign;
    Hermiticity of L is preserved.  Useful for manufacturing admissible
    potential values from arbitrary matrices.
    """
    if s not in (0, 1):
        raise ValueError("s must be 0 or 1")
    out = np.asarray(L, dtype=complex)
    if out.shape != (rep.M, rep.M):
        raise ValueError(f"matrix must be {rep.M} x {rep.M}")
    sign = 1.0 if s == 0 else -1.0
    for a in rep.alphas[: rep.n]:
        out = 0.5 * (out + sign * (a @ out @ a))
    return out


def projector(e: np.ndarray, et: np.ndarray, sign: int, rep: CliffordRep
              ) -> np.ndarray:
    """Spin projector attached to an orthonormal pair (e, et).

    For sign=+1 returns (I - i a(e) a(et)) / 2 and for sign=-1 the complement,
    where a(v) is the Clifford contraction of v.  Both are orthogonal
    projections of rank M/2, and they pinch the free symbol to zero when `et`
    is the radial direction transverse to `e`.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    e = np.asarray(e, dtype=float)
    et = np.asarray(et, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12 or abs(np.linalg.norm(et) - 1.0) > 1e-12:
        raise ValueError("e and et must be unit vectors")
    if abs(np.dot(e, et)) > 1e-12:
        raise ValueError("e and et must be orthogonal")
    q = 1.0j * clifford_contraction(rep, e) @ clifford_contraction(rep, et)
    return 0.5 * (rep.identity - sign * q)
