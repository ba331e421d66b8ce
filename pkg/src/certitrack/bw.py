"""Bombieri-Weyl Hermitian geometry on spaces of homogeneous systems, and the
Riemann distance on complex projective space.

The Hermitian product weights each monomial coefficient pair by the inverse
multinomial coefficient of its exponent tuple; it is invariant under unitary
changes of variables, which is what makes the unit sphere of systems the
natural arena for homotopy paths.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .polysys import (
    AffineSystem,
    PolySystem,
    affine_exponents,
    homogeneous_exponents,
    homogeneous_index,
    linear_form,
)


@lru_cache(maxsize=None)
def _multinomials(n_vars: int, degree: int) -> np.ndarray:
    """multinomial(degree; a0, ..., a_{n_vars-1}) per monomial, exact integers as floats."""
    exps = homogeneous_exponents(n_vars, degree)
    fact = [math.factorial(k) for k in range(degree + 1)]
    out = np.empty(exps.shape[0], dtype=np.float64)
    for i, row in enumerate(exps):
        denom = 1
        for e in row:
            denom *= fact[e]
        out[i] = fact[degree] // denom
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _bw_weights(n_vars: int, degree: int) -> np.ndarray:
    w = 1.0 / _multinomials(n_vars, degree)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def sqrt_multinomials(n_vars: int, degree: int) -> np.ndarray:
    """Square-root multinomials: the scaling from orthonormal coordinates back
    to raw monomial coefficients."""
    w = np.sqrt(_multinomials(n_vars, degree))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _bw_weights_affine(n_vars: int, degree: int) -> np.ndarray:
    # Weight of an affine monomial = weight of its homogenization.
    exps = affine_exponents(n_vars, degree)
    fact = [math.factorial(k) for k in range(degree + 1)]
    out = np.empty(exps.shape[0], dtype=np.float64)
    for i, row in enumerate(exps):
        denom = fact[degree - int(row.sum())]
        for e in row:
            denom *= fact[e]
        out[i] = denom / fact[degree]
    out.setflags(write=False)
    return out


def bw_inner(h: PolySystem, h2: PolySystem) -> complex:
    """Bombieri-Weyl product <h, h2>, summed over equations."""
    if h.degrees != h2.degrees:
        raise ValueError(f"degree mismatch: {h.degrees} vs {h2.degrees}")
    total = 0.0 + 0.0j
    for d, a, b in zip(h.degrees, h.coeffs, h2.coeffs):
        w = _bw_weights(h.n_vars, d)
        total += np.sum(w * a * np.conj(b))
    return complex(total)


def bw_norm(h: PolySystem | AffineSystem) -> float:
    """Bombieri-Weyl norm; for an affine system, the norm of its homogenization."""
    total = 0.0
    if isinstance(h, AffineSystem):
        for d, a in zip(h.degrees, h.coeffs):
            w = _bw_weights_affine(h.n, d)
            total += float(np.sum(w * np.abs(a) ** 2))
    else:
        for d, a in zip(h.degrees, h.coeffs):
            w = _bw_weights(h.n_vars, d)
            total += float(np.sum(w * np.abs(a) ** 2))
    return math.sqrt(total)


def normalize_to_sphere(h: PolySystem) -> PolySystem:
    """Scale to unit Bombieri-Weyl norm."""
    norm = bw_norm(h)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero system")
    return h * (1.0 / norm)


def ensure_on_sphere(h: PolySystem, tol: float = 1e-10, what: str = "system") -> PolySystem:
    """Check unit-norm membership; raises ValueError when violated."""
    norm = bw_norm(h)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{what} must lie on the unit sphere; norm is {norm!r}")
    return h


def riemann_distance(z, w) -> float:
    """Riemann distance on projective space, in [0, pi/2].

    Mathematically arccos(|<z, w>| / (|z| |w|)); computed through the norm of
    the orthogonal component so that tiny distances are not lost to rounding.
    """
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    nz = np.linalg.norm(z)
    nw = np.linalg.norm(w)
    if nz == 0.0 or nw == 0.0:
        raise ValueError("zero vector does not represent a projective point")
    z = z / nz
    w = w / nw
    ip = np.vdot(w, z)
    cos_part = min(abs(ip), 1.0)
    sin_part = np.linalg.norm(z - ip * w)
    return float(np.arctan2(sin_part, cos_part))


def unitary_compose(h: PolySystem, U: np.ndarray) -> PolySystem:
    """The system z -> h(Uz), expanded in the dense monomial basis."""
    U = np.asarray(U, dtype=np.complex128)
    n_vars = h.n_vars
    if U.shape != (n_vars, n_vars):
        raise ValueError(f"U must be {n_vars}x{n_vars}, got {U.shape}")
    defect = np.linalg.norm(U.conj().T @ U - np.eye(n_vars))
    if defect > 1e-10:
        raise ValueError(f"U is not unitary (defect {defect:.3e})")

    # Power cache: linear_powers[j][e] = coefficient vector of ((Uz)_j)**e.
    linear_powers: list[list[np.ndarray]] = [[np.ones(1, dtype=np.complex128)] for _ in range(n_vars)]
    max_d = h.max_degree
    for j in range(n_vars):
        row = linear_form(U[j])
        for e in range(1, max_d + 1):
            linear_powers[j].append(_dense_mul(linear_powers[j][e - 1], e - 1, row, 1, n_vars))

    coeffs = []
    for i, d in enumerate(h.degrees):
        exps = homogeneous_exponents(n_vars, d)
        vec = np.zeros(exps.shape[0], dtype=np.complex128)
        for pos in np.nonzero(h.coeffs[i])[0]:
            c = h.coeffs[i][pos]
            term = None
            deg_so_far = 0
            for j, e in enumerate(exps[pos]):
                if e == 0:
                    continue
                factor = linear_powers[j][e]
                if term is None:
                    term, deg_so_far = factor, int(e)
                else:
                    term = _dense_mul(term, deg_so_far, factor, int(e), n_vars)
                    deg_so_far += int(e)
            vec += c * (term if term is not None else np.ones(1, dtype=np.complex128))
        coeffs.append(vec)
    return PolySystem(h.degrees, tuple(coeffs))


@lru_cache(maxsize=None)
def _mul_index(n_vars: int, d1: int, d2: int) -> np.ndarray:
    # Position of the product monomial for every pair of factor monomials.
    e1 = homogeneous_exponents(n_vars, d1)
    e2 = homogeneous_exponents(n_vars, d2)
    index = homogeneous_index(n_vars, d1 + d2)
    out = np.empty((e1.shape[0], e2.shape[0]), dtype=np.int64)
    for a, row_a in enumerate(e1):
        for b, row_b in enumerate(e2):
            out[a, b] = index[tuple(int(x) for x in (row_a + row_b))]
    out.setflags(write=False)
    return out


def _dense_mul(c1: np.ndarray, d1: int, c2: np.ndarray, d2: int, n_vars: int) -> np.ndarray:
    """Product of dense homogeneous coefficient vectors of degrees d1 and d2."""
    idx = _mul_index(n_vars, d1, d2)
    out = np.zeros(homogeneous_exponents(n_vars, d1 + d2).shape[0], dtype=np.complex128)
    np.add.at(out, idx.ravel(), np.outer(c1, c2).ravel())
    return out


def dense_product(c1: np.ndarray, d1: int, c2: np.ndarray, d2: int, n_vars: int) -> np.ndarray:
    """Public wrapper around homogeneous coefficient-vector multiplication."""
    return _dense_mul(np.asarray(c1, np.complex128), d1, np.asarray(c2, np.complex128), d2, n_vars)
