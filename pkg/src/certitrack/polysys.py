"""Dense complex polynomial systems: representation, evaluation, differentiation,
and (de)homogenization.

A homogeneous system of n equations in n+1 variables is stored as one dense
complex coefficient vector per equation, indexed by the monomial basis of the
equation's degree.  The monomial order is ascending lexicographic on the
exponent tuple (a0, ..., an); the bijection between positions and exponent
tuples is deterministic and cached per (variable count, degree).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # All exponent tuples with the given sum, in ascending lexicographic order.
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _bounded_compositions(bound: int, parts: int) -> Iterator[tuple[int, ...]]:
    # All exponent tuples with sum <= bound, ascending lexicographic.
    if parts == 1:
        for last in range(bound + 1):
            yield (last,)
        return
    for first in range(bound + 1):
        for rest in _bounded_compositions(bound - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def homogeneous_exponents(n_vars: int, degree: int) -> np.ndarray:
    """Exponent matrix of the degree-`degree` monomials in `n_vars` variables."""
    exps = np.array(list(_compositions(degree, n_vars)), dtype=np.int64)
    exps.setflags(write=False)
    return exps


@lru_cache(maxsize=None)
def affine_exponents(n_vars: int, max_degree: int) -> np.ndarray:
    """Exponent matrix of the monomials of degree <= `max_degree` in `n_vars` variables."""
    exps = np.array(list(_bounded_compositions(max_degree, n_vars)), dtype=np.int64)
    exps.setflags(write=False)
    return exps


@lru_cache(maxsize=None)
def homogeneous_index(n_vars: int, degree: int) -> dict[tuple[int, ...], int]:
    """Inverse of `homogeneous_exponents`: exponent tuple -> position."""
    exps = homogeneous_exponents(n_vars, degree)
    return {tuple(int(e) for e in row): i for i, row in enumerate(exps)}


@lru_cache(maxsize=None)
def affine_index(n_vars: int, max_degree: int) -> dict[tuple[int, ...], int]:
    exps = affine_exponents(n_vars, max_degree)
    return {tuple(int(e) for e in row): i for i, row in enumerate(exps)}


def num_homogeneous_monomials(n_vars: int, degree: int) -> int:
    return math.comb(n_vars - 1 + degree, degree)


def space_dimension(degrees: tuple[int, ...] | list[int]) -> int:
    """Complex dimension N+1 of the space of systems with these degrees."""
    n = len(degrees)
    _check_degrees(degrees)
    return sum(math.comb(n + d, d) for d in degrees)


def bezout_number(degrees: tuple[int, ...] | list[int]) -> int:
    """Product of the degrees (the count of projective roots of a regular system)."""
    return math.prod(degrees)


def _check_degrees(degrees) -> None:
    if len(degrees) < 1:
        raise ValueError("a system needs at least one equation")
    if any(int(d) != d or d < 1 for d in degrees):
        raise ValueError(f"degrees must be positive integers, got {tuple(degrees)}")


@lru_cache(maxsize=None)
def _jacobian_tables(n_vars: int, degree: int):
    # Per variable j: (rows with positive exponent, decremented exponents, multipliers).
    exps = homogeneous_exponents(n_vars, degree)
    tables = []
    for j in range(n_vars):
        sel = np.nonzero(exps[:, j] > 0)[0]
        dexp = exps[sel].copy()
        dexp[:, j] -= 1
        mult = exps[sel, j].astype(np.float64)
        for arr in (sel, dexp, mult):
            arr.setflags(write=False)
        tables.append((sel, dexp, mult))
    return tuple(tables)


@lru_cache(maxsize=None)
def _affine_jacobian_tables(n_vars: int, max_degree: int):
    exps = affine_exponents(n_vars, max_degree)
    tables = []
    for j in range(n_vars):
        sel = np.nonzero(exps[:, j] > 0)[0]
        dexp = exps[sel].copy()
        dexp[:, j] -= 1
        mult = exps[sel, j].astype(np.float64)
        for arr in (sel, dexp, mult):
            arr.setflags(write=False)
        tables.append((sel, dexp, mult))
    return tuple(tables)


def _power_table(z: np.ndarray, max_degree: int) -> np.ndarray:
    # P[j, k] = z_j ** k for k = 0..max_degree.
    P = np.empty((z.shape[0], max_degree + 1), dtype=np.complex128)
    P[:, 0] = 1.0
    for k in range(1, max_degree + 1):
        P[:, k] = P[:, k - 1] * z
    return P


def _monomial_values(P: np.ndarray, exps: np.ndarray) -> np.ndarray:
    cols = np.arange(P.shape[0])
    return P[cols, exps].prod(axis=1)


def _as_coeff_tuple(coeffs, expected_lengths) -> tuple[np.ndarray, ...]:
    out = []
    for i, c in enumerate(coeffs):
        arr = np.ascontiguousarray(c, dtype=np.complex128)
        if arr.ndim != 1 or arr.shape[0] != expected_lengths[i]:
            raise ValueError(
                f"equation {i}: expected {expected_lengths[i]} coefficients, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        out.append(arr)
    return tuple(out)


@dataclass(frozen=True)
class PolySystem:
    """Square homogeneous system: n equations of degrees d_i in n+1 variables."""

    degrees: tuple[int, ...]
    coeffs: tuple[np.ndarray, ...]

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        _check_degrees(degrees)
        object.__setattr__(self, "degrees", degrees)
        if len(self.coeffs) != len(degrees):
            raise ValueError("one coefficient vector per equation required")
        n_vars = len(degrees) + 1
        expected = [num_homogeneous_monomials(n_vars, d) for d in degrees]
        object.__setattr__(self, "coeffs", _as_coeff_tuple(self.coeffs, expected))

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def n_vars(self) -> int:
        return len(self.degrees) + 1

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    @cached_property
    def _uniform_stack(self) -> np.ndarray | None:
        # Equations of equal degree stacked into one matrix for fast evaluation.
        if len(set(self.degrees)) == 1:
            return np.vstack(self.coeffs)
        return None

    def coeff_vector(self) -> np.ndarray:
        """All coefficients concatenated equation by equation."""
        return np.concatenate(self.coeffs)

    @classmethod
    def from_coeff_vector(cls, degrees: tuple[int, ...], vec: np.ndarray) -> "PolySystem":
        n_vars = len(degrees) + 1
        sizes = [num_homogeneous_monomials(n_vars, d) for d in degrees]
        if vec.shape != (sum(sizes),):
            raise ValueError(f"expected coefficient vector of length {sum(sizes)}")
        parts = np.split(np.asarray(vec, dtype=np.complex128), np.cumsum(sizes)[:-1])
        return cls(tuple(degrees), tuple(parts))

    @classmethod
    def from_terms(cls, degrees, terms) -> "PolySystem":
        """Build from sparse terms: per equation, a list of (exponent tuple, coefficient)."""
        degrees = tuple(int(d) for d in degrees)
        n_vars = len(degrees) + 1
        coeffs = []
        for i, (d, eq_terms) in enumerate(zip(degrees, terms)):
            vec = np.zeros(num_homogeneous_monomials(n_vars, d), dtype=np.complex128)
            index = homogeneous_index(n_vars, d)
            for exponents, c in eq_terms:
                key = tuple(int(e) for e in exponents)
                if len(key) != n_vars or sum(key) != d or min(key) < 0:
                    raise ValueError(
                        f"equation {i}: exponents {key} invalid for degree {d} in {n_vars} variables"
                    )
                vec[index[key]] += c
            coeffs.append(vec)
        return cls(degrees, tuple(coeffs))

    def __add__(self, other: "PolySystem") -> "PolySystem":
        if not isinstance(other, PolySystem) or other.degrees != self.degrees:
            return NotImplemented
        return PolySystem(self.degrees, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "PolySystem") -> "PolySystem":
        if not isinstance(other, PolySystem) or other.degrees != self.degrees:
            return NotImplemented
        return PolySystem(self.degrees, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, scalar) -> "PolySystem":
        scalar = complex(scalar)
        return PolySystem(self.degrees, tuple(scalar * a for a in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> "PolySystem":
        return self * (-1.0)


@dataclass(frozen=True)
class AffineSystem:
    """Square affine system: n equations of degrees <= d_i in n variables."""

    degrees: tuple[int, ...]
    coeffs: tuple[np.ndarray, ...]

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        _check_degrees(degrees)
        object.__setattr__(self, "degrees", degrees)
        if len(self.coeffs) != len(degrees):
            raise ValueError("one coefficient vector per equation required")
        n_vars = len(degrees)
        expected = [affine_exponents(n_vars, d).shape[0] for d in degrees]
        object.__setattr__(self, "coeffs", _as_coeff_tuple(self.coeffs, expected))

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    @classmethod
    def from_terms(cls, degrees, terms) -> "AffineSystem":
        degrees = tuple(int(d) for d in degrees)
        n_vars = len(degrees)
        coeffs = []
        for i, (d, eq_terms) in enumerate(zip(degrees, terms)):
            index = affine_index(n_vars, d)
            vec = np.zeros(len(index), dtype=np.complex128)
            for exponents, c in eq_terms:
                key = tuple(int(e) for e in exponents)
                if len(key) != n_vars or sum(key) > d or min(key) < 0:
                    raise ValueError(
                        f"equation {i}: exponents {key} invalid for degree <= {d} in {n_vars} variables"
                    )
                vec[index[key]] += c
            coeffs.append(vec)
        return cls(degrees, tuple(coeffs))


def linear_form(by_variable) -> np.ndarray:
    """Dense degree-1 coefficient vector of the form sum_j c_j X_j.

    The dense basis orders monomials by ascending-lex exponent tuples, which
    reverses the variable order at degree 1; this helper hides that mapping.
    """
    c = np.asarray(by_variable, dtype=np.complex128)
    n_vars = c.shape[0]
    index = homogeneous_index(n_vars, 1)
    vec = np.zeros(n_vars, dtype=np.complex128)
    for j in range(n_vars):
        key = tuple(1 if k == j else 0 for k in range(n_vars))
        vec[index[key]] = c[j]
    return vec


def unit_point(coords) -> np.ndarray:
    """Unit-norm representative of a projective point (read-only array)."""
    z = np.ascontiguousarray(coords, dtype=np.complex128)
    if z.ndim != 1:
        raise ValueError("a point is a 1-d coordinate vector")
    norm = np.linalg.norm(z)
    if norm == 0.0:
        raise ValueError("zero vector does not represent a projective point")
    z = z / norm
    z.setflags(write=False)
    return z


def evaluate(h: PolySystem, z) -> np.ndarray:
    """Value vector (h_1(z), ..., h_n(z)) at a representative z."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (h.n_vars,):
        raise ValueError(f"point must have {h.n_vars} coordinates, got {z.shape}")
    P = _power_table(z, h.max_degree)
    stacked = h._uniform_stack
    if stacked is not None:
        mono = _monomial_values(P, homogeneous_exponents(h.n_vars, h.degrees[0]))
        return stacked @ mono
    out = np.empty(h.n, dtype=np.complex128)
    for i, d in enumerate(h.degrees):
        mono = _monomial_values(P, homogeneous_exponents(h.n_vars, d))
        out[i] = h.coeffs[i] @ mono
    return out


def jacobian(h: PolySystem, z) -> np.ndarray:
    """The n x (n+1) Jacobian matrix Dh(z)."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (h.n_vars,):
        raise ValueError(f"point must have {h.n_vars} coordinates, got {z.shape}")
    P = _power_table(z, h.max_degree)
    J = np.zeros((h.n, h.n_vars), dtype=np.complex128)
    stacked = h._uniform_stack
    if stacked is not None:
        tables = _jacobian_tables(h.n_vars, h.degrees[0])
        for j, (sel, dexp, mult) in enumerate(tables):
            if sel.size == 0:
                continue
            mono = _monomial_values(P, dexp)
            J[:, j] = stacked[:, sel] @ (mult * mono)
        return J
    for i, d in enumerate(h.degrees):
        tables = _jacobian_tables(h.n_vars, d)
        for j, (sel, dexp, mult) in enumerate(tables):
            if sel.size == 0:
                continue
            mono = _monomial_values(P, dexp)
            J[i, j] = h.coeffs[i][sel] @ (mult * mono)
    return J


def evaluate_affine(f: AffineSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (f.n,):
        raise ValueError(f"point must have {f.n} coordinates, got {x.shape}")
    P = _power_table(x, f.max_degree)
    out = np.empty(f.n, dtype=np.complex128)
    for i, d in enumerate(f.degrees):
        mono = _monomial_values(P, affine_exponents(f.n, d))
        out[i] = f.coeffs[i] @ mono
    return out


def jacobian_affine(f: AffineSystem, x) -> np.ndarray:
    """The n x n Jacobian matrix Df(x)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (f.n,):
        raise ValueError(f"point must have {f.n} coordinates, got {x.shape}")
    P = _power_table(x, f.max_degree)
    J = np.zeros((f.n, f.n), dtype=np.complex128)
    for i, d in enumerate(f.degrees):
        tables = _affine_jacobian_tables(f.n, d)
        for j, (sel, dexp, mult) in enumerate(tables):
            if sel.size == 0:
                continue
            mono = _monomial_values(P, dexp)
            J[i, j] = f.coeffs[i][sel] @ (mult * mono)
    return J


def homogenize(f: AffineSystem) -> PolySystem:
    """Homogeneous counterpart: each monomial gains the power of X0 completing its degree."""
    n = f.n
    coeffs = []
    for i, d in enumerate(f.degrees):
        aff = affine_exponents(n, d)
        index = homogeneous_index(n + 1, d)
        vec = np.zeros(num_homogeneous_monomials(n + 1, d), dtype=np.complex128)
        for pos, row in enumerate(aff):
            c = f.coeffs[i][pos]
            if c == 0:
                continue
            key = (d - int(row.sum()),) + tuple(int(e) for e in row)
            vec[index[key]] += c
        coeffs.append(vec)
    return PolySystem(f.degrees, tuple(coeffs))


def dehomogenize(h: PolySystem) -> AffineSystem:
    """Substitute X0 = 1."""
    n = h.n
    coeffs = []
    for i, d in enumerate(h.degrees):
        hom = homogeneous_exponents(n + 1, d)
        index = affine_index(n, d)
        vec = np.zeros(len(index), dtype=np.complex128)
        for pos, row in enumerate(hom):
            c = h.coeffs[i][pos]
            if c == 0:
                continue
            key = tuple(int(e) for e in row[1:])
            vec[index[key]] += c
        coeffs.append(vec)
    return AffineSystem(h.degrees, tuple(coeffs))


def parse_system_json(text: str) -> PolySystem | AffineSystem:
    """Parse the text input format for systems.

    The record carries "degrees": [d_1, ..., d_n] and "terms": one list per
    equation of {"exponents": [...], "re": float, "im": float}.  Exponent
    lists of length n+1 describe a homogeneous system, length n an affine one.
    Absent monomials are zero.
    """
    record = json.loads(text)
    try:
        degrees = [int(d) for d in record["degrees"]]
        raw_terms = record["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError("system record needs 'degrees' and 'terms'") from exc
    n = len(degrees)
    if len(raw_terms) != n:
        raise ValueError(f"expected {n} term lists, got {len(raw_terms)}")
    lengths = {len(t["exponents"]) for eq in raw_terms for t in eq}
    if not lengths or lengths == {n + 1}:
        homogeneous = True
    elif lengths == {n}:
        homogeneous = False
    else:
        raise ValueError(f"inconsistent exponent lengths {sorted(lengths)} for n={n}")
    terms = [
        [(t["exponents"], complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))) for t in eq]
        for eq in raw_terms
    ]
    if homogeneous:
        return PolySystem.from_terms(degrees, terms)
    return AffineSystem.from_terms(degrees, terms)


def system_to_json(system: PolySystem | AffineSystem) -> str:
    """Serialize a system in the text input format (non-zero terms only)."""
    if isinstance(system, PolySystem):
        exp_table = [homogeneous_exponents(system.n_vars, d) for d in system.degrees]
    else:
        exp_table = [affine_exponents(system.n, d) for d in system.degrees]
    terms = []
    for exps, vec in zip(exp_table, system.coeffs):
        eq = []
        for pos in np.nonzero(vec)[0]:
            c = vec[pos]
            eq.append(
                {
                    "exponents": [int(e) for e in exps[pos]],
                    "re": float(c.real),
                    "im": float(c.imag),
                }
            )
        terms.append(eq)
    return json.dumps({"degrees": list(system.degrees), "terms": terms})
