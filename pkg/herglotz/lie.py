"""
Lie algebras given by structure constants and matrix groups given by a chart.

Structure constants are stored as ``C[c, a, b] = C^c_{ab}``, so that
``[E_a, E_b] = C^c_{ab} E_c``. Group elements carry both chart coordinates
and their matrix image; charts are supplied per group and every chart map is
written with :mod:`herglotz.numerics` functions so it can be differentiated.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics as nx
from .errors import BasisNotClosed, ChartOutOfRange, DimensionMismatch, InvalidParameter

STRUCTURE_TOLERANCE = 1e-12
CLOSURE_TOLERANCE = 1e-9
DEXPINV_ORDER = 2


# ----------------------------
# Lie algebras
# ----------------------------

@dataclass(frozen=True, eq=False)
class LieAlgebraSpec:
    dim: int
    structure_constants: np.ndarray
    basis_matrices: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        d = self.dim
        if c.shape != (d, d, d):
            raise DimensionMismatch(f"structure constants must have shape {(d, d, d)}, got {c.shape}")
        if d and np.max(np.abs(c + c.transpose(0, 2, 1))) > STRUCTURE_TOLERANCE:
            raise InvalidParameter("structure constants are not antisymmetric in their lower indices")
        if d and np.max(np.abs(jacobi_residual(c))) > STRUCTURE_TOLERANCE:
            raise InvalidParameter("structure constants violate the Jacobi identity")
        object.__setattr__(self, "structure_constants", c)

        if self.basis_matrices is None:
            return
        basis = tuple(np.asarray(e, dtype=float) for e in self.basis_matrices)
        if len(basis) != d:
            raise DimensionMismatch(f"expected {d} basis matrices, got {len(basis)}")
        object.__setattr__(self, "basis_matrices", basis)
        for a in range(d):
            for b in range(d):
                commutator = basis[a] @ basis[b] - basis[b] @ basis[a]
                expected = np.tensordot(c[:, a, b], np.array(basis), axes=1)
                if np.max(np.abs(commutator - expected)) > STRUCTURE_TOLERANCE:
                    raise BasisNotClosed(
                        f"[E_{a}, E_{b}] does not match the structure constants"
                    )

    @classmethod
    def from_matrices(cls, basis: list[np.ndarray]) -> "LieAlgebraSpec":
        """Derive the structure constants from commutators of a matrix basis."""
        basis = [np.asarray(e, dtype=float) for e in basis]
        d = len(basis)
        c = np.zeros((d, d, d))
        for a in range(d):
            for b in range(d):
                commutator = basis[a] @ basis[b] - basis[b] @ basis[a]
                c[:, a, b] = coefficients_in_basis(basis, commutator)
        c[np.abs(c) < STRUCTURE_TOLERANCE] = 0.0
        return cls(dim=d, structure_constants=c, basis_matrices=tuple(basis))

    @classmethod
    def abelian(cls, dim: int, basis_matrices: tuple[np.ndarray, ...] | None = None) -> "LieAlgebraSpec":
        return cls(dim=dim, structure_constants=np.zeros((dim, dim, dim)), basis_matrices=basis_matrices)

    def matrix(self, xi) -> np.ndarray:
        if self.basis_matrices is None:
            raise InvalidParameter("algebra has no matrix representation")
        size = self.basis_matrices[0].shape[0] if self.dim else 1
        out = np.zeros((size, size))
        for a in range(self.dim):
            out = out + xi[a] * self.basis_matrices[a]
        return out


def jacobi_residual(c: np.ndarray) -> np.ndarray:
    """Σ_e (C^e_ab C^f_ec + C^e_bc C^f_ea + C^e_ca C^f_eb), indexed [f, a, b, c]."""
    return (
        np.einsum("eab,fec->fabc", c, c)
        + np.einsum("ebc,fea->fabc", c, c)
        + np.einsum("eca,feb->fabc", c, c)
    )


def coefficients_in_basis(basis, matrix, *, tolerance: float = CLOSURE_TOLERANCE) -> np.ndarray:
    """Solve matrix = Σ coeff_a E_a; raises BasisNotClosed when matrix leaves the span."""
    d = len(basis)
    if d == 0:
        return np.zeros(0)
    stacked = np.array([np.ravel(e) for e in basis]).T
    target = nx.asarray(matrix).ravel()
    coeffs = nx.lu_solve(stacked.T @ stacked, stacked.T @ target)
    residual = np.max(np.abs(nx.value_of(stacked @ coeffs - target)))
    if residual > tolerance:
        raise BasisNotClosed(f"matrix leaves the span of the basis (residual {residual:.3e})")
    return coeffs


def bracket(spec: LieAlgebraSpec, xi, eta) -> np.ndarray:
    """([ξ, η])^c = C^c_ab ξ^a η^b."""
    if len(xi) != spec.dim or len(eta) != spec.dim:
        raise DimensionMismatch(f"bracket expects vectors of length {spec.dim}")
    return spec.structure_constants @ nx.asarray(eta) @ nx.asarray(xi)


def ad_matrix(spec: LieAlgebraSpec, xi) -> np.ndarray:
    # (ad_ξ)^c_b = C^c_ab ξ^a
    return spec.structure_constants.transpose(0, 2, 1) @ nx.asarray(xi)


def dexpinv(spec: LieAlgebraSpec, u, xi, *, order: int = DEXPINV_ORDER) -> np.ndarray:
    """Truncated dexp⁻¹_u(ξ) = ξ − ½[u, ξ] + 1/12 [u, [u, ξ]]."""
    out = np.asarray(xi, dtype=float)
    if order >= 1:
        first = bracket(spec, u, xi)
        out = out - 0.5 * first
    if order >= 2:
        out = out + bracket(spec, u, first) / 12.0
    return out


# ----------------------------
# Groups and charts
# ----------------------------

@dataclass(frozen=True, eq=False)
class GroupElement:
    coords: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class MatrixGroup:
    """A matrix Lie group with a single chart around the identity."""

    name: str
    algebra: LieAlgebraSpec
    to_matrix: Callable[[np.ndarray], np.ndarray]
    to_coords: Callable[[np.ndarray], np.ndarray]
    compose: Callable[[np.ndarray, np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray] | None = None
    fundamental: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def identity(self) -> GroupElement:
        return self.element(np.zeros(self.dim))

    def element(self, coords) -> GroupElement:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim,):
            raise DimensionMismatch(f"{self.name} coordinates must have length {self.dim}")
        return GroupElement(coords=coords, matrix=np.asarray(self.to_matrix(coords), dtype=float))

    def from_matrix(self, matrix) -> GroupElement:
        matrix = np.asarray(matrix, dtype=float)
        return GroupElement(coords=np.asarray(self.to_coords(matrix), dtype=float), matrix=matrix)


def adjoint_from_matrices(spec: LieAlgebraSpec, g: GroupElement) -> np.ndarray:
    """A with g E_a g⁻¹ = A^b_a E_b, recovered by projecting onto the basis."""
    if spec.basis_matrices is None:
        raise InvalidParameter("adjoint_from_matrices needs basis matrices")
    return _conjugation_adjoint(spec, g.matrix)


def _conjugation_adjoint(spec: LieAlgebraSpec, matrix) -> np.ndarray:
    matrix = nx.asarray(matrix)
    g_inv = nx.inverse(matrix)
    columns = [
        coefficients_in_basis(spec.basis_matrices, matrix @ e @ g_inv)
        for e in spec.basis_matrices
    ]
    if not columns:
        return np.zeros((0, 0))
    return nx.asarray(columns).T


def adjoint_matrix(group: MatrixGroup, coords) -> np.ndarray:
    """A(g) from the closed form when registered, else by conjugation of the chart matrix."""
    if group.adjoint is not None:
        return nx.asarray(group.adjoint(coords))
    return _conjugation_adjoint(group.algebra, group.to_matrix(coords))


def group_exp(group: MatrixGroup, xi) -> GroupElement:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (group.dim,):
        raise DimensionMismatch(f"algebra element must have length {group.dim}")
    return group.from_matrix(nx.mat_exp(group.algebra.matrix(xi)))


def left_multiply(group: MatrixGroup, g1: GroupElement, g2: GroupElement) -> GroupElement:
    return group.from_matrix(g1.matrix @ g2.matrix)


def inverse(group: MatrixGroup, g: GroupElement) -> GroupElement:
    return group.from_matrix(nx.inverse(g.matrix))


# ----------------------------
# Affine group of the line
# ----------------------------

def _affine_matrix(c):
    theta, phi = c[0], c[1]
    return nx.asarray([[nx.exp(theta), phi], [0.0, 1.0]])


def _affine_coords(m):
    if m[0, 0] <= 0.0 or abs(m[1, 0]) > CLOSURE_TOLERANCE or abs(m[1, 1] - 1.0) > CLOSURE_TOLERANCE:
        raise ChartOutOfRange(f"matrix is not an orientation-preserving affine map: {m.tolist()}")
    return np.array([np.log(m[0, 0]), m[0, 1]])


def affine_group() -> MatrixGroup:
    """(θ, φ) ↦ [[e^θ, φ], [0, 1]], with (θ₁,φ₁)∗(θ₂,φ₂) = (θ₁+θ₂, e^{θ₁}φ₂ + φ₁)."""
    e1 = np.array([[1.0, 0.0], [0.0, 0.0]])
    e2 = np.array([[0.0, 1.0], [0.0, 0.0]])
    return MatrixGroup(
        name="affine",
        algebra=LieAlgebraSpec.from_matrices([e1, e2]),
        to_matrix=_affine_matrix,
        to_coords=_affine_coords,
        compose=lambda a, b: nx.asarray([a[0] + b[0], nx.exp(a[0]) * b[1] + a[1]]),
        adjoint=lambda c: nx.asarray([[1.0, 0.0], [-c[1], nx.exp(c[0])]]),
        fundamental=lambda c: nx.asarray([[1.0, 0.0], [c[1], 1.0]]),
    )


# ----------------------------
# Translations ℝᵈ
# ----------------------------

def translation_group(dim: int) -> MatrixGroup:
    size = dim + 1
    basis = []
    for a in range(dim):
        e = np.zeros((size, size))
        e[a, dim] = 1.0
        basis.append(e)

    def to_matrix(c):
        m = np.eye(size, dtype=object) if nx.is_dual(c) else np.eye(size)
        for a in range(dim):
            m[a, dim] = c[a]
        return nx.asarray(m)

    def to_coords(m):
        if np.max(np.abs(m[:dim, :dim] - np.eye(dim)), initial=0.0) > CLOSURE_TOLERANCE:
            raise ChartOutOfRange("matrix is not a translation")
        return np.array(m[:dim, dim], dtype=float)

    return MatrixGroup(
        name=f"R{dim}",
        algebra=LieAlgebraSpec.abelian(dim, tuple(basis)),
        to_matrix=to_matrix,
        to_coords=to_coords,
        compose=lambda a, b: nx.asarray(a) + nx.asarray(b),
        adjoint=lambda c: np.eye(dim),
        fundamental=lambda c: np.eye(dim),
    )


# ----------------------------
# Rotations SO(3) in exponential coordinates
# ----------------------------

SMALL_ANGLE = 1e-2
LOG_SERIES_THRESHOLD = 1e-8
ANTIPODAL_COSINE = -0.999999


def hat(w) -> np.ndarray:
    return nx.asarray([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def vee(m) -> np.ndarray:
    return nx.asarray([m[2, 1], m[0, 2], m[1, 0]])


def _sq_norm(w):
    return w[0] * w[0] + w[1] * w[1] + w[2] * w[2]


def rotation_matrix(w) -> np.ndarray:
    """Rodrigues: R = I + a[ω]× + b[ω]×², a = sinθ/θ, b = (1 − cosθ)/θ²."""
    t2 = _sq_norm(w)
    if nx.value_of(t2) < SMALL_ANGLE:
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2**3 / 5040.0 + t2**4 / 362880.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2**3 / 40320.0 + t2**4 / 3628800.0
    else:
        t = nx.sqrt(t2)
        a = nx.sin(t) / t
        b = (1.0 - nx.cos(t)) / t2
    k = hat(w)
    return np.eye(3) + a * k + b * (k @ k)


def left_jacobian_inverse(w) -> np.ndarray:
    """J_l⁻¹(ω) = I − ½[ω]× + e[ω]×², e = 1/θ² − (1 + cosθ)/(2θ sinθ)."""
    t2 = _sq_norm(w)
    if nx.value_of(t2) < SMALL_ANGLE:
        e = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2**3 / 1209600.0 + t2**4 / 47900160.0
    else:
        t = nx.sqrt(t2)
        e = 1.0 / t2 - (1.0 + nx.cos(t)) / (2.0 * t * nx.sin(t))
    k = hat(w)
    return np.eye(3) - 0.5 * k + e * (k @ k)


def rotation_log(m) -> np.ndarray:
    s = 0.5 * (vee(m) - vee(m.T))
    c = 0.5 * (m[0, 0] + m[1, 1] + m[2, 2] - 1.0)
    if nx.value_of(c) < ANTIPODAL_COSINE:
        raise ChartOutOfRange(f"rotation angle too close to π (cos θ = {nx.value_of(c):.9f})")
    y = _sq_norm(s)
    if nx.value_of(y) < LOG_SERIES_THRESHOLD and nx.value_of(c) > 0.0:
        # θ/sinθ as a series in sin²θ
        return s * (1.0 + y / 6.0 + 3.0 * y * y / 40.0)
    r = nx.sqrt(y)
    return s * (nx.atan2(r, c) / r)


def rotation_group() -> MatrixGroup:
    """SO(3) with exponential coordinates |ω| < π and C^c_ab = ε_abc."""
    basis = [hat(e) for e in np.eye(3)]
    return MatrixGroup(
        name="SO3",
        algebra=LieAlgebraSpec.from_matrices(basis),
        to_matrix=rotation_matrix,
        to_coords=rotation_log,
        compose=lambda a, b: rotation_log(rotation_matrix(a) @ rotation_matrix(b)),
        adjoint=rotation_matrix,
        fundamental=left_jacobian_inverse,
    )
