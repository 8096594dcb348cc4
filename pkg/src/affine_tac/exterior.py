"""Coordinate exterior algebra of hyperplane directions in affine space

Elements of ∧^{m-1}R^m are stored by their coefficients in the basis
E_i = e_1∧…∧ê_i∧…∧e_m. With this basis the height function of a multicovector is a signed
dot product, which keeps its linearity exact at machine precision.
"""

import logging
from dataclasses import dataclass

import numpy as np

from affine_tac.exceptions import DegenerateError, InputError

logger = logging.getLogger(__name__)

# Membership tolerance for the unit ellipsoid
ELLIPSOID_TOL = 1e-10

# Tolerance on the volume of a volume basis
VOLUME_TOL = 1e-12


def coefficient_signs(m: int) -> np.ndarray:
    """Signs (-1)^{m-i} (1-based i) relating E_i-coefficients to the dual covector"""
    return (-1.0) ** (m - 1 - np.arange(m))


def omega_prime_sign(m: int) -> float:
    """Value of ω′ on (E_1, …, E_m) for a unimodular basis, (-1)^{m(m-1)/2}"""
    return float((-1) ** (m * (m - 1) // 2))


@dataclass(frozen=True, eq=False)
class AffineSpace:
    """Affine space R^m with the volume form ω realised by a unimodular basis

    Args:
        dim: The dimension m
        volume_basis: (m, m) array whose columns v_1, …, v_m satisfy ω(v_1, …, v_m) = 1
    """

    dim: int
    volume_basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.asarray(self.volume_basis, dtype=float)
        if basis.shape != (self.dim, self.dim):
            raise InputError(
                f"Volume basis of shape {basis.shape} does not match dimension {self.dim}",
            )
        volume = np.linalg.det(basis)
        if abs(volume - 1.0) > VOLUME_TOL:
            raise InputError(f"Volume basis has determinant {volume}, expected 1")
        object.__setattr__(self, "volume_basis", basis)

    @classmethod
    def standard(cls, m: int) -> "AffineSpace":
        """R^m with the standard basis"""
        return cls(dim=m, volume_basis=np.eye(m))

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of v with respect to the volume basis"""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise InputError(
                f"Vector of dimension {v.shape[-1]} in a space of dimension {self.dim}",
            )
        return np.linalg.solve(self.volume_basis, v)


@dataclass(frozen=True, eq=False)
class MultiCovector:
    """An element of ∧^{m-1}R^m, i.e. a hyperplane direction with a scale"""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 2:
            raise InputError(f"Multicovector coefficients must be a vector, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        """Dimension m of the ambient space"""
        return int(self.coeffs.size)

    def covector(self) -> np.ndarray:
        """Dual vector c with height(φ, v) = c · v"""
        return coefficient_signs(self.dim) * self.coeffs

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector"""
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "MultiCovector") -> "MultiCovector":
        _check_dims(self.dim, other.dim)
        return MultiCovector(self.coeffs + other.coeffs)

    def __neg__(self) -> "MultiCovector":
        return MultiCovector(-self.coeffs)

    def __mul__(self, scalar: float) -> "MultiCovector":
        return MultiCovector(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"MultiCovector({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True, eq=False)
class UnitEllipsoid:
    """The unit ellipsoid S = {Σ a_i ζ_i : Σ a_i² = 1} in ∧^{m-1}R^m

    Args:
        zeta: (m, m) array whose rows are the E-coefficients of ζ_1, …, ζ_m
        identifier: Name used in reports
    """

    zeta: np.ndarray
    identifier: str = "standard"

    def __post_init__(self) -> None:
        zeta = np.asarray(self.zeta, dtype=float)
        if zeta.ndim != 2 or zeta.shape[0] != zeta.shape[1]:
            raise InputError(f"ζ-basis must be a square matrix, got {zeta.shape}")
        volume = np.linalg.det(zeta)
        if abs(volume - 1.0) > ELLIPSOID_TOL:
            raise InputError(f"ζ-basis has ω′-volume {volume}, expected 1")
        object.__setattr__(self, "zeta", zeta)

    @property
    def dim(self) -> int:
        """Dimension m of the ambient space"""
        return int(self.zeta.shape[0])

    @classmethod
    def standard(cls, m: int) -> "UnitEllipsoid":
        """The ellipsoid with ζ_i = E_i"""
        return cls(zeta=np.eye(m), identifier="standard")

    @classmethod
    def sheared(cls, m: int, seed: int = 0, scale: float = 0.5) -> "UnitEllipsoid":
        """A unimodular shear of the standard ζ-basis

        Args:
            m: Ambient dimension
            seed: Seed for the strictly upper triangular part
            scale: Size of the off-diagonal entries
        """
        rng = np.random.default_rng(seed)
        zeta = np.eye(m) + np.triu(scale * rng.standard_normal((m, m)), k=1)
        return cls(zeta=zeta, identifier=f"sheared-{seed}")

    def coefficients(self, phi: MultiCovector) -> np.ndarray:
        """ζ-coefficients a of φ, so that φ = Σ a_i ζ_i"""
        _check_dims(self.dim, phi.dim)
        return np.linalg.solve(self.zeta.T, phi.coeffs)

    def element(self, a: np.ndarray) -> MultiCovector:
        """The multicovector Σ a_i ζ_i"""
        a = np.asarray(a, dtype=float)
        _check_dims(self.dim, a.shape[-1])
        return MultiCovector(a @ self.zeta)

    def contains(self, phi: MultiCovector, tol: float = ELLIPSOID_TOL) -> bool:
        """Whether φ lies on S"""
        return abs(np.linalg.norm(self.coefficients(phi)) - 1.0) <= tol


def _check_dims(expected: int, got: int) -> None:
    if expected != got:
        raise InputError(f"Dimension mismatch: expected {expected}, got {got}")


def wedge_coefficients(vectors: np.ndarray) -> np.ndarray:
    """E-coefficients of v_1∧…∧v_{m-1} for stacks of vector tuples

    Args:
        vectors: Array of shape (..., m-1, m)

    Returns:
        Array of shape (..., m); entry i is the minor of [v_1 … v_{m-1}] without row i
    """
    vectors = np.asarray(vectors, dtype=float)
    k, m = vectors.shape[-2:]
    if k != m - 1:
        raise InputError(f"Need {m - 1} vectors of dimension {m}, got {k}")
    # Columns of each minor are the vectors with coordinate i deleted
    keep = ~np.eye(m, dtype=bool)
    minors = np.stack(
        [vectors[..., keep[i]] for i in range(m)],
        axis=-3,
    )
    return np.linalg.det(minors)


def wedge_hyperplane(vectors: list[np.ndarray] | np.ndarray) -> MultiCovector:
    """The multicovector φ = v_1∧…∧v_{m-1}

    The result satisfies height(φ, v) = det[v_1 … v_{m-1} v] for every v.

    Args:
        vectors: Exactly m-1 vectors of dimension m
    """
    stacked = np.asarray(vectors, dtype=float)
    if stacked.ndim != 2:
        raise InputError(f"Expected a list of vectors, got an array of shape {stacked.shape}")
    return MultiCovector(wedge_coefficients(stacked))


def height(phi: MultiCovector, v: np.ndarray) -> float:
    """The height function h̃_φ(v) = ω(φ, v) = Σ_i (-1)^{m-i} φ_i v_i"""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise InputError(f"height expects a single vector, got shape {v.shape}")
    _check_dims(phi.dim, v.size)
    return float(phi.covector() @ v)


def height_covector(phi: MultiCovector) -> np.ndarray:
    """The vector c with h̃_φ(v) = c · v"""
    return phi.covector()


def heights(coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Batched height: coeffs (..., m) against points (..., m), broadcasting"""
    coeffs = np.asarray(coeffs, dtype=float)
    points = np.asarray(points, dtype=float)
    _check_dims(coeffs.shape[-1], points.shape[-1])
    return np.einsum("...i,...i->...", coefficient_signs(coeffs.shape[-1]) * coeffs, points)


def sample_ellipsoid(S: UnitEllipsoid, rng_seed: int, count: int) -> list[MultiCovector]:
    """Draw multicovectors uniformly from the coefficient sphere of S

    Normalised Gaussian vectors are uniform on the round sphere, so the draws realise the
    normalised round measure on S in the fixed ζ-basis.

    Args:
        S: The unit ellipsoid
        rng_seed: Seed for numpy's default generator
        count: Number of draws
    """
    return draw_ellipsoid(S, np.random.default_rng(rng_seed), count)


def draw_ellipsoid(S: UnitEllipsoid, rng: np.random.Generator, count: int) -> list[MultiCovector]:
    """Draw the next `count` multicovectors of S from an existing generator"""
    if count < 1:
        raise InputError(f"count must be positive, got {count}")
    a = rng.standard_normal((count, S.dim))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return [S.element(row) for row in a]


def project_to_ellipsoid(S: UnitEllipsoid, phi: MultiCovector) -> tuple[MultiCovector, float]:
    """Rescale φ by μ > 0 onto S

    Returns:
        The pair (μ·φ, μ)
    """
    radius = float(np.linalg.norm(S.coefficients(phi)))
    if radius == 0.0:
        raise DegenerateError("Cannot project the zero multicovector onto the unit ellipsoid")
    mu = 1.0 / radius
    return MultiCovector(mu * phi.coeffs), mu
