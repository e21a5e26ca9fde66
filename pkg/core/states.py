"""
Small-dimension quantum state algebra.

Everything here works on dense numpy arrays of dimension 2 (one spin) or
4 (system spin S tensored with environment spin E, S factor first).
DensityMatrix and Ket validate on construction and hold read-only copies,
so instances can be shared freely between threads.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NormalizationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
NORM_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_minus = (sigma_x - i sigma_y) / 2 = |0><1|
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)

PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)
VALID_DIMS = (2, 4)


def _frozen(array):
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def as_matrix(a, dims=VALID_DIMS):
    """Return `a` as a complex square array, checking its dimension."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] not in dims:
        raise DimensionError(f"matrix dimension must be one of {dims}, got {m.shape[0]}")
    return m


def adjoint(a):
    return as_matrix(a).conj().T


def eigenvalues(a):
    """Ascending spectrum of a Hermitian 2x2 or 4x4 matrix."""
    return np.linalg.eigvalsh(as_matrix(a))


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size not in VALID_DIMS:
            raise DimensionError(f"ket dimension must be 2 or 4, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"ket is not normalized (norm = {norm!r})")
        object.__setattr__(self, 'amplitudes', _frozen(amps))

    @property
    def dim(self):
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @property
    def projector(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive (up to -1e-10) matrix of dim 2 or 4."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITICITY_TOL:
            raise NormalizationError(f"matrix is not Hermitian (max |A - A^H| = {herm_err:.3e})")
        trace = np.trace(m)
        if abs(trace - 1.0) > TRACE_TOL:
            raise NormalizationError(f"trace must be 1, got {trace!r}")
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < POSITIVITY_TOL:
            raise NormalizationError(f"matrix is not positive (min eigenvalue {lowest:.3e})")
        object.__setattr__(self, 'matrix', _frozen(m))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    @classmethod
    def maximally_mixed(cls, dim=2):
        return cls(np.eye(dim, dtype=complex) / dim)


def basis_ket(index, dim=2):
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return Ket(amps)


def plus_ket():
    return Ket(np.array([1, 1], dtype=complex) / np.sqrt(2))


def minus_ket():
    return Ket(np.array([1, -1], dtype=complex) / np.sqrt(2))


def theta_ket(theta):
    """|theta> = cos(theta)|0> + sin(theta)|1>."""
    return Ket(np.array([np.cos(theta), np.sin(theta)], dtype=complex))


def ket_to_density(k: Ket) -> DensityMatrix:
    if not isinstance(k, Ket):
        k = Ket(k)
    return DensityMatrix(k.projector)


def tensor(a, b):
    """Kronecker product of two single-spin operators, S factor first."""
    a = as_matrix(a, dims=(2,))
    b = as_matrix(b, dims=(2,))
    return np.kron(a, b)


def _raw(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)


def partial_trace_env(rho_se) -> DensityMatrix:
    """Trace out the environment spin of a joint S-E state."""
    m = _raw(rho_se)
    if m.shape != (4, 4):
        raise DimensionError(f"partial trace needs a 4x4 joint state, got {m.shape}")
    reduced = np.einsum('ijkj->ik', m.reshape(2, 2, 2, 2))
    return DensityMatrix(reduced)


def partial_trace_env_raw(m):
    """Same contraction as `partial_trace_env` without state validation."""
    m = as_matrix(m, dims=(4,))
    return np.einsum('ijkj->ik', m.reshape(2, 2, 2, 2))


def trace_norm(a):
    """Sum of singular values, Tr sqrt(A^H A)."""
    return float(np.sum(np.linalg.svd(as_matrix(a), compute_uv=False)))


def trace_distance(rho0, rho1):
    return 0.5 * trace_norm(_raw(rho0) - _raw(rho1))


def fidelity(rho0, rho1):
    """
    NMR state fidelity |Tr(r0 r1)| / sqrt(Tr(r0^2) Tr(r1^2)).

    The overlap is evaluated symmetrically so that swapping the arguments
    gives a bitwise identical result.
    """
    a = _raw(rho0)
    b = _raw(rho1)
    if a.shape != b.shape:
        raise DimensionError(f"fidelity needs equal dimensions, got {a.shape} and {b.shape}")
    overlap = 0.5 * (np.vdot(a, b) + np.vdot(b, a))
    norm_a = np.real(np.vdot(a, a))
    norm_b = np.real(np.vdot(b, b))
    denominator = np.sqrt(norm_a * norm_b)
    if denominator == 0.0:
        raise NormalizationError("fidelity is undefined for a zero matrix")
    return float(abs(overlap) / denominator)


def pauli_basis(dim):
    """Orthonormal (Hilbert-Schmidt) Pauli basis: sigma/sqrt(2), or products for dim 4."""
    if dim == 2:
        return [p / np.sqrt(2) for p in PAULIS]
    if dim == 4:
        return [np.kron(p, q) / 2 for p, q in itertools.product(PAULIS, PAULIS)]
    raise DimensionError(f"no Pauli basis for dimension {dim}")


def pauli_decompose(m):
    """Coefficients c_k = Tr(P_k M) over the normalized Pauli basis."""
    m = as_matrix(m)
    return np.array([np.trace(p @ m) for p in pauli_basis(m.shape[0])])


def pauli_reconstruct(coefficients: Sequence[complex]):
    coefficients = np.asarray(coefficients, dtype=complex)
    dim = {4: 2, 16: 4}.get(coefficients.size)
    if dim is None:
        raise DimensionError(f"expected 4 or 16 coefficients, got {coefficients.size}")
    return sum(c * p for c, p in zip(coefficients, pauli_basis(dim)))


def expectation(rho, operator):
    """Tr(O rho)."""
    m = _raw(rho)
    o = as_matrix(operator)
    if o.shape != m.shape:
        raise DimensionError(f"operator {o.shape} does not act on state {m.shape}")
    return complex(np.trace(o @ m))
