from .errors import QmlError
from .states import (
    DensityMatrix,
    Ket,
    basis_ket,
    expectation,
    fidelity,
    ket_to_density,
    minus_ket,
    partial_trace_env,
    pauli_decompose,
    pauli_reconstruct,
    plus_ket,
    tensor,
    theta_ket,
    trace_norm,
)

__all__ = [
    'QmlError',
    'DensityMatrix',
    'Ket',
    'basis_ket',
    'expectation',
    'fidelity',
    'ket_to_density',
    'minus_ket',
    'partial_trace_env',
    'pauli_decompose',
    'pauli_reconstruct',
    'plus_ket',
    'tensor',
    'theta_ket',
    'trace_norm',
]
