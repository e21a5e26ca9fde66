from .master_equation import (
    GeneratorSample,
    MagnetizationTrace,
    generator_matrix,
    infer_fg,
    map_matrix,
    residual,
)

__all__ = ['GeneratorSample', 'MagnetizationTrace', 'generator_matrix', 'infer_fg', 'map_matrix', 'residual']
