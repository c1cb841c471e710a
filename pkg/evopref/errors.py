"""
Exception types raised by the evopref package.
"""


class EvoPrefError(Exception):
    """Base class for all evopref errors"""


class ShapeError(EvoPrefError, ValueError):
    """Layer shape violates r <= min(d, k_cols) or has non-positive dimensions"""


class ParameterError(EvoPrefError, ValueError):
    """Invalid scalar parameter (sigma, gamma, mu, ...)"""


class IncompatibilityError(EvoPrefError, ValueError):
    """Two objects that must agree in shape or dimension do not"""


class RangeError(EvoPrefError, ValueError):
    """Objective component outside [0, 1]"""


class LayerIndexError(EvoPrefError, IndexError):
    """Layer index out of range"""


class ConstructionError(EvoPrefError):
    """Landscape could not be constructed with the requested separation"""


class DivergenceError(EvoPrefError):
    """Optimizer produced non-finite parameters"""


class BudgetError(EvoPrefError, ValueError):
    """Evaluation budget too small for the requested algorithm"""


class ConfigError(EvoPrefError, ValueError):
    """Experiment configuration is invalid"""


class MissingSnapshotError(EvoPrefError):
    """Run record lacks archive snapshots for some generations"""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"Missing archive snapshots for generations: {self.missing}")


class GenerationError(EvoPrefError):
    """Error raised inside the evolution loop, tagged with the generation"""

    def __init__(self, generation: int, cause: Exception):
        self.generation = generation
        super().__init__(f"Generation {generation}: {type(cause).__name__}: {cause}")


class StorageError(EvoPrefError, OSError):
    """Result file or run index could not be written or read"""

    def __init__(self, path, cause: Exception):
        self.path = str(path)
        super().__init__(f"I/O error at {self.path}: {cause}")
