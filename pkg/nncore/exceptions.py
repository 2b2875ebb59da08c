class NnCoreError(Exception):
    """Base class for errors raised by the computation core."""


class ShapeError(NnCoreError, ValueError):
    pass


class NonFiniteError(NnCoreError, ValueError):
    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class GradientCheckError(NnCoreError, AssertionError):
    def __init__(self, message, name=None, index=None, analytic=None, numeric=None):
        super().__init__(message)
        self.name = name
        self.index = index
        self.analytic = analytic
        self.numeric = numeric


class CheckpointError(NnCoreError):
    pass
