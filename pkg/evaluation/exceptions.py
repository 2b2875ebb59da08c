class EvaluationError(Exception):
    """Base class for scoring and backtesting errors."""


class SingularCovarianceError(EvaluationError, ValueError):
    pass


class BacktestError(EvaluationError):
    pass
