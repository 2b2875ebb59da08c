class GarchConvergenceError(RuntimeError):
    def __init__(self, message, best=None, loglik=None):
        super().__init__(message)
        self.best = best
        self.loglik = loglik
