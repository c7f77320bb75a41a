class SamplingError(ValueError):
    """Base des erreurs d'entrée du module d'échantillonnage."""


class InvalidNormsError(SamplingError):
    pass


class InvalidBudgetError(SamplingError):
    pass


class InvalidProbabilitiesError(SamplingError):
    pass


class UndefinedEstimatorError(SamplingError):
    """Un client de norme positive a une probabilité nulle : estimateur biaisé."""


class DimensionMismatchError(SamplingError):
    pass


class OracleConvergenceError(RuntimeError):
    """L'oracle par gradient projeté n'a pas convergé ; garde le meilleur point."""

    def __init__(self, message: str, best_probs, best_objective: float) -> None:
        super().__init__(message)
        self.best_probs = best_probs
        self.best_objective = best_objective
