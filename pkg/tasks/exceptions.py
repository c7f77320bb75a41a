class TaskError(ValueError):
    """Paramètres de tâche ou de fédération invalides."""


class FederationFormatError(TaskError):
    pass


class ReferenceSolveError(RuntimeError):
    """La résolution de référence n'atteint pas la précision demandée."""

    def __init__(self, message: str, grad_norm: float) -> None:
        super().__init__(message)
        self.grad_norm = grad_norm
