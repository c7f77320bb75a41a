class OptimError(ValueError):
    """Paramètre d'optimisation invalide (pas, contrat de bruit, échantillonneur)."""


class UnknownTheoremError(OptimError):
    pass


class DivergenceError(RuntimeError):
    """Itéré non fini ou au-delà du seuil de divergence."""

    def __init__(self, message: str, round_index: int) -> None:
        super().__init__(message)
        self.round_index = round_index
