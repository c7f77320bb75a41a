class ConfigFileError(ValueError):
    """Fichier de configuration mal formé (ligne sans '=', clé répétée)."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        super().__init__(message)
        self.line_number = line_number
