class ProtocolError(RuntimeError):
    """Violation du déroulé d'un round (ordre des messages, tailles incohérentes)."""


class AggregationError(ProtocolError):
    pass


class TranscriptFormatError(ProtocolError, ValueError):
    """Ligne de journal illisible lors d'une relecture."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"ligne {line_number} : {message}"
        super().__init__(message)
        self.line_number = line_number
