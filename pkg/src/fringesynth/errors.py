"""Exception hierarchy shared by the library and the CLI.

Each class carries a short ``category`` string that the CLI prints on stderr,
so scripts can branch on the failure kind without parsing messages.
"""


class FringeSynthError(Exception):
    category = "error"


class InvalidInputError(FringeSynthError, ValueError):
    category = "invalid_input"


class ConvergenceError(FringeSynthError, ArithmeticError):
    category = "no_convergence"

    def __init__(self, message: str, worst_residual: float):
        super().__init__(f"{message} (worst residual {worst_residual:.3e})")
        self.worst_residual = worst_residual


class FormatError(FringeSynthError, ValueError):
    """Malformed input file; ``line``/``column`` are 1-based when known."""

    category = "format_error"

    def __init__(self, message: str, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.column = column


class InsufficientFringesError(FringeSynthError, ValueError):
    category = "insufficient_fringes"
