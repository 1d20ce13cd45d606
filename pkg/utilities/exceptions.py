class StltsError(Exception):
    """Base class for every error raised by stlts."""


class FormulaSyntaxError(StltsError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")


class FormulaValidationError(StltsError, ValueError):
    pass


class ParameterDomainError(StltsError, ValueError):
    pass


class TraceError(StltsError, ValueError):
    pass


class ModelValidationError(StltsError, ValueError):
    pass


class EncodingError(StltsError, ValueError):
    pass


class BigMError(EncodingError):
    pass


class SolverError(StltsError):
    def __init__(self, message: str, output: str = ""):
        self.output = output
        super().__init__(message)


class SolutionViolationError(StltsError):
    def __init__(self, message: str, worst_constraint: str = "", worst_violation: float = 0.0):
        self.worst_constraint = worst_constraint
        self.worst_violation = worst_violation
        super().__init__(message)


class MonitorValidationError(StltsError):
    """A solver-produced trace was rejected by the monitor. Indicates an encoding bug."""


class ConfigError(StltsError, ValueError):
    pass
