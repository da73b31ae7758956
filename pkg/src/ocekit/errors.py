"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation.

    Raised, for example, when a mean-variance disutility is evaluated left
    of the point where it stops being nondecreasing, or when a quantity
    such as a probability leaves its open interval.
    """


class SpecStringError(ValueError):
    """A disutility spec string does not match the accepted grammar."""


class CsvFormatError(Exception):
    """A CSV input file is malformed.  Carries the offending line number."""

    def __init__(self, path, line_number, message):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{self.path}, line {line_number}: {message}")


class TrainingDivergedError(RuntimeError):
    """The training objective became non-finite."""
