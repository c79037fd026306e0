"""Exception hierarchy shared by every module."""


class PrefdiscError(Exception):
    """Base class for all library errors."""


class DegenerateOddsError(PrefdiscError, ValueError):
    """A binary probability is 0 or 1, so odds or log-odds are undefined."""


class MissingDataError(PrefdiscError, KeyError):
    """A table required by a computation is absent from the dataset."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing data"


class UnsupportedSizeError(PrefdiscError, ValueError):
    """The universe or menu is too small for the requested operation."""


class NotSoftmaxError(PrefdiscError, ValueError):
    """Identification found a nonpositive noise value."""


class IntransitiveError(PrefdiscError, ValueError):
    """A DDM with intransitive initial conditions was given where a transitive one is required."""


class RunawayError(PrefdiscError, RuntimeError):
    """A diffusion walk exhausted its step budget without hitting a barrier."""


class ConvergenceError(PrefdiscError, RuntimeError):
    """An iterative procedure did not converge."""


class InvalidNeuralBiasError(PrefdiscError, ValueError):
    """A neural bias vector has a zero or negative entry."""


class SchemaError(PrefdiscError, ValueError):
    """An input document does not match its schema.

    ``path`` is a JSON pointer to the offending location.
    """

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path

    def __str__(self):
        msg = self.args[0]
        return f"{self.path}: {msg}" if self.path else msg
