"""Exception types shared across the pipeline."""


class QuishingError(Exception):
    """Base class for every error raised by this package."""


# -- QR encoding ------------------------------------------------------------

class CapacityExceeded(QuishingError, ValueError):
    def __init__(self, length, capacity):
        super().__init__(f"payload of {length} bytes exceeds capacity of {capacity} bytes")
        self.length = length
        self.capacity = capacity


# -- dataset ----------------------------------------------------------------

class DatasetError(QuishingError):
    pass


class MalformedRow(DatasetError):
    def __init__(self, line_no, reason=""):
        msg = f"malformed row at line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line_no = line_no


class EmptyFile(DatasetError):
    pass


class DegenerateSplit(DatasetError):
    pass


class FormatVersionMismatch(DatasetError):
    pass


# -- models -----------------------------------------------------------------

class ModelError(QuishingError):
    pass


class SingleClassTraining(ModelError):
    pass


class ShapeMismatch(ModelError, ValueError):
    pass


class UnsupportedFamily(ModelError):
    pass


# -- evaluation / analysis --------------------------------------------------

class EvaluationError(QuishingError, ValueError):
    pass


class LengthMismatch(EvaluationError):
    pass


class EmptyInput(EvaluationError):
    pass


class SingleClassLabels(EvaluationError):
    pass


class TooFewSamplesPerClass(EvaluationError):
    pass


class EmptyParamSpace(EvaluationError):
    pass


class EmptySelection(QuishingError):
    pass


class MissingCell(QuishingError, KeyError):
    def __init__(self, model, column):
        super().__init__(f"missing result for model {model!r} under {column!r}")
        self.model = model
        self.column = column

    def __str__(self):
        return self.args[0]
