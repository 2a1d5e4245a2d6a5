"""Exception hierarchy.

Everything raised on bad input derives from :class:`RDCError`; the CLI maps
those to exit code 2 and anything else to exit code 1.
"""


class RDCError(Exception):
    """Base class for input and contract errors."""


class ConfigError(RDCError, ValueError):
    pass


class PaddingRequiredError(RDCError, ValueError):
    """Spatial dimensions are not multiples of the model's total stride."""


class ContractError(RDCError, ValueError):
    """Shapes, causality, or value ranges violate an operation's contract."""


class NumericError(RDCError, ArithmeticError):
    pass


class EncodeError(RDCError, ValueError):
    pass


class DecodeError(RDCError, ValueError):
    pass


class ConfigHashMismatch(DecodeError):
    def __init__(self, stream_hash: int, model_hash: int):
        self.stream_hash = stream_hash
        self.model_hash = model_hash
        super().__init__(
            f"bitstream was produced by config {stream_hash:016x} "
            f"but the decoder is config {model_hash:016x}"
        )


class CountingError(RDCError, ValueError):
    """A layer kind the FLOPs counter does not know how to price."""


class IngestionError(RDCError, ValueError):
    pass


class NoOverlapError(RDCError, ValueError):
    pass


class TrainingError(RDCError, RuntimeError):
    pass


class BenchmarkError(RDCError, RuntimeError):
    pass
