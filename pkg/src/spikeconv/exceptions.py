"""Exception types raised across the package."""


class SpikeConvError(Exception):
    """Base class for all errors raised by spikeconv."""


class ShapeError(SpikeConvError, ValueError):
    """Operand shapes are inconsistent.

    ``dim`` names the offending dimension (e.g. ``"Cin"`` or ``"N"``) so
    callers can report it without parsing the message.
    """

    def __init__(self, message: str, dim: str | None = None):
        super().__init__(message)
        self.dim = dim


class NonFiniteError(SpikeConvError, ValueError):
    """A NaN or infinite value reached an operation."""


class ModelError(SpikeConvError, ValueError):
    """A model description is invalid; ``layer`` is the offending layer index."""

    def __init__(self, message: str, layer: int | None = None):
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)
        self.layer = layer


class NeuronStepError(SpikeConvError, RuntimeError):
    """A neuron layer was stepped past its final time-step."""


class PayloadError(SpikeConvError, RuntimeError):
    """A non-binary tensor was about to cross a spiking layer boundary."""
