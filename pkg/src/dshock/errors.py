"""Exception types shared across the package."""


class DshockError(Exception):
    """Base class for all package errors."""


class InvalidGridError(DshockError):
    pass


class UnsupportedDimensionError(DshockError):
    pass


class IncompatibleFieldsError(DshockError):
    pass


class KernelTooNarrowError(DshockError):
    pass


class KernelTooWideError(DshockError):
    pass


class InvalidParamsError(DshockError):
    """A scheme-parameter inequality is violated; message names it."""


class InvalidFluxError(DshockError):
    pass


class UnstableStepError(DshockError):
    pass


class BlowUpError(DshockError):
    """Non-finite value detected while stepping."""

    def __init__(self, time, field_name, magnitude):
        super().__init__(
            f"blow-up detected at t={time:.6g} in field '{field_name}' "
            f"(max |value| = {magnitude:.6g})"
        )
        self.time = time
        self.field_name = field_name
        self.magnitude = magnitude


class CharacteristicsCrossedError(DshockError):
    pass


class InvalidLadderError(DshockError):
    pass


class InsufficientDataError(DshockError):
    pass


class ScenarioError(DshockError):
    """Scenario parse or validation failure."""


class NothingToPlotError(DshockError):
    pass
