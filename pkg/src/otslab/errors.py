"""Exception hierarchy shared by every module."""


class OTSLabError(Exception):
    """Base class for all errors raised by otslab."""


class BudgetExceeded(OTSLabError):
    """An exhaustive enumeration would exceed the configured cap."""

    def __init__(self, what: str, needed: int, cap: int):
        self.what = what
        self.needed = needed
        self.cap = cap
        super().__init__(f"{what}: {needed} items exceed budget of {cap}")


class InvalidDistribution(OTSLabError, ValueError):
    pass


class NegativeWeight(InvalidDistribution):
    pass


class WeightsDoNotSumToOne(InvalidDistribution):
    pass


class SpaceMismatch(OTSLabError, ValueError):
    pass


class InconsistentTrainingSet(OTSLabError, ValueError):
    pass


class NoOffTrainingMass(OTSLabError):
    """The training inputs cover every point of positive training mass."""


class PreconditionViolated(OTSLabError, ValueError):
    pass
