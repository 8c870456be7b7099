"""Exception hierarchy shared by every stage of the pipeline."""


class TopoParkError(Exception):
    """Base class for all pipeline errors."""


class FormatError(TopoParkError, ValueError):
    """A trial, manifest or diagram file does not match its expected layout."""


class TooShort(TopoParkError, ValueError):
    pass


class EmptySignal(TopoParkError, ValueError):
    pass


class NonFiniteSample(TopoParkError, ValueError):
    pass


class DegenerateChannel(TopoParkError, ValueError):
    def __init__(self, channel):
        super().__init__(f"channel {channel} is identically zero after centering")
        self.channel = channel


class InvalidThreshold(TopoParkError, ValueError):
    pass


class InvalidPoint(TopoParkError, ValueError):
    pass


class InvalidCell(TopoParkError, ValueError):
    pass


class InvalidConfig(TopoParkError, ValueError):
    pass


class ChannelExcluded(TopoParkError, KeyError):
    pass


class ChannelError(TopoParkError):
    """Wraps an error raised while featurizing one channel."""

    def __init__(self, channel, cause):
        super().__init__(f"channel {channel}: {cause}")
        self.channel = channel
        self.cause = cause


class DegenerateLabels(TopoParkError, ValueError):
    pass


class NonFiniteInput(TopoParkError, ValueError):
    pass


class DimError(TopoParkError, ValueError):
    pass


class TooFewSubjects(TopoParkError, ValueError):
    pass


class TooFewSamples(TopoParkError, ValueError):
    pass


class DegenerateCorrelation(TopoParkError, ValueError):
    pass


class FoldError(TopoParkError):
    def __init__(self, fold, cause):
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause


class EmptyConfig(TopoParkError, ValueError):
    pass
