"""Exception hierarchy shared by all modules."""


class EpidemicGameError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EpidemicGameError):
    """Invalid scenario configuration; the message carries the field path."""


class GraphError(EpidemicGameError, ValueError):
    pass


class DisconnectedFromSource(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NotAnEdge(GraphError):
    pass


class InvalidOverride(GraphError):
    pass


class InvalidProfile(EpidemicGameError, ValueError):
    pass


class InvalidReduction(EpidemicGameError, ValueError):
    pass


class TooLarge(EpidemicGameError):
    """A size cap (exact-mode nodes, oracle edges) was exceeded."""


class UnpunishableNode(EpidemicGameError):
    """Some in-neighbor can never learn of a defection, so windows cannot align."""

    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class NotCoordinated(EpidemicGameError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class NoBite(EpidemicGameError, ValueError):
    """The punishment does not lower the deviator's reliability."""


class RatioTooSmall(EpidemicGameError, ValueError):
    pass


class IllegalDeviation(EpidemicGameError, ValueError):
    pass
