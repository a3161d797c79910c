"""Exception hierarchy shared by all potlab modules."""


class PotlabError(Exception):
    """Base class for every error raised by potlab."""


class ConfigError(PotlabError):
    """A scenario or measure document is malformed."""


class NonIntegerMass(PotlabError):
    pass


class EmptyMeasure(PotlabError):
    pass


class CutInfeasible(PotlabError):
    pass


class ZeroMass(PotlabError):
    pass


class WindowEmpty(PotlabError):
    """No integer lies in the admissible window for the piece count; increase m."""


class QuadratureFailure(PotlabError):
    pass


class DivergenceDetected(QuadratureFailure):
    """Polar ring contributions around a registered singularity do not decay."""


class IllConditioned(PotlabError):
    pass
