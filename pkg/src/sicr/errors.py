"""Exception hierarchy."""


class SicrError(Exception):
    """Base class for pipeline errors."""


class SignalError(SicrError, ValueError):
    """Invalid signal data or input file."""


class ScaleSpaceError(SicrError, ValueError):
    """Signal or parameters cannot produce a usable scale space."""


class DescriptorError(SicrError, ValueError):
    pass


class MatchingError(SicrError, ValueError):
    pass


class ClassifierError(SicrError, ValueError):
    pass
