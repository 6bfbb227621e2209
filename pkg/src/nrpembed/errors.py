class NrpError(Exception):
    """Base class for all errors raised by nrpembed."""


class IngestionError(NrpError):
    pass


class ConfigError(NrpError, ValueError):
    pass


class CapExceededError(NrpError):
    """A dense test-scale routine was asked to materialize too much."""


class SamplingError(NrpError):
    pass
