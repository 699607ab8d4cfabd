"""Exception types raised across the package."""


class LegoIsoError(Exception):
    """Base class for all errors raised by legoiso."""


class TaxonomyError(LegoIsoError, ValueError):
    pass


class CorpusError(LegoIsoError, ValueError):
    pass


class RuleError(LegoIsoError, ValueError):
    pass


class MappingError(LegoIsoError, ValueError):
    pass


class EmitError(LegoIsoError, ValueError):
    pass


class ReportError(LegoIsoError, ValueError):
    pass
