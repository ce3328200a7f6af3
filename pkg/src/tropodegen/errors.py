"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numeric
failures derive from :class:`NumericError` (CLI exit code 3).
"""


class TropodegenError(Exception):
    pass


class InputError(TropodegenError, ValueError):
    pass


class NumericError(TropodegenError, ArithmeticError):
    pass


class SchemaError(InputError):
    pass


class GluingError(InputError):
    pass


class OrientabilityError(InputError):
    pass


class TopologyError(InputError):
    pass


class PathError(InputError):
    pass


class DimensionError(InputError):
    pass


class FormError(InputError):
    pass


class AdmissibilityError(InputError):
    pass


class MatchingError(InputError):
    pass


class MissingBasisError(InputError):
    pass


class DegenerateTripleError(InputError):
    pass


class DomainError(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class SingularJacobian(NumericError):
    pass


class ConsistencyError(NumericError):
    pass
