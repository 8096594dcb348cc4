"""Exceptions raised by affine_tac

The CLI maps these onto exit codes: input errors exit with 1, verdict failures with 2 and
numerical pathologies with 3.
"""


class AffineTacError(Exception):
    """Base class for all errors raised by this package"""


class InputError(AffineTacError, ValueError):
    """Malformed input: wrong dimensions, unknown names, missing metadata"""


class DegenerateError(AffineTacError, ValueError):
    """A geometric object degenerates where the computation needs it not to"""


class DomainError(DegenerateError):
    """A parameter point lies outside the domain of its chart"""


class PathologyError(AffineTacError):
    """The numerics cannot produce a trustworthy answer for this input"""


class VerdictError(AffineTacError):
    """A certified statement about the input failed to hold"""
