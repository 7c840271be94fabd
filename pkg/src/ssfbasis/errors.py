"""Exception hierarchy shared by every module."""


class SsfBasisError(Exception):
    pass


class DomainError(SsfBasisError, ValueError):
    """Argument outside an operation's domain (bad mode, shape, rank...)."""


class NumericError(SsfBasisError, ArithmeticError):
    """A factorization failed to converge or produced non-finite values."""


class ParseError(SsfBasisError, ValueError):
    pass


class BadMagicError(ParseError):
    pass


class TruncatedError(ParseError):
    pass


class PayloadMismatchError(ParseError):
    pass


class TypeTagError(ParseError):
    pass


class ConfigError(SsfBasisError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
