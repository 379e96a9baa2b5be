"""
Exceptions for nominal_ua
One base class, one subclass per failure class. Validators report ordinary
violations as data; these are raised for structural problems only.
"""

from typing import Any, Optional


class NominalUAError(Exception):
    """Base class for all errors raised by nominal_ua"""


class InjectionError(NominalUAError):
    """Invalid injection data, or no room to factor it"""


class PresheafStructureError(NominalUAError):
    """A presheaf table is missing an entry or points outside its carrier"""


class PresheafDomainError(NominalUAError):
    """An element was looked up in a sort whose carrier does not contain it"""


class HeadroomError(NominalUAError):
    """No fresh name is left in the universe for the requested sort"""

    def __init__(self, message: str, sort: Any = None):
        super().__init__(message)
        self.sort = sort


class ClosureError(NominalUAError):
    """A value collection is not closed under the universe permutations"""

    def __init__(self, message: str, value: Any = None, permutation: Any = None):
        super().__init__(message)
        self.value = value
        self.permutation = permutation


class SignatureError(NominalUAError):
    """Malformed signature: unknown symbol, missing family, bad declaration"""


class SortError(NominalUAError):
    """A uniform term is not well-sorted"""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message} (at {path or 'root'})")
        self.path = path


class TranslationError(NominalUAError):
    """Precondition of a translation does not hold"""


class FrontendError(NominalUAError):
    """A nominal judgment cannot be elaborated into a uniform equation"""


class TheoryParseError(NominalUAError):
    """Syntax error in a theory file"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


class ScopeError(NominalUAError):
    """A sort lies outside the universe of the structure it is evaluated in"""


class AlgebraError(NominalUAError):
    """Malformed algebra: missing interpretation, wrong sorts, signature mismatch"""


class HomomorphismError(NominalUAError):
    """A sortwise map does not commute with the algebra structure"""

    def __init__(self, message: str, instance: Any = None):
        super().__init__(message)
        self.instance = instance


class EquivarianceError(NominalUAError):
    """An algebra violates one of its equivariance equations"""

    def __init__(self, message: str, equation: Any = None, witness: Any = None):
        super().__init__(message)
        self.equation = equation
        self.witness = witness


class InvariantBreach(NominalUAError):
    """A property that must hold on every valid input failed"""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness
