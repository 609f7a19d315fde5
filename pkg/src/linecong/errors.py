"""Exception hierarchy shared by all modules."""


class LineCongruenceError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(LineCongruenceError, ValueError):
    """Jets combined with mismatched degree/center, or an invalid substitution."""


class DivisionByNearZero(LineCongruenceError, ZeroDivisionError):
    pass


class SqrtDomain(LineCongruenceError, ValueError):
    pass


class ExprSyntaxError(LineCongruenceError, SyntaxError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class UnknownFunction(LineCongruenceError, NameError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown function {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class UnboundParameter(LineCongruenceError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound parameter {self.name!r}"


class NotPolynomial(LineCongruenceError, ValueError):
    pass


class IntegrabilityViolation(LineCongruenceError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"integrability b_u = a_v, d_u = c_v violated (max residual {residual:.3e})")
        self.residual = residual


class DiscriminantNonPositive(LineCongruenceError, ValueError):
    pass


class DiscriminantNegative(LineCongruenceError, ValueError):
    pass


class UmbilicPoint(LineCongruenceError, ValueError):
    pass


class FocalAtInfinity(LineCongruenceError, ZeroDivisionError):
    pass


class ZeroDirection(LineCongruenceError, ValueError):
    pass


class NotNormalized(LineCongruenceError, ValueError):
    pass


class DegenerateData(LineCongruenceError, ValueError):
    pass


class OffSurface(LineCongruenceError, ValueError):
    pass


class StepFailure(LineCongruenceError, RuntimeError):
    pass


class GradientTooSmall(LineCongruenceError, RuntimeError):
    def __init__(self, point, norm: float):
        super().__init__(f"gradient norm {norm:.3e} too small at {tuple(point)}")
        self.point = tuple(point)
        self.norm = norm


class NoPolynomialSolution(LineCongruenceError, RuntimeError):
    def __init__(self, degree: int, residual: float):
        super().__init__(f"no polynomial solution of degree {degree} (residual {residual:.3e})")
        self.degree = degree
        self.residual = residual


class QVanishes(LineCongruenceError, ZeroDivisionError):
    pass


class CorankTwo(LineCongruenceError, ValueError):
    pass


class ConfigError(LineCongruenceError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
