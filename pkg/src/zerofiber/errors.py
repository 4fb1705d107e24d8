class ZeroFiberError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class ModelError(ZeroFiberError):
    """Structurally malformed model or argument shapes."""


class DomainError(ZeroFiberError):
    """Argument outside the domain of an operation."""


class NotKahlerError(ZeroFiberError):
    def __init__(self, violations):
        self.violations = list(violations)
        names = ", ".join(f"{name} (pairing {value})" for name, value in self.violations)
        super().__init__(f"not relatively Kahler w.r.t. declared catalog: {names}")


class NotBigError(ZeroFiberError):
    pass


class BoundaryClassError(NotBigError):
    """The class sits on the boundary of the big cone (volume exactly zero)."""


class CalibrationError(ZeroFiberError):
    pass
