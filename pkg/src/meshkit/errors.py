"""Exceptions raised by meshkit."""


class MeshkitError(Exception):
    """Base class of all meshkit errors."""


class ArgumentError(MeshkitError, ValueError):
    """An argument is outside its documented domain."""


class StructuralError(MeshkitError, ValueError):
    """Mesh or tensor structure is inconsistent (bad indices, shapes)."""


class StateError(MeshkitError, RuntimeError):
    """A saved context is missing or does not match the upstream gradient."""


class DivergenceError(MeshkitError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, message, checkpoint=None):
        super().__init__(message)
        self.checkpoint = checkpoint


class ParseError(MeshkitError):
    """A mesh or manifest file could not be parsed."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        location = ""
        if path is not None:
            location = f"{path}:"
            if lineno is not None:
                location += f"{lineno}:"
            location += " "
        super().__init__(location + message)
