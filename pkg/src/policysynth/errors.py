"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PolicySynthError(Exception):
    """Base class for every error raised by policysynth."""


# -- policy codec -----------------------------------------------------------


class PolicyError(PolicySynthError):
    pass


class MalformedJson(PolicyError):
    """The text is not valid JSON at all."""


class UnsupportedFeature(PolicyError):
    """Valid JSON, but uses a part of the policy language outside the supported subset."""


class InvalidPolicy(PolicyError):
    """Valid JSON inside the subset, but structurally wrong (missing Effect, bad types, ...)."""


class InvalidRequest(PolicySynthError, ValueError):
    pass


# -- automata / analysis ----------------------------------------------------


class CharOutsideAlphabet(PolicySynthError, ValueError):
    def __init__(self, chars: str, where: str = "") -> None:
        self.chars = chars
        msg = f"characters {chars!r} are not in the alphabet"
        if where:
            msg += f" (in {where!r})"
        super().__init__(msg)


class AlphabetMismatch(PolicySynthError, ValueError):
    pass


class BoundTooSmall(PolicySynthError, ValueError):
    pass


class EmptySpecification(PolicySynthError, ValueError):
    pass


# -- fine-grained DSL -------------------------------------------------------


class FgParseError(PolicySynthError):
    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class FgSyntaxError(FgParseError):
    pass


class UnknownVerb(FgParseError):
    pass


class UnknownSubjectKind(FgParseError):
    pass


# -- request specs and corpus -----------------------------------------------


class ParamOutOfRange(PolicySynthError, ValueError):
    pass


class MissingFile(PolicySynthError, FileNotFoundError):
    pass


class ValidationFailure(PolicySynthError):
    def __init__(self, entry_ids: list[str], report=None) -> None:
        self.entry_ids = list(entry_ids)
        self.report = report
        super().__init__("corpus validation failed for: " + ", ".join(self.entry_ids))


# -- synthesis backends -----------------------------------------------------


class KindSourceMismatch(PolicySynthError, TypeError):
    pass


class BackendError(PolicySynthError):
    pass


class BackendUnreachable(BackendError):
    pass


class BackendRefusal(BackendError):
    pass


class ConfigurationError(PolicySynthError):
    pass


class IoFailure(PolicySynthError, OSError):
    """A report or transcript could not be written."""
