# translation_lre/errors.py


class TranslationLREError(Exception):
    """Base exception for the translation_lre package."""
    pass


class DomainError(TranslationLREError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""
    pass


class ResourceLimitError(TranslationLREError):
    """Raised when a dense object would exceed a configured cap."""

    def __init__(self, message: str, cap_name: str, cap_value: int):
        super().__init__(f"{message} (cap {cap_name}={cap_value})")
        self.message = message
        self.cap_name = cap_name
        self.cap_value = cap_value

    def __reduce__(self):
        return type(self), (self.message, self.cap_name, self.cap_value)


class StructuralError(TranslationLREError):
    """Raised for malformed circuits or factorizations that signal a bug."""
    pass


class PreconditionError(TranslationLREError):
    """Raised when a numerical precondition fails; carries the measured deviation."""

    def __init__(self, message: str, deviation: float):
        super().__init__(f"{message} (measured deviation {deviation:.3e})")
        self.message = message
        self.deviation = deviation

    def __reduce__(self):
        return type(self), (self.message, self.deviation)


class UsageError(TranslationLREError):
    """Raised for invalid sweep configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def __reduce__(self):
        return type(self), (self.field, self.message)
