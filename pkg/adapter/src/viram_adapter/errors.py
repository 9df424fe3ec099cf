class AdapterError(Exception):
    """Base class for adapter failures."""


class BindingError(AdapterError):
    """A model binding is malformed or references an unknown model."""


class CapabilityError(AdapterError):
    """The requested model needs hardware or weights this build does not ship."""


class FinetuneError(AdapterError):
    """Fine-tuning inputs are invalid."""
