class InputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""
