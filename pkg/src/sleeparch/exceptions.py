"""Exception types raised on bad user input."""


class InputError(ValueError):
    """Raised when input data or arguments violate a documented precondition.

    The CLI maps this to exit code 1; anything else is an internal error.
    """
