class ImageFormatError(ValueError):
    """Malformed or truncated image/kernel file.

    ``offset`` is the byte position at which parsing failed.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UnidentifiableError(ValueError):
    """Scattering parameters cannot be recovered from the given data.

    When only ``m`` is unidentifiable, ``alpha_hat`` and ``residual`` carry
    the part of the fit that is still valid.
    """

    def __init__(self, message, alpha_hat=None, residual=None):
        super().__init__(message)
        self.alpha_hat = alpha_hat
        self.residual = residual
