"""Exception types shared across the package."""


class CapacityError(Exception):
    """A requested computation exceeds a hard resource bound.

    Raised instead of silently truncating, e.g. when a divisor list would
    exceed the enumeration cap or a sieve limit does not fit the engine's
    integer width.
    """


class CacheIntegrityError(Exception):
    """A sieve cache file failed validation (bad magic, checksum, or header)."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class CertificateError(Exception):
    """A density certificate operation was attempted with invalid inputs."""
