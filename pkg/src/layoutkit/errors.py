"""Exception types shared across the package."""


class FormatError(ValueError):
    """An input file violates its format contract.

    Messages name the offending field path, record line, or image so
    that corpus-scale conversions fail with actionable errors.
    """
