class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainViolation(ToolkitError):
    """A realizer was queried outside its domain."""


class ModulusViolation(DomainViolation):
    """A Cauchy name broke the 2^-min(i,j) modulus."""

    def __init__(self, i: int, j: int, distance):
        self.i = i
        self.j = j
        self.distance = distance
        super().__init__(
            f"modulus violated at indices {i}, {j}: distance {distance} is not below 2^-{min(i, j)}"
        )


class InvalidIndex(ToolkitError):
    pass


class EmptySet(ToolkitError):
    pass


class WholeSpace(ToolkitError):
    pass


class UnsupportedSpace(ToolkitError):
    pass


class DisjointnessViolation(ToolkitError):
    pass


class MalformedScheme(ToolkitError):
    pass


class PreconditionViolation(ToolkitError):
    def __init__(self, check: str, detail: str = ""):
        self.check = check
        self.detail = detail
        message = f"precondition '{check}' violated"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class PrefixExhausted(ToolkitError):
    """Raised when a finite-prefix name is read past its end."""

    def __init__(self, index: int, length: int):
        self.index = index
        self.length = length
        super().__init__(f"index {index} is beyond the known prefix of length {length}")
