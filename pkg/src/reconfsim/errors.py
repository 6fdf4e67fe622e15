"""Exception types shared across the package."""


class ReconfsimError(Exception):
    pass


class ParseError(ReconfsimError, ValueError):
    """Malformed workload, clustering, action or trace text."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ResourceLimit(ReconfsimError):
    """A state, trace or credit cap was exceeded; results would be incomplete."""


class IncoherentError(ReconfsimError):
    """Raised when a reduct is requested for a state whose dirty copies disagree."""

    def __init__(self, variables):
        self.variables = tuple(variables)
        super().__init__("state is incoherent for " + ", ".join(self.variables))
