class TheoremViolation(AssertionError):
    """Two computations that must agree exactly did not.

    Always a bug; the CLI maps it to exit code 2.
    """

    def __init__(self, message: str, values: dict | None = None, dump: str | None = None):
        super().__init__(message)
        self.values = values or {}
        self.dump = dump
