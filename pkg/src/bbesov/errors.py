"""Shared exception types.

Parameter errors carry the label of the violated admissibility display so the
CLI can surface it (e.g. "Eq. (1.4)"); those labels are part of the CLI's
output contract.
"""


class ParameterError(ValueError):
    """A precondition on space/measure parameters is violated."""

    def __init__(self, display: str, message: str):
        self.display = display
        super().__init__(f"{message} [violates {display}]")


class TruncationError(RuntimeError):
    """The kernel series could not certify the requested tolerance."""

    def __init__(self, achieved_bound: float, terms_used: int):
        self.achieved_bound = achieved_bound
        self.terms_used = terms_used
        super().__init__(
            f"series truncated after {terms_used} terms; "
            f"achieved tail bound {achieved_bound:.3e}"
        )
