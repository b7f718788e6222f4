"""Exception types for contract violations.

Every error that a CLI user can trigger derives from ContractError so the
command line can emit one machine-readable JSON record and exit with code 1.
"""

from __future__ import annotations

from typing import Any


class ContractError(Exception):
    """A precondition or certification contract was violated."""

    code = "contract-error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    def payload(self) -> dict:
        doc = {"error": self.code, "message": str(self)}
        if self.details:
            doc["details"] = {k: v for k, v in sorted(self.details.items())}
        return doc


class DimensionMismatch(ContractError):
    code = "dimension-mismatch"


class WindowTooSmall(ContractError):
    """The truncation window does not meet its tail-bound contract."""

    code = "window-too-small"


class TailBoundUnmet(ContractError):
    """A spectral truncation radius does not meet its tail-bound contract."""

    code = "tail-bound-unmet"


class IncommensurableLattices(ContractError):
    code = "incommensurable-lattices"


class NonCrystalInput(ContractError):
    """Operation requires a purely crystal-supported distribution."""

    code = "non-crystal-input"


class RankDeficient(ContractError):
    code = "rank-deficient"


class IllConditioned(ContractError):
    code = "ill-conditioned"


class DerivativeCapExceeded(ContractError):
    code = "derivative-cap-exceeded"


class DegenerateTestFunction(ContractError):
    code = "degenerate-test-function"


class CertificationError(ContractError):
    """A window-certified quantity cannot be certified from the given data."""

    code = "certification-error"


class InvalidDocument(ContractError):
    code = "invalid-document"


class UnknownGalleryEntry(ContractError):
    code = "unknown-gallery-entry"
