"""Exception hierarchy shared by all solvers."""
from __future__ import annotations


class SearchContestError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SearchContestError, ValueError):
    """A constructor or operation received an out-of-domain parameter."""


class NotViableError(SearchContestError):
    """Search costs exceed what the prize money can support."""


class NoSearchIncentiveError(SearchContestError):
    """Prize spread is zero: no player has a reason to search selectively."""


class NoAsymmetricEquilibriumError(SearchContestError):
    """Requested an asymmetric equilibrium where none exists (two players)."""


class DegenerateTruncationError(SearchContestError):
    """Truncation point at or beyond the upper end of the support."""


class DivergentObjectiveError(SearchContestError):
    """Welfare objective has no finite value (diverging expected maximum)."""


class NumericFailureError(SearchContestError):
    """A solver failed to converge. Carries diagnostics for post-mortems."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
