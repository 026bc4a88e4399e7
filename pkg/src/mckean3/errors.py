"""Exception types shared across the package.

Every numeric failure carries the name of the module that raised it so the
command line front end can report where a pipeline left its regime.
"""


class McKeanError(Exception):
    """Base class. ``module`` names the stage that failed."""

    module = "mckean3"

    def __init__(self, message, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module


class NonFinite(McKeanError):
    module = "ode_core"


class AmbiguousBranch(McKeanError):
    module = "monodromy"


class NotSimple(McKeanError):
    module = "monodromy"


class VanishingEta(McKeanError):
    module = "monodromy"


class ZeroOnContour(McKeanError):
    module = "ramifications"


class NonConvergent(McKeanError):
    module = "ramifications"


class WrongCount(McKeanError):
    module = "ramifications"


class BranchError(McKeanError):
    module = "three_point"


class SmallDenominator(McKeanError):
    module = "mckean"


class DegenerateGap(McKeanError):
    module = "verify"


class LostTracking(McKeanError):
    module = "verify"


class ConfigError(McKeanError):
    module = "cli"


# errors that mean "the coefficients are outside the regime where the
# perturbative picture holds" as opposed to bad input
REGIME_ERRORS = (WrongCount, NonConvergent, SmallDenominator, NonFinite,
                 AmbiguousBranch, NotSimple, VanishingEta, ZeroOnContour,
                 BranchError, DegenerateGap, LostTracking)
