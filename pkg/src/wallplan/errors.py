"""Exception types shared across the planner."""


class WallPlanError(Exception):
    """Base class for every error raised by wallplan."""


class DimensionError(WallPlanError, ValueError):
    """Wall or brick dimensions that cannot be tiled."""


class UnsupportedBondError(WallPlanError, ValueError):
    pass


class WallFormatError(WallPlanError, ValueError):
    """A wall or plan file that does not match the expected JSON layout."""


class ConfigurationError(WallPlanError, ValueError):
    pass


class InfeasibleError(WallPlanError):
    """The instance cannot be completed (unsupported bricks, bad pre-placed set, ...)."""

    def __init__(self, message, bricks=()):
        super().__init__(message)
        self.bricks = tuple(bricks)


class ExportError(WallPlanError, ValueError):
    pass
