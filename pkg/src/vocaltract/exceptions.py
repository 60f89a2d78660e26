"""Exception types raised by vocaltract."""


class VocalTractError(ValueError):
    """Base class for all errors raised by this package."""


class WavFormatError(VocalTractError):
    """A WAV file is not 16-bit signed PCM mono."""


class AreaFileError(VocalTractError):
    """An area-function text file could not be parsed."""


class SingularRecursionError(VocalTractError):
    """Levinson-Durbin hit a reflection coefficient with magnitude >= 1."""

    def __init__(self, stage, k):
        self.stage = stage
        self.k = k
        super().__init__(
            f"Levinson-Durbin recursion is singular at stage {stage}: |k|={abs(k):.6g} >= 1"
        )


class UnstablePolynomialError(VocalTractError):
    """A predictor polynomial is not minimum phase."""


class RootFindingError(VocalTractError):
    """The polynomial root finder did not converge."""
