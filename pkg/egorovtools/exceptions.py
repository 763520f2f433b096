"exceptions raised by egorovtools"


class EgorovToolsError(Exception):
    "base class for all package errors"


class GridError(EgorovToolsError, ValueError):
    "invalid grid parameters"


class SymbolMismatchError(EgorovToolsError, ValueError):
    "symbols or operators defined on different grids or with different hbar"


class AnalyticExtensionError(EgorovToolsError, ValueError):
    "no complex extension registered, or sigma beyond the analyticity radius"


class FlowIntegrationError(EgorovToolsError):
    "the classical flow could not be integrated from some grid nodes"

    def __init__(self, message, node_indices=None):
        super().__init__(message)
        self.node_indices = list(node_indices) if node_indices is not None else []


class PullbackError(EgorovToolsError):
    "flow images left the grid box for a symbol with no decay tag"


class OrderError(EgorovToolsError, ValueError):
    "an expansion or truncation order is out of range"


class QuadratureError(EgorovToolsError):
    "simplex quadrature failed to reach the requested tolerance"


class AdmissibilityError(EgorovToolsError, ValueError):
    "hbar cannot be represented on the quantum grid"

    def __init__(self, message, min_hbar=None, max_hbar=None):
        super().__init__(message)
        self.min_hbar = min_hbar
        self.max_hbar = max_hbar


class ConvergenceError(EgorovToolsError):
    "an iterative solver stopped without converging"


class StripExhaustionError(EgorovToolsError, ValueError):
    "the strip-shrinking schedule exhausts sigma or rho"


class ChainCollapseError(EgorovToolsError, ValueError):
    "an iterated logarithm fell to 1 or below"


class CalibrationError(EgorovToolsError):
    "no finite constants satisfy the supplied measurements"


class ConfigError(EgorovToolsError, ValueError):
    "invalid experiment configuration"
