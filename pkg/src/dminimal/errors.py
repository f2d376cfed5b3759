"""Exception types raised across the package."""


class MeshError(ValueError):
    """Invalid combinatorics passed to :func:`dminimal.mesh.build_mesh`."""


class NonManifoldError(MeshError):
    pass


class OrientationError(MeshError):
    pass


class NotClosedError(ValueError):
    """A 1-form failed its closedness check.

    ``element`` is the id of the offending vertex (dual forms) or the face
    index (primal forms); ``residual`` is its residual magnitude.
    """

    def __init__(self, message, element=None, residual=None):
        super().__init__(message)
        self.element = element
        self.residual = residual


class DegenerateError(ValueError):
    """Coincident points, zero-area triangles, vanishing vector areas."""


class NotHolomorphicError(ValueError):
    def __init__(self, message, vertex=None, residual=None):
        super().__init__(message)
        self.vertex = vertex
        self.residual = residual


class AdmissibilityError(ValueError):
    """Gauss map has (near) antipodal values on an edge."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class MobiusError(ValueError):
    pass


class LabelingError(ValueError):
    pass


class CrossRatioError(ValueError):
    def __init__(self, message, face=None, cross_ratio=None):
        super().__init__(message)
        self.face = face
        self.cross_ratio = cross_ratio
