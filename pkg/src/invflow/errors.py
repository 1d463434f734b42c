"""Exception hierarchy for invflow."""


class InvFlowError(Exception):
    """Base class for all library errors."""


class SurfaceError(InvFlowError, ValueError):
    pass


class NonManifoldEdge(SurfaceError):
    def __init__(self, edge, count):
        self.edge = edge
        self.count = count
        super().__init__(f"edge {edge} lies in {count} faces (expected 2)")


class DuplicateFace(SurfaceError):
    def __init__(self, face):
        self.face = face
        super().__init__(f"duplicate or degenerate face {face}")


class DanglingVertex(SurfaceError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} is not incident to any face")


class EmptyOrFullSubset(InvFlowError, ValueError):
    pass


class GeometryError(InvFlowError, ValueError):
    pass


class NonPositiveRadius(GeometryError):
    pass


class NonPositiveLength(GeometryError):
    pass


class NonFiniteInput(GeometryError):
    pass


class NegativeWeight(GeometryError):
    pass


class OutsideDelta(GeometryError):
    pass


class OutsideOmega(GeometryError):
    pass


class NotSeparated(GeometryError):
    pass


class TargetOutsideZ(GeometryError):
    pass


class NoConvergence(InvFlowError, RuntimeError):
    def __init__(self, msg, best=None):
        self.best = best
        super().__init__(msg)


class QuadratureFailure(InvFlowError, RuntimeError):
    pass


class NonFiniteState(InvFlowError, RuntimeError):
    def __init__(self, msg, last_good=None):
        self.last_good = last_good
        super().__init__(msg)


class LineSearchStall(InvFlowError, RuntimeError):
    pass


class InsufficientSamples(InvFlowError, ValueError):
    pass


class NotConverged(InvFlowError, ValueError):
    pass


class TooManySubsets(InvFlowError, ValueError):
    pass


class BadTotalCurvature(InvFlowError, ValueError):
    pass


class ProblemFileError(InvFlowError, ValueError):
    pass
