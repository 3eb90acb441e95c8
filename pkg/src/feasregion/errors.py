"""Exception hierarchy shared by all modules."""


class FeasRegionError(Exception):
    pass


# geometry
class DegenerateInput(FeasRegionError):
    pass


class DimensionMismatch(FeasRegionError):
    pass


class Unbounded(FeasRegionError):
    pass


class Empty(FeasRegionError):
    pass


# optim
class NumericalBreakdown(FeasRegionError):
    pass


class EmptyPolygon(FeasRegionError):
    pass


# model
class JointLimit(FeasRegionError):
    pass


class OutOfWorkspace(FeasRegionError):
    pass


# region
class EmptyRegion(FeasRegionError):
    pass


class DegenerateRegion(EmptyRegion):
    """Region collapsed to a segment or a point."""


class NotConverged(FeasRegionError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# global
class KinematicLimitHit(FeasRegionError):
    pass


class RegionVanished(FeasRegionError):
    pass


# planner
class NoFeasibleFoothold(FeasRegionError):
    pass


class Infeasible(FeasRegionError):
    pass


class PhaseAborted(FeasRegionError):
    pass


# terrain
class ParseError(FeasRegionError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class OutOfBounds(FeasRegionError):
    pass


# scenario files
class SchemaError(FeasRegionError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
