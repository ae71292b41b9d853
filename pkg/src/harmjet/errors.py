"""Exception hierarchy.

Every error carries a stable, machine-readable ``code`` so the command line
front end can report failures without parsing messages.
"""


class HarmJetError(Exception):
    code = "E_GENERIC"
    #: True for errors caused by malformed or inadmissible input data.
    invalid_input = True


class SpaceMismatchError(HarmJetError):
    code = "E_SPACE_MISMATCH"


class DegreeError(HarmJetError):
    code = "E_FORM_DEGREE"


class DegreeCapError(HarmJetError):
    code = "E_DEGREE_CAP"


class NotHarmonicError(HarmJetError):
    code = "E_NOT_HARMONIC"


class NotHolomorphicError(HarmJetError):
    code = "E_NOT_HOLOMORPHIC"


class NotBaseFormError(HarmJetError):
    code = "E_NOT_BASE_FORM"


class IdentityFailure(HarmJetError):
    code = "E_IDENTITY"
    invalid_input = False


class BoundaryError(HarmJetError):
    code = "E_BOUNDARY"


class DegenerateTangentError(BoundaryError):
    code = "E_DEGENERATE_TANGENT"


class EmbeddingError(BoundaryError):
    code = "E_EMBEDDING"


class IsotropyError(BoundaryError):
    code = "E_ISOTROPY"


class FormatError(HarmJetError):
    code = "E_FORMAT"


class SolverError(HarmJetError):
    code = "E_SOLVER"
    invalid_input = False


class MaskError(SolverError):
    code = "E_FD_MASK"


class StencilError(SolverError):
    code = "E_FD_STENCIL"


class AliasingError(SolverError):
    code = "E_ALIASING"
    invalid_input = True


class ConsistencyError(HarmJetError):
    """Two independent evaluation routes disagreed."""

    code = "E_CONSISTENCY"
    invalid_input = False


class PeriodicityError(HarmJetError):
    code = "E_PERIODICITY"
