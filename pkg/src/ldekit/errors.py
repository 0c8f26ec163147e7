"""Exception hierarchy shared by all ldekit modules."""

from __future__ import annotations


class LdekitError(Exception):
    """Base class for all errors raised by ldekit."""


# -- model loading ----------------------------------------------------------

class ModelSyntaxError(LdekitError):
    """The document is not well-formed JSON."""


class EnvelopeError(LdekitError):
    """The document does not match the model envelope schema."""


class DanglingReferenceError(LdekitError):
    """An edge endpoint or a node parent references a missing node id."""


class MetamodelMismatchError(LdekitError):
    """A model was validated against a metamodel for a different model type."""


class CycleError(LdekitError):
    """A required acyclic structure contains a cycle.

    ``witness`` is a list of node ids where consecutive entries are connected
    and the last entry connects back to the first.
    """

    def __init__(self, message: str, witness: list[str]):
        super().__init__(message)
        self.witness = witness


# -- expression language ----------------------------------------------------

class ParseError(LdekitError):
    """Guard/action text could not be parsed.

    ``position`` is a 0-based character offset into the source text and
    ``expected`` hints at the token class the parser was looking for.
    """

    def __init__(self, message: str, position: int, expected: str | None = None):
        super().__init__(message)
        self.position = position
        self.expected = expected


class EvalError(LdekitError):
    """Runtime failure while evaluating an expression or action list.

    ``assignment_index`` is set when the failure happened inside an action
    list and identifies the failing assignment (0-based).
    """

    def __init__(self, message: str, assignment_index: int | None = None):
        super().__init__(message)
        self.assignment_index = assignment_index


class DivisionByZeroError(EvalError):
    pass


class IntegerOverflowError(EvalError):
    """Arithmetic left the signed 64-bit range; wraparound is never silent."""


# -- statechart simulation --------------------------------------------------

class UnknownTriggerError(LdekitError):
    """fire_trigger was called with a trigger that is not declared."""


class StuckAtDecisionError(LdekitError):
    """An active decision node has no outgoing transition with a true guard."""

    def __init__(self, message: str, node_id: str):
        super().__init__(message)
        self.node_id = node_id


class NonterminatingCompletionError(LdekitError):
    """The completion cascade exceeded the per-macrostep transition cap."""


# -- webstory ---------------------------------------------------------------

class WrongScreenError(LdekitError):
    """A click referenced a click area that is not on the current screen."""


class UnknownPropositionError(LdekitError):
    """A reachability goal names a proposition outside the model vocabulary."""


class MissingAssetError(LdekitError):
    """A referenced background image was not found in the assets directory."""


# -- dataflow ---------------------------------------------------------------

class AnnotationError(LdekitError):
    """A function signature annotation block is malformed.

    ``line`` is the 1-based line number of the offending annotation.
    """

    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.line = line


class UnknownSignatureError(LdekitError):
    """A function node references a signature name that was not discovered."""


class UnknownSubmodelError(LdekitError):
    """A subprocess node references a model id that was not provided."""


class UnboundInputError(LdekitError):
    """A model scheduled for execution still has unbound input pads."""


# -- rig --------------------------------------------------------------------

class StageNameArityError(LdekitError):
    """Declared stage names do not cover the derived number of stages."""


class TargetSetMismatchError(LdekitError):
    """Dependent and producer jobs are expanded over different target sets."""
