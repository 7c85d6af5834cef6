"""Exception hierarchy shared across the package.

Every module raises subclasses of :class:`HotreeError` so callers can catch
one base type at API boundaries and map it to exit codes / HTTP statuses.
"""

from __future__ import annotations


class HotreeError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def __init__(self, message: str = "", detail: object = None):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.detail = detail


# --- table ingestion -------------------------------------------------------

class IngestError(HotreeError):
    code = "ingest_error"


class InvalidEncoding(IngestError):
    code = "invalid_encoding"


class EmptyInput(IngestError):
    code = "empty_input"


class NoTableFound(IngestError):
    code = "no_table_found"


class MalformedMarkup(IngestError):
    code = "malformed_markup"


class CorruptWorkbook(IngestError):
    code = "corrupt_workbook"


class UnsupportedFeature(IngestError):
    code = "unsupported_feature"


class UnsupportedFormat(IngestError):
    code = "unsupported_format"


class NestingTooDeep(IngestError):
    code = "nesting_too_deep"


# --- model gateway ---------------------------------------------------------

class GatewayError(HotreeError):
    code = "gateway_error"


class Timeout(GatewayError):
    code = "timeout"


class AuthFailure(GatewayError):
    code = "auth_failure"


class MalformedResponse(GatewayError):
    code = "malformed_response"


class MissingScriptEntry(GatewayError):
    code = "missing_script_entry"


class DimensionMismatch(GatewayError):
    code = "dimension_mismatch"


class ZeroVector(GatewayError):
    code = "zero_vector"


class ModelError(GatewayError):
    """Wraps any provider-side failure propagated into a pipeline."""

    code = "model_error"


# --- tree core -------------------------------------------------------------

class TreeError(HotreeError):
    code = "tree_error"


class TreeSyntaxError(TreeError):
    code = "syntax_error"


class SchemaViolation(TreeError):
    code = "schema_violation"


class StructureViolation(TreeError):
    code = "structure_violation"


class NodeNotFound(TreeError):
    code = "node_not_found"


class TypeMismatch(TreeError):
    code = "type_mismatch"


class TreeEditError(TreeError):
    code = "edit_error"


class CycleCreated(TreeEditError):
    code = "cycle_created"


class RootDeletion(TreeEditError):
    code = "root_deletion"


class InvalidEdit(TreeEditError):
    code = "invalid_edit"


# --- tree construction -----------------------------------------------------

class BuildError(HotreeError):
    code = "build_error"


class EmptyGrid(BuildError):
    code = "empty_grid"


class UnparseableCandidates(BuildError):
    code = "unparseable_candidates"


# --- question answering ----------------------------------------------------

class QAError(HotreeError):
    code = "qa_error"


class UndecomposableQuestion(QAError):
    code = "undecomposable_question"


class PlanValidationError(QAError):
    code = "plan_validation_error"


class StepFailure(QAError):
    """A plan step failed; wraps the underlying error and the step index."""

    code = "step_failure"

    def __init__(self, step_id: int, cause: Exception):
        super().__init__(f"step {step_id} failed: {cause}", detail=str(cause))
        self.step_id = step_id
        self.cause = cause


# --- agent / service -------------------------------------------------------

class AgentError(HotreeError):
    code = "agent_error"


class NoTrees(AgentError):
    code = "no_trees"


class SessionNotFound(AgentError):
    code = "session_not_found"


class TreeNotFound(HotreeError):
    code = "tree_not_found"


class VersionConflict(HotreeError):
    code = "version_conflict"
