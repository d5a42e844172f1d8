"""HTTP surface over the engine.

Reads are open; mutations require the configured bearer token.  Every
response carries the current log sequence number so clients can poll
cheaply and fetch details only on change.
"""

import json
import logging

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse

from .escalation import (
    EscalationError,
    IllegalTransition,
    InvalidPledge,
    InvalidSource,
    NotEligible,
)
from .estimator import EstimatorError
from .ingest import IngestError
from .model import ValidationError, Violation
from .service import CorruptLog, DuplicateWarning, Engine, UnknownWarning
from .warehouse import WarehouseError

log = logging.getLogger(__name__)


def create_app(engine: Engine, write_token: str | None = None) -> FastAPI:
    app = FastAPI(title="quakedesk", docs_url=None, redoc_url=None)

    def ok(data: dict, status_code: int = 200) -> JSONResponse:
        return JSONResponse({**data, "log_seq": engine.log_seq}, status_code=status_code)

    def error_response(status: int, exc: Exception) -> JSONResponse:
        body = {
            "error": type(exc).__name__,
            "detail": str(exc),
            "log_seq": engine.log_seq,
        }
        if isinstance(exc, ValidationError):
            body["violations"] = [
                {"field": v.field, "kind": v.kind, "message": v.message}
                for v in exc.violations
            ]
        return JSONResponse(body, status_code=status)

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return error_response(400, exc)

    @app.exception_handler(EstimatorError)
    async def _estimator(request: Request, exc: EstimatorError):
        return error_response(400, exc)

    @app.exception_handler(IngestError)
    async def _ingest(request: Request, exc: IngestError):
        return error_response(400, exc)

    @app.exception_handler(WarehouseError)
    async def _warehouse(request: Request, exc: WarehouseError):
        return error_response(400, exc)

    @app.exception_handler(InvalidSource)
    async def _bad_source(request: Request, exc: InvalidSource):
        return error_response(400, exc)

    @app.exception_handler(InvalidPledge)
    async def _bad_pledge(request: Request, exc: InvalidPledge):
        return error_response(400, exc)

    @app.exception_handler(UnknownWarning)
    async def _unknown(request: Request, exc: UnknownWarning):
        return error_response(404, exc)

    @app.exception_handler(DuplicateWarning)
    async def _duplicate(request: Request, exc: DuplicateWarning):
        return error_response(409, exc)

    @app.exception_handler(NotEligible)
    async def _not_eligible(request: Request, exc: NotEligible):
        return error_response(409, exc)

    @app.exception_handler(IllegalTransition)
    async def _illegal(request: Request, exc: IllegalTransition):
        return error_response(409, exc)

    @app.exception_handler(EscalationError)
    async def _escalation(request: Request, exc: EscalationError):
        return error_response(409, exc)

    @app.exception_handler(CorruptLog)
    async def _corrupt(request: Request, exc: CorruptLog):
        log.error("corrupt log: %s", exc)
        return error_response(500, exc)

    def write_auth(authorization: str | None = Header(default=None)):
        if write_token is None:
            return
        if authorization != f"Bearer {write_token}":
            raise HTTPException(status_code=401, detail="missing or bad write token")

    async def json_body(request: Request) -> dict:
        """Parse the request body; anything but a JSON object is a 400."""
        raw = await request.body()
        if not raw:
            return {}
        try:
            doc = json.loads(raw)
        except ValueError:
            doc = None
        if not isinstance(doc, dict):
            raise ValidationError(
                [Violation("body", "malformed", "must be a JSON object")]
            )
        return doc

    # -- health

    @app.get("/healthz")
    def healthz():
        return ok({"status": "ok"})

    # -- warnings

    @app.post("/warnings", dependencies=[Depends(write_auth)])
    def post_warning(body: dict = Depends(json_body)):
        return ok(engine.ingest_warning(body), status_code=201)

    @app.get("/warnings")
    def get_warnings():
        return ok({"items": engine.list_warnings()})

    # -- assessments

    @app.get("/assessments/{warning_id}")
    def get_assessment(warning_id: str):
        return ok({"assessment": engine.get_assessment(warning_id)})

    @app.post("/assessments/{warning_id}/whatif", dependencies=[Depends(write_auth)])
    def post_whatif(warning_id: str, body: dict = Depends(json_body)):
        overrides = body.get("overrides", body)
        if not isinstance(overrides, dict):
            raise ValidationError(
                [Violation("overrides", "malformed", "must be an object")]
            )
        return ok({"assessment": engine.whatif(warning_id, overrides)})

    # -- escalations

    @app.get("/escalations/{warning_id}")
    def get_escalation(warning_id: str):
        return ok(engine.escalation_view(warning_id))

    @app.post("/escalations/{warning_id}/sos1", dependencies=[Depends(write_auth)])
    def post_sos1(warning_id: str, body: dict = Depends(json_body)):
        return ok(engine.issue_sos1(warning_id, str(body.get("approver", ""))))

    @app.post("/escalations/{warning_id}/pledges", dependencies=[Depends(write_auth)])
    def post_pledge(warning_id: str, body: dict = Depends(json_body)):
        medics = body.get("medics")
        if isinstance(medics, float) and medics.is_integer():
            medics = int(medics)
        if not isinstance(medics, int) or isinstance(medics, bool):
            raise InvalidPledge(f"medics must be a positive integer, got {medics!r}")
        return ok(
            engine.record_pledge(warning_id, str(body.get("source", "")), medics)
        )

    @app.post("/escalations/{warning_id}/sos2", dependencies=[Depends(write_auth)])
    def post_sos2(warning_id: str, body: dict = Depends(json_body)):
        return ok(engine.issue_sos2(warning_id, str(body.get("approver", ""))))

    @app.post("/escalations/{warning_id}/resolve", dependencies=[Depends(write_auth)])
    def post_resolve(warning_id: str):
        return ok(engine.resolve(warning_id))

    # -- analytics and reference

    @app.get("/olap/query")
    def olap_query(
        group_by: str = Query(default=""),
        filter: list[str] = Query(default=()),
    ):
        names = [part for part in group_by.split(",") if part.strip()]
        return ok(engine.olap_query(names, list(filter)))

    @app.get("/historical")
    def get_historical():
        return ok({"items": engine.list_historical()})

    @app.get("/regions")
    def get_regions():
        return ok(engine.list_regions())

    return app
