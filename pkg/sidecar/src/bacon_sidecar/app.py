"""FastAPI application implementing the provider wire protocol.

Endpoints: POST /v1/embed, /v1/propose, /v1/judge, /v1/score_crop,
/v1/qa and GET /v1/health. Handlers are stateless between requests;
schema violations return 400, model-load failures 503.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import BackendConfig
from .fake import FakeModelSet, UnknownFixtureError


class EmbedRequest(BaseModel):
    texts: list[str]


class ProposeRequest(BaseModel):
    image_id: str
    query: str


class JudgeRequest(BaseModel):
    image_id: str
    box: list[float] = Field(min_length=4, max_length=4)
    name: str


class ScoreCropRequest(BaseModel):
    image_id: str
    box: list[float] = Field(min_length=4, max_length=4)
    text: str


class QaRequest(BaseModel):
    context: str
    question: str


def _check_box(box: list[float]):
    x1, y1, x2, y2 = box
    if not all(0.0 <= c <= 1.0 for c in box) or x1 >= x2 or y1 >= y2:
        raise ValueError(f"invalid normalized box {box}")


def create_app(cfg: BackendConfig) -> FastAPI:
    app = FastAPI(title="bacon-sidecar", version="0.1.0")

    if cfg.mode == "fake":
        models = FakeModelSet(cfg.fixture_path)
    else:
        from .real import RealModelSet

        models = RealModelSet(cfg)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(UnknownFixtureError)
    async def on_unknown_fixture(request: Request, exc: UnknownFixtureError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def on_missing_image(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def model_error(exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=503, content={"error": str(exc)})

    try:
        from .real import ModelLoadError
    except Exception:  # pragma: no cover - real deps absent entirely
        class ModelLoadError(RuntimeError):
            pass

    @app.exception_handler(ModelLoadError)
    async def on_model_error(request: Request, exc: Exception):
        return model_error(exc)

    @app.get("/v1/health")
    async def health():
        return {"ok": True, "dim": models.dim}

    @app.post("/v1/embed")
    async def embed(req: EmbedRequest):
        vectors = models.embed(req.texts)
        return {"dim": models.dim, "vectors": vectors}

    @app.post("/v1/propose")
    async def propose(req: ProposeRequest):
        return {"regions": models.propose(req.image_id, req.query)}

    @app.post("/v1/judge")
    async def judge(req: JudgeRequest):
        _check_box(req.box)
        return models.judge(req.image_id, req.box, req.name)

    @app.post("/v1/score_crop")
    async def score_crop(req: ScoreCropRequest):
        _check_box(req.box)
        return {"score": models.score_crop(req.image_id, req.box, req.text)}

    @app.post("/v1/qa")
    async def qa(req: QaRequest):
        return {"answer": models.answer(req.context, req.question)}

    return app
