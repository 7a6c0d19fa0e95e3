import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from scikg.config import settings
from scikg.database import GraphStore
from scikg.routers import graph

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Gestión del ciclo de vida del servicio simulado.
    """
    store: GraphStore = app.state.store
    logger.info(
        "🚀 Grafo simulado iniciado (%d recursos, %d predicados, %d papers)",
        len(store.resources),
        len(store.predicates),
        len(store.papers),
    )

    yield

    logger.info("👋 Grafo simulado detenido")


def create_app(store: GraphStore | None = None) -> FastAPI:
    """
    Crea la aplicación del grafo simulado sobre un store en memoria.

    Args:
        store: Store inicial (por defecto uno vacío)

    Returns:
        FastAPI: Aplicación lista para uvicorn o TestClient
    """
    app = FastAPI(
        title=settings.api_title,
        version=settings.api_version,
        description="""
    Servicio en memoria que imita la parte del grafo de conocimiento que usa el cliente.

    ## Endpoints disponibles:
    * **GET/POST /api/resources** - Buscar o crear recursos
    * **GET/POST /api/predicates** - Buscar o crear predicados
    * **POST /api/papers** - Crear paper
    * **PUT /api/papers/{id}** - Reemplazar paper
    * **GET /api/papers?title=** - Buscar papers por título
    * **GET /api/papers/{id}** - Obtener paper por ID
    """,
        lifespan=lifespan,
        docs_url="/docs",
        redoc_url="/redoc",
    )
    app.state.store = store if store is not None else GraphStore()
    app.include_router(graph.router)

    @app.get("/", tags=["Health"])
    async def root():
        """
        Endpoint raíz - Información básica del servicio.
        """
        return {
            "message": settings.api_title,
            "version": settings.api_version,
            "status": "running",
            "docs": "/docs",
        }

    @app.get("/health", tags=["Health"])
    async def health_check():
        return {"status": "healthy", "store": "memory"}

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        # JSON mal formado o cuerpo que no cumple el esquema
        return JSONResponse(
            status_code=status.HTTP_400_BAD_REQUEST,
            content={"detail": jsonable_errors(exc), "type": "bad_request"},
        )

    @app.exception_handler(Exception)
    async def global_exception_handler(request: Request, exc: Exception):
        """
        Manejador global de excepciones para errores no capturados.
        """
        logger.exception("Error no controlado en %s %s", request.method, request.url.path)
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content={
                "detail": "Ocurrió un error interno en el servidor.",
                "type": "internal_server_error",
            },
        )

    return app


def jsonable_errors(exc: RequestValidationError) -> list[dict]:
    return [
        {"loc": list(error.get("loc", ())), "msg": error.get("msg", ""), "type": error.get("type")}
        for error in exc.errors()
    ]


# Aplicación por defecto para `uvicorn scikg.main:app`
app = create_app()
