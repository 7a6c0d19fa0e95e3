from fastapi import APIRouter, Depends, HTTPException, Query, status

from scikg.database import GraphStore, get_store
from scikg.schemas.graph import IdResponse, LabelCreate, LabelResponse, PaperPayload, PaperResponse

router = APIRouter(prefix="/api", tags=["Graph"])


def _not_found(kind: str, identifier: str) -> HTTPException:
    return HTTPException(
        status_code=status.HTTP_404_NOT_FOUND,
        detail=f"No se encontró {kind} con el ID: {identifier}",
    )


@router.get("/resources", response_model=list[LabelResponse], summary="Buscar recursos")
async def find_resources(
    q: str = Query(..., description="Etiqueta exacta (sin distinguir mayúsculas)"),
    store: GraphStore = Depends(get_store),
):
    return store.find_resources(q)


@router.post(
    "/resources",
    response_model=IdResponse,
    status_code=status.HTTP_201_CREATED,
    summary="Crear un recurso",
)
async def create_resource(body: LabelCreate, store: GraphStore = Depends(get_store)):
    return {"id": store.create_resource(body.label)}


@router.get("/resources/{resource_id}", response_model=LabelResponse)
async def get_resource(resource_id: str, store: GraphStore = Depends(get_store)):
    label = store.resources.get(resource_id)
    if label is None:
        raise _not_found("un recurso", resource_id)
    return {"id": resource_id, "label": label}


@router.get("/predicates", response_model=list[LabelResponse], summary="Buscar predicados")
async def find_predicates(
    q: str = Query(..., description="Etiqueta exacta (sin distinguir mayúsculas)"),
    store: GraphStore = Depends(get_store),
):
    return store.find_predicates(q)


@router.post(
    "/predicates",
    response_model=IdResponse,
    status_code=status.HTTP_201_CREATED,
    summary="Crear un predicado",
)
async def create_predicate(body: LabelCreate, store: GraphStore = Depends(get_store)):
    return {"id": store.create_predicate(body.label)}


@router.get("/predicates/{predicate_id}", response_model=LabelResponse)
async def get_predicate(predicate_id: str, store: GraphStore = Depends(get_store)):
    label = store.predicates.get(predicate_id)
    if label is None:
        raise _not_found("un predicado", predicate_id)
    return {"id": predicate_id, "label": label}


@router.post(
    "/papers",
    response_model=IdResponse,
    status_code=status.HTTP_201_CREATED,
    summary="Crear un paper",
    description="Guarda el documento JSON completo del paper y devuelve su ID.",
)
async def create_paper(paper: PaperPayload, store: GraphStore = Depends(get_store)):
    return {"id": store.create_paper(paper.model_dump(mode="json"))}


@router.put("/papers/{paper_id}", response_model=PaperResponse, summary="Reemplazar un paper")
async def replace_paper(
    paper_id: str, paper: PaperPayload, store: GraphStore = Depends(get_store)
):
    """
    Reemplaza contribuciones y datos bibliográficos. El ID no cambia.
    """
    body = paper.model_dump(mode="json")
    if not store.replace_paper(paper_id, body):
        raise _not_found("un paper", paper_id)
    return {"id": paper_id, **body}


@router.get("/papers", response_model=list[PaperResponse], summary="Buscar papers por título")
async def find_papers(
    title: str = Query(..., description="Título exacto (sin distinguir mayúsculas)"),
    store: GraphStore = Depends(get_store),
):
    return store.find_papers(title)


@router.get("/papers/{paper_id}", response_model=PaperResponse)
async def get_paper(paper_id: str, store: GraphStore = Depends(get_store)):
    paper = store.get_paper(paper_id)
    if paper is None:
        raise _not_found("un paper", paper_id)
    return {"id": paper_id, **paper}
