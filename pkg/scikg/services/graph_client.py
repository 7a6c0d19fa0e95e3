import logging
from typing import Any

import httpx

from scikg.config import settings
from scikg.errors import ServiceError, ServiceUnreachableError

logger = logging.getLogger(__name__)


class GraphClient:
    """
    Cliente HTTP del grafo de conocimiento.
    Un mismo cliente se puede usar desde varias búsquedas concurrentes.
    """

    def __init__(
        self,
        base_url: str | None = None,
        timeout: float | None = None,
        transport: httpx.AsyncBaseTransport | None = None,
    ):
        self.base_url = (base_url or settings.graph_url).rstrip("/")
        self.requests = 0
        self._client = httpx.AsyncClient(
            base_url=self.base_url,
            timeout=timeout if timeout is not None else settings.graph_timeout,
            transport=transport,
        )

    async def __aenter__(self) -> "GraphClient":
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.aclose()

    async def aclose(self) -> None:
        await self._client.aclose()

    async def _request(self, method: str, path: str, **kwargs: Any) -> Any:
        """
        Envía una petición y devuelve el JSON de la respuesta.

        Raises:
            ServiceUnreachableError: Si no hay conexión con el servicio
            ServiceError: Si la respuesta no es 2xx
        """
        self.requests += 1
        try:
            response = await self._client.request(method, path, **kwargs)
        except httpx.TransportError as exc:
            raise ServiceUnreachableError(self.base_url, str(exc) or type(exc).__name__) from exc

        logger.debug("%s %s -> %d", method, path, response.status_code)
        if not response.is_success:
            raise ServiceError(response.status_code, response.text)
        try:
            return response.json()
        except ValueError as exc:
            raise ServiceError(response.status_code, response.text) from exc

    # Recursos y predicados

    async def find_resources(self, label: str) -> list[dict[str, str]]:
        return await self._request("GET", "/api/resources", params={"q": label})

    async def find_predicates(self, label: str) -> list[dict[str, str]]:
        return await self._request("GET", "/api/predicates", params={"q": label})

    async def create_resource(self, label: str) -> str:
        body = await self._request("POST", "/api/resources", json={"label": label})
        return body["id"]

    async def create_predicate(self, label: str) -> str:
        body = await self._request("POST", "/api/predicates", json={"label": label})
        return body["id"]

    # Papers

    async def create_paper(self, payload: dict[str, Any]) -> str:
        body = await self._request("POST", "/api/papers", json=payload)
        return body["id"]

    async def replace_paper(self, paper_id: str, payload: dict[str, Any]) -> dict[str, Any]:
        return await self._request("PUT", f"/api/papers/{paper_id}", json=payload)

    async def find_papers(self, title: str) -> list[dict[str, Any]]:
        return await self._request("GET", "/api/papers", params={"title": title})

    async def get_paper(self, paper_id: str) -> dict[str, Any]:
        return await self._request("GET", f"/api/papers/{paper_id}")
