import json
import logging
import re
import threading
from pathlib import Path
from typing import Any

from fastapi import Request

logger = logging.getLogger(__name__)

_ID = re.compile(r"^[RP](\d+)$")


def _id_number(identifier: str) -> int:
    m = _ID.match(identifier)
    return int(m[1]) if m else 0


class GraphStore:
    """
    Grafo en memoria del servicio simulado.
    Recursos y papers comparten el contador R; los predicados usan P.
    Las escrituras se serializan con un lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.resources: dict[str, str] = {}
        self.predicates: dict[str, str] = {}
        self.papers: dict[str, dict[str, Any]] = {}
        self._next_resource = 1
        self._next_predicate = 1

    # Recursos y predicados

    @staticmethod
    def _match(table: dict[str, str], label: str) -> list[dict[str, str]]:
        wanted = label.casefold()
        hits = [{"id": k, "label": v} for k, v in table.items() if v.casefold() == wanted]
        return sorted(hits, key=lambda hit: _id_number(hit["id"]))

    def find_resources(self, label: str) -> list[dict[str, str]]:
        return self._match(self.resources, label)

    def find_predicates(self, label: str) -> list[dict[str, str]]:
        return self._match(self.predicates, label)

    def _allocate_resource_id(self) -> str:
        identifier = f"R{self._next_resource}"
        self._next_resource += 1
        return identifier

    def create_resource(self, label: str) -> str:
        with self._lock:
            identifier = self._allocate_resource_id()
            self.resources[identifier] = label
        logger.debug("Recurso %s creado: %r", identifier, label)
        return identifier

    def create_predicate(self, label: str) -> str:
        with self._lock:
            identifier = f"P{self._next_predicate}"
            self._next_predicate += 1
            self.predicates[identifier] = label
        logger.debug("Predicado %s creado: %r", identifier, label)
        return identifier

    # Papers

    def create_paper(self, body: dict[str, Any]) -> str:
        with self._lock:
            identifier = self._allocate_resource_id()
            self.papers[identifier] = body
        return identifier

    def replace_paper(self, identifier: str, body: dict[str, Any]) -> bool:
        with self._lock:
            if identifier not in self.papers:
                return False
            self.papers[identifier] = body
        return True

    def get_paper(self, identifier: str) -> dict[str, Any] | None:
        return self.papers.get(identifier)

    def find_papers(self, title: str) -> list[dict[str, Any]]:
        wanted = title.casefold()
        hits = [
            {"id": k, **v}
            for k, v in self.papers.items()
            if (v.get("title") or "").casefold() == wanted
        ]
        return sorted(hits, key=lambda hit: _id_number(hit["id"]))

    # Snapshots

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                "resources": dict(self.resources),
                "predicates": dict(self.predicates),
                "papers": {k: dict(v) for k, v in self.papers.items()},
                "next_resource": self._next_resource,
                "next_predicate": self._next_predicate,
            }

    @classmethod
    def from_snapshot(cls, data: dict[str, Any]) -> "GraphStore":
        """
        Crea un store a partir de un snapshot.
        Si faltan los contadores se continúa tras el mayor ID existente.
        """
        store = cls()
        store.resources = dict(data.get("resources", {}))
        store.predicates = dict(data.get("predicates", {}))
        store.papers = dict(data.get("papers", {}))
        last_resource = max(map(_id_number, [*store.resources, *store.papers]), default=0)
        last_predicate = max(map(_id_number, store.predicates), default=0)
        store._next_resource = max(data.get("next_resource", 1), last_resource + 1)
        store._next_predicate = max(data.get("next_predicate", 1), last_predicate + 1)
        return store

    @classmethod
    def load(cls, path: str | Path) -> "GraphStore":
        return cls.from_snapshot(json.loads(Path(path).read_text(encoding="utf-8")))

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.snapshot(), indent=2, ensure_ascii=False), encoding="utf-8")
        return path


def get_store(request: Request) -> GraphStore:
    """
    Dependency para obtener el store de la aplicación.
    Se usa en FastAPI con Depends().
    """
    return request.app.state.store
