import logging
import socket
import threading
import time

import uvicorn

from scikg.database import GraphStore
from scikg.errors import BindFailureError
from scikg.main import create_app

logger = logging.getLogger(__name__)


class _ThreadServer(uvicorn.Server):
    # Las señales solo se pueden instalar en el hilo principal
    def install_signal_handlers(self) -> None:
        pass


class MockGraphServer:
    """
    Servicio simulado ejecutándose con uvicorn en un hilo aparte.
    """

    def __init__(self, store: GraphStore, sock: socket.socket):
        self.store = store
        self._socket = sock
        host, port = sock.getsockname()[:2]
        self.host = host
        self.port = port
        config = uvicorn.Config(create_app(store), log_level="warning", lifespan="on")
        self._server = _ThreadServer(config)
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [sock]}, daemon=True
        )

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self, timeout: float = 10.0) -> "MockGraphServer":
        self._thread.start()
        deadline = time.monotonic() + timeout
        while not self._server.started:
            if not self._thread.is_alive() or time.monotonic() > deadline:
                self._socket.close()
                raise BindFailureError(f"{self.host}:{self.port}")
            time.sleep(0.01)
        logger.info("Grafo simulado escuchando en %s", self.url)
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10.0)
        self._socket.close()

    def __enter__(self) -> "MockGraphServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()


def bind_socket(bind_address: str) -> socket.socket:
    """
    Abre el socket de escucha para 'host:puerto' (puerto 0 = libre).

    Raises:
        BindFailureError: Si la dirección no es válida o está ocupada
    """
    host, sep, port = bind_address.rpartition(":")
    if not sep or not port.isdigit():
        raise BindFailureError(bind_address)
    host = host.strip("[]") or "127.0.0.1"
    family = socket.AF_INET6 if ":" in host else socket.AF_INET
    sock = socket.socket(family, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, int(port)))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        logger.debug("bind %s: %s", bind_address, exc)
        raise BindFailureError(bind_address) from exc
    return sock


def serve(bind_address: str, seed: GraphStore | None = None) -> MockGraphServer:
    """
    Arranca el grafo simulado en segundo plano.

    Args:
        bind_address: 'host:puerto'
        seed: Store inicial (por ejemplo cargado de un snapshot)

    Returns:
        MockGraphServer en ejecución; llamar a stop() para detenerlo

    Raises:
        BindFailureError: Si no se puede abrir la dirección
    """
    sock = bind_socket(bind_address)
    return MockGraphServer(seed if seed is not None else GraphStore(), sock).start()
