from urllib.parse import urlsplit

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Configuración de la herramienta.
    Lee las variables con prefijo SCIKG_ desde el entorno o el archivo .env
    """

    model_config = SettingsConfigDict(
        env_prefix="SCIKG_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Vocabulario de las anotaciones
    toolkit_namespace_uri: str = "https://orkg.org/property/"
    toolkit_prefix: str = "orkgp"

    # PDF
    catalog_key: str = "SciKGMetadata"
    # pypdf en modo estricto: no repara tablas xref rotas
    pdf_strict: bool = True

    # Grafo de conocimiento (SCIKG_GRAPH_URL)
    graph_url: str = "http://127.0.0.1:8000"
    graph_timeout: float = 10.0
    graph_resource_prefixes: list[str] = [
        "https://www.orkg.org/orkg/resource/",
        "https://orkg.org/resource/",
    ]

    # Servicio simulado
    api_host: str = "127.0.0.1"
    api_port: int = 8000
    api_title: str = "SciKG Mock Graph"
    api_version: str = "1.0.0"

    @field_validator("toolkit_namespace_uri", "graph_url")
    @classmethod
    def uri_is_absolute(cls, v: str) -> str:
        """
        Valida que la URI tenga esquema.
        """
        if not urlsplit(v).scheme:
            raise ValueError(f"La URI debe ser absoluta: {v!r}")
        return v


# Instancia global de configuración
settings = Settings()
