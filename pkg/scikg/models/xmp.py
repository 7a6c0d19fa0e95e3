from pathlib import Path

from lxml import etree
from pydantic import BaseModel, ConfigDict, Field

from scikg.errors import MalformedPacketError

XPACKET_BEGIN = b'<?xpacket begin="\xef\xbb\xbf" id="W5M0MpCehiHzreSzNTczkc9d"?>'
XPACKET_END = b'<?xpacket end="w"?>'


def xml_parser() -> etree.XMLParser:
    # Sin entidades externas ni red
    return etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=False)


class XmpPacket(BaseModel):
    """
    Paquete XMP tal como se escribe en el PDF y en el archivo .xmp.
    """

    model_config = ConfigDict(frozen=True)

    data: bytes
    namespaces: dict[str, str] = Field(default_factory=dict)

    @property
    def has_wrapper(self) -> bool:
        stripped = self.data.strip()
        return stripped.startswith(b"<?xpacket begin=") and stripped.endswith(XPACKET_END)

    @classmethod
    def from_bytes(cls, data: bytes) -> "XmpPacket":
        """
        Construye un paquete a partir de bytes leídos (PDF o archivo .xmp),
        recuperando su tabla de namespaces.

        Raises:
            MalformedPacketError: Si los bytes no son XML bien formado
        """
        try:
            root = etree.fromstring(data.strip(), parser=xml_parser())
        except (etree.XMLSyntaxError, ValueError) as exc:
            raise MalformedPacketError(str(exc) or "documento vacío") from exc

        namespaces: dict[str, str] = {}
        for element in root.iter(tag=etree.Element):
            for prefix, uri in element.nsmap.items():
                if prefix is not None:
                    namespaces.setdefault(prefix, uri)
        return cls(data=data, namespaces=dict(sorted(namespaces.items())))

    def write_sidecar(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.data)
        return path
