from scikg.models.annotation import (
    AnnotationDocument,
    AnnotationWarning,
    ContributionEntry,
    MandatoryKind,
    WarningCode,
)


def validate(doc: AnnotationDocument) -> list[AnnotationWarning]:
    """
    Revisa que el documento esté completo.
    Nunca falla: devuelve los avisos en orden determinista.

    Args:
        doc: Documento de anotaciones

    Returns:
        list: Primero las propiedades obligatorias ausentes (en el orden fijo),
        después el resto de avisos ordenados por posición
    """
    present = {a.kind.mandatory for a in doc.annotations if a.kind.is_mandatory}

    warnings = [
        AnnotationWarning(
            code=WarningCode.MISSING_MANDATORY,
            subject=kind.value,
            message=f"Falta la propiedad obligatoria '{kind.label}' (\\{kind.value})",
        )
        for kind in MandatoryKind
        if kind not in present
    ]

    others: list[AnnotationWarning] = []
    for annotation in doc.annotations:
        prefix = annotation.kind.prefix
        if prefix is not None and doc.namespace_for(prefix) is None:
            others.append(
                AnnotationWarning(
                    code=WarningCode.UNKNOWN_PREFIX,
                    subject=prefix,
                    message=f"Prefijo '{prefix}' sin registrar en '{annotation.kind}'",
                    position=annotation.span[0] if annotation.span else None,
                )
            )
    for field, position in doc.duplicates:
        others.append(
            AnnotationWarning(
                code=WarningCode.DUPLICATE_BIBLIO,
                subject=field,
                message=f"\\{field} repetido, se conserva la primera aparición",
                position=position,
            )
        )

    # Sin posición (documentos que vienen de XMP) al final, en orden de aparición
    others.sort(key=lambda w: (w.position is None, w.position or 0))
    return warnings + others


def group_contributions(doc: AnnotationDocument) -> dict[str, list[ContributionEntry]]:
    """
    Agrupa las anotaciones por contribución.
    Una anotación con varias contribuciones aparece en cada grupo.
    """
    groups: dict[str, list[ContributionEntry]] = {}
    for annotation in doc.annotations:
        entry = ContributionEntry(annotation.kind, annotation.value, annotation.link)
        for cid in annotation.contributions:
            groups.setdefault(cid, []).append(entry)
    return {cid: groups[cid] for cid in sorted(groups)}
