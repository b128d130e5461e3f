"""
Excepciones del dominio de disparidad.

Todas heredan de ErrorDisparidad para que la capa de comandos pueda
traducirlas a CommandError con un único except.
"""

from typing import Iterable, List, Optional, Sequence, Tuple


class ErrorDisparidad(Exception):
    """Raíz de todos los errores de la librería."""


class ErrorForma(ErrorDisparidad, ValueError):
    """Formas incompatibles entre tensores o extensiones de salida no positivas."""

    def __init__(self, mensaje: str, formas: Optional[Sequence[Tuple[int, ...]]] = None):
        self.formas = [tuple(f) for f in formas] if formas else []
        if self.formas:
            detalle = ", ".join(str(f) for f in self.formas)
            mensaje = f"{mensaje} (formas: {detalle})"
        super().__init__(mensaje)


class ErrorConfiguracion(ErrorDisparidad, ValueError):
    """Configuración inválida; lleva la lista completa de violaciones."""

    def __init__(self, violaciones: Iterable[str]):
        self.violaciones: List[str] = list(violaciones)
        super().__init__("; ".join(self.violaciones) or "configuración inválida")


class ErrorFormato(ErrorDisparidad):
    """Archivo con formato inválido (PFM, PNG de disparidad)."""

    def __init__(self, mensaje: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            mensaje = f"{mensaje} (byte {offset})"
        super().__init__(mensaje)


class ErrorCheckpoint(ErrorDisparidad):
    """Checkpoint corrupto o no representable. `chequeo`: magic, version, crc, truncado o formato."""

    def __init__(self, chequeo: str, mensaje: str):
        self.chequeo = chequeo
        super().__init__(f"[{chequeo}] {mensaje}")


class ErrorEntrenamiento(ErrorDisparidad):
    """Paso de entrenamiento abortado; `etapa` indica dónde apareció el valor no finito."""

    def __init__(self, etapa: str, mensaje: str):
        self.etapa = etapa
        super().__init__(f"{mensaje} (etapa: {etapa})")


class ErrorGradiente(ErrorDisparidad):
    """Uso inválido de backward (pérdida no escalar, grafo sin gradiente)."""
