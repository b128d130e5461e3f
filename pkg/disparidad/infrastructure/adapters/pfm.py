"""
Lector/escritor PFM (Portable Float Map), el formato de disparidad de Scene Flow.

Cabecera de tres líneas: 'Pf' (gris) o 'PF' (color), 'ancho alto' y la escala
(negativa => floats little-endian). Las filas se guardan de abajo hacia
arriba; el lector devuelve los arreglos de arriba hacia abajo.
"""

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from disparidad.domain.excepciones import ErrorFormato

logger = logging.getLogger(__name__)

Ruta = Union[str, Path]


def _linea(contenido: bytes, inicio: int) -> Tuple[str, int]:
    fin = contenido.find(b'\n', inicio)
    if fin < 0:
        raise ErrorFormato("cabecera PFM incompleta", offset=len(contenido))
    try:
        return contenido[inicio:fin].decode('ascii').strip(), fin + 1
    except UnicodeDecodeError:
        raise ErrorFormato("cabecera PFM con bytes no ASCII", offset=inicio)


def parse_pfm(contenido: bytes) -> Tuple[np.ndarray, float]:
    """Decodifica un PFM completo en memoria -> (arreglo [H,W] o [H,W,3], escala)."""
    tipo, cursor = _linea(contenido, 0)
    if tipo == 'PF':
        canales = 3
    elif tipo == 'Pf':
        canales = 1
    else:
        raise ErrorFormato(f"magic PFM inválido '{tipo[:8]}'", offset=0)

    inicio_dims = cursor
    dims, cursor = _linea(contenido, cursor)
    partes = dims.split()
    try:
        ancho, alto = (int(p) for p in partes)
    except ValueError:
        raise ErrorFormato(f"dimensiones PFM inválidas '{dims}'", offset=inicio_dims)
    if ancho <= 0 or alto <= 0:
        raise ErrorFormato(f"dimensiones PFM no positivas {ancho}×{alto}", offset=inicio_dims)

    inicio_escala = cursor
    texto_escala, cursor = _linea(contenido, cursor)
    try:
        escala = float(texto_escala)
    except ValueError:
        raise ErrorFormato(f"escala PFM inválida '{texto_escala}'", offset=inicio_escala)
    if escala == 0 or not np.isfinite(escala):
        raise ErrorFormato(f"escala PFM debe ser finita y distinta de 0, recibido {texto_escala}", offset=inicio_escala)

    orden = '<' if escala < 0 else '>'
    cantidad = ancho * alto * canales
    esperado = cursor + 4 * cantidad
    if len(contenido) < esperado:
        raise ErrorFormato(
            f"PFM truncado: se esperaban {4 * cantidad} bytes de datos, hay {len(contenido) - cursor}",
            offset=len(contenido),
        )
    datos = np.frombuffer(contenido, dtype=np.dtype(orden + 'f4'), count=cantidad, offset=cursor)
    forma = (alto, ancho, 3) if canales == 3 else (alto, ancho)
    arreglo = np.flipud(datos.reshape(forma)).astype(np.float32)
    return arreglo, abs(escala)


def read_pfm(ruta: Ruta) -> Tuple[np.ndarray, float]:
    contenido = Path(ruta).read_bytes()
    arreglo, escala = parse_pfm(contenido)
    logger.debug(f"PFM leído {ruta}: forma={arreglo.shape}, escala={escala}")
    return arreglo, escala


def codificar_pfm(arreglo: np.ndarray, little_endian: bool = True, escala: float = 1.0) -> bytes:
    arreglo = np.asarray(arreglo)
    if arreglo.ndim == 3 and arreglo.shape[2] == 3:
        tipo = 'PF'
    elif arreglo.ndim == 2:
        tipo = 'Pf'
    else:
        raise ErrorFormato(f"PFM admite [H,W] o [H,W,3], recibido {arreglo.shape}")
    if escala <= 0:
        raise ErrorFormato(f"la escala PFM debe ser > 0, recibido {escala}")
    alto, ancho = arreglo.shape[:2]
    valor_escala = -escala if little_endian else escala
    cabecera = f"{tipo}\n{ancho} {alto}\n{valor_escala!r}\n".encode('ascii')
    orden = '<' if little_endian else '>'
    datos = np.flipud(arreglo).astype(np.dtype(orden + 'f4'))
    return cabecera + datos.tobytes()


def write_pfm(ruta: Ruta, arreglo: np.ndarray, little_endian: bool = True, escala: float = 1.0) -> None:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    ruta.write_bytes(codificar_pfm(arreglo, little_endian=little_endian, escala=escala))
    logger.debug(f"PFM escrito {ruta}: forma={np.shape(arreglo)}")
