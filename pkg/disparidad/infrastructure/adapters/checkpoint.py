"""
Formato binario de checkpoints.

    magic "CFPN" | versión u32 | bloque clave=valor (u32 longitud + UTF-8)
    | cantidad de tensores u32 | por tensor: nombre (u32 + UTF-8), ndim u32,
    dims u32[], datos f32 little-endian | CRC32 de todo lo anterior (u32)

Todos los enteros son little-endian. La carga verifica en orden magic,
versión y CRC.
"""

import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from disparidad.domain.excepciones import ErrorCheckpoint

logger = logging.getLogger(__name__)

MAGIC = b'CFPN'
VERSION = 1
_U32 = struct.Struct('<I')
_MINIMO = len(MAGIC) + 2 * _U32.size


@dataclass
class Checkpoint:
    """Tensores por nombre y metadatos de texto (configuración, paso)."""
    tensores: Dict[str, np.ndarray] = field(default_factory=dict)
    metadatos: Dict[str, str] = field(default_factory=dict)


def _texto(valor: str) -> bytes:
    datos = valor.encode('utf-8')
    return _U32.pack(len(datos)) + datos


def codificar(checkpoint: Checkpoint) -> bytes:
    partes = [MAGIC, _U32.pack(VERSION)]
    for clave, valor in checkpoint.metadatos.items():
        if '\n' in clave or '=' in clave or '\n' in str(valor):
            raise ErrorCheckpoint('formato', f"metadato no representable '{clave}'")
    bloque = ''.join(f"{clave}={valor}\n" for clave, valor in checkpoint.metadatos.items())
    partes.append(_texto(bloque))
    partes.append(_U32.pack(len(checkpoint.tensores)))
    for nombre, arreglo in checkpoint.tensores.items():
        arreglo = np.asarray(arreglo)
        partes.append(_texto(nombre))
        partes.append(_U32.pack(arreglo.ndim))
        partes.extend(_U32.pack(d) for d in arreglo.shape)
        partes.append(np.ascontiguousarray(arreglo, dtype='<f4').tobytes())
    cuerpo = b''.join(partes)
    return cuerpo + _U32.pack(zlib.crc32(cuerpo) & 0xFFFFFFFF)


class _Lector:
    def __init__(self, datos: bytes, inicio: int, fin: int):
        self.datos, self.cursor, self.fin = datos, inicio, fin

    def tomar(self, n: int) -> bytes:
        if self.cursor + n > self.fin:
            raise ErrorCheckpoint('truncado', f"se esperaban {n} bytes en el offset {self.cursor}")
        trozo = self.datos[self.cursor:self.cursor + n]
        self.cursor += n
        return trozo

    def u32(self) -> int:
        return _U32.unpack(self.tomar(_U32.size))[0]

    def texto(self) -> str:
        return self.tomar(self.u32()).decode('utf-8')


def decodificar(datos: bytes) -> Checkpoint:
    if len(datos) < len(MAGIC) or datos[:len(MAGIC)] != MAGIC:
        raise ErrorCheckpoint('magic', f"se esperaba {MAGIC!r}, recibido {datos[:len(MAGIC)]!r}")
    if len(datos) < _MINIMO:
        raise ErrorCheckpoint('truncado', f"archivo de {len(datos)} bytes, mínimo {_MINIMO}")
    version = _U32.unpack_from(datos, len(MAGIC))[0]
    if version != VERSION:
        raise ErrorCheckpoint('version', f"versión {version} no soportada (se esperaba {VERSION})")
    esperado = _U32.unpack_from(datos, len(datos) - _U32.size)[0]
    calculado = zlib.crc32(datos[:-_U32.size]) & 0xFFFFFFFF
    if esperado != calculado:
        raise ErrorCheckpoint('crc', f"CRC32 {calculado:08x} distinto del guardado {esperado:08x}")

    lector = _Lector(datos, len(MAGIC) + _U32.size, len(datos) - _U32.size)
    metadatos: Dict[str, str] = {}
    for linea in lector.texto().split('\n'):
        if not linea:
            continue
        clave, _, valor = linea.partition('=')
        metadatos[clave] = valor
    tensores: Dict[str, np.ndarray] = {}
    for _ in range(lector.u32()):
        nombre = lector.texto()
        forma: Tuple[int, ...] = tuple(lector.u32() for _ in range(lector.u32()))
        cantidad = int(np.prod(forma, dtype=np.int64))
        crudo = lector.tomar(4 * cantidad)
        tensores[nombre] = np.frombuffer(crudo, dtype='<f4').reshape(forma).astype(np.float32)
    return Checkpoint(tensores=tensores, metadatos=metadatos)


def save_checkpoint(ruta: Union[str, Path], checkpoint: Checkpoint) -> None:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    ruta.write_bytes(codificar(checkpoint))
    logger.debug(f"Checkpoint guardado en {ruta}: {len(checkpoint.tensores)} tensores")


def load_checkpoint(ruta: Union[str, Path]) -> Checkpoint:
    checkpoint = decodificar(Path(ruta).read_bytes())
    logger.debug(f"Checkpoint cargado de {ruta}: {len(checkpoint.tensores)} tensores")
    return checkpoint
