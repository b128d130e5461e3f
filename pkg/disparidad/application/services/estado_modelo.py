"""
Estado entrenable del modelo (parámetros, estadísticas de BN, optimizador,
paso) y su conversión a/desde checkpoint.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from disparidad.application.services.optimizadores import OptimizadorSGD, crear_optimizador
from disparidad.domain.configuracion import NetworkConfig, TrainConfig
from disparidad.domain.excepciones import ErrorCheckpoint
from disparidad.domain.red.parametros import ParametrosRed, inicializar_parametros
from disparidad.domain.tensor.normalizacion import EstadisticasBN
from disparidad.infrastructure.adapters.checkpoint import Checkpoint, load_checkpoint, save_checkpoint

logger = logging.getLogger(__name__)

PREFIJO_BN = 'bn.'
CLAVE_PASO = 'paso'
CLAVE_PASO_OPTIMIZADOR = 'optim.paso'


@dataclass
class EstadoModelo:
    parametros: ParametrosRed
    optimizador: OptimizadorSGD
    entrenamiento: TrainConfig
    paso: int = 0

    @property
    def red(self) -> NetworkConfig:
        return self.parametros.config

    @classmethod
    def nuevo(cls, red: NetworkConfig, entrenamiento: TrainConfig) -> 'EstadoModelo':
        parametros = inicializar_parametros(red, semilla=entrenamiento.seed)
        return cls(parametros=parametros, optimizador=crear_optimizador(parametros, entrenamiento),
                   entrenamiento=entrenamiento)

    def a_checkpoint(self) -> Checkpoint:
        tensores: Dict[str, np.ndarray] = {n: t.data for n, t in self.parametros}
        for capa, estadisticas in self.parametros.estadisticas.items():
            tensores[f'{PREFIJO_BN}{capa}.media'] = estadisticas.media
            tensores[f'{PREFIJO_BN}{capa}.varianza'] = estadisticas.varianza
        tensores.update(self.optimizador.estado())

        metadatos = dict(self.red.a_pares())
        metadatos.update(self.entrenamiento.a_pares())
        metadatos[CLAVE_PASO] = str(self.paso)
        metadatos[CLAVE_PASO_OPTIMIZADOR] = str(self.optimizador.paso)
        return Checkpoint(tensores=tensores, metadatos=metadatos)

    @classmethod
    def desde_checkpoint(cls, checkpoint: Checkpoint, entrenamiento: Optional[TrainConfig] = None) -> 'EstadoModelo':
        """Reconstruye el estado; `entrenamiento` reemplaza la configuración guardada si se pasa."""
        metadatos = checkpoint.metadatos
        red = NetworkConfig.desde_pares({k: v for k, v in metadatos.items() if k in NetworkConfig.claves()})
        if entrenamiento is None:
            entrenamiento = TrainConfig.desde_pares({k: v for k, v in metadatos.items() if k in TrainConfig.claves()})

        parametros = inicializar_parametros(red, semilla=entrenamiento.seed)
        faltantes = [n for n in parametros.nombres() if n not in checkpoint.tensores]
        if faltantes:
            raise ErrorCheckpoint('formato', f"faltan {len(faltantes)} tensores, p. ej. '{faltantes[0]}'")
        for nombre, tensor in parametros:
            guardado = checkpoint.tensores[nombre]
            if guardado.shape != tensor.shape:
                raise ErrorCheckpoint('formato', f"'{nombre}' tiene forma {guardado.shape}, se esperaba {tensor.shape}")
            tensor.data = guardado.astype(tensor.dtype)

        for nombre, valor in checkpoint.tensores.items():
            if nombre.startswith(PREFIJO_BN) and nombre.endswith('.media'):
                capa = nombre[len(PREFIJO_BN):-len('.media')]
                varianza = checkpoint.tensores[f'{PREFIJO_BN}{capa}.varianza']
                parametros.estadisticas[capa] = EstadisticasBN(media=valor.copy(), varianza=varianza.copy())

        optimizador = crear_optimizador(parametros, entrenamiento)
        optimizador.cargar_estado(checkpoint.tensores, int(metadatos.get(CLAVE_PASO_OPTIMIZADOR, 0)))
        return cls(parametros=parametros, optimizador=optimizador, entrenamiento=entrenamiento,
                   paso=int(metadatos.get(CLAVE_PASO, 0)))

    def guardar(self, ruta: Union[str, Path]) -> None:
        save_checkpoint(ruta, self.a_checkpoint())

    @classmethod
    def cargar(cls, ruta: Union[str, Path], entrenamiento: Optional[TrainConfig] = None) -> 'EstadoModelo':
        return cls.desde_checkpoint(load_checkpoint(ruta), entrenamiento)
