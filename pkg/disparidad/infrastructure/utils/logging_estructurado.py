"""
Módulo de logging estructurado para entrenamiento y evaluación.

Cada evento se escribe como una línea JSON en el archivo de la ejecución y se
envía a Sentry como breadcrumb, para poder reconstruir una corrida después.
"""

import json
import logging
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import sentry_sdk

from disparidad.infrastructure.utils.serialization import make_json_serializable


@dataclass
class MetricasFase:
    """Métricas de una fase (generación de datos, entrenamiento, evaluación)"""
    fase: str
    timestamp: str
    duracion_s: float
    items_procesados: int  # pasos, muestras, tensores
    exito: bool
    detalles: Dict[str, Any]


@dataclass
class MetricasEjecucion:
    """Métricas completas de una ejecución"""
    semilla: int
    configuracion: Dict[str, Any]

    exito: bool
    perdida_final: Optional[float]
    epe_final: Optional[float]
    tiempo_total_s: float
    pasos_completados: int

    fases: List[MetricasFase]

    timestamp_inicio: str
    timestamp_fin: str
    tags: str = "disparidad,entrenamiento"


class LoggerEstructurado:
    """
    Logger estructurado de una ejecución.
    Guarda eventos en formato JSON (una línea por evento) para análisis posterior.
    """

    def __init__(self, archivo_log: str = "logs/ultima_ejecucion.txt"):
        self.archivo_log = Path(archivo_log)
        self.fases: List[MetricasFase] = []
        self.tiempo_inicio: Optional[float] = None
        self.configuracion: Dict[str, Any] = {}
        self.metricas_ejecucion: Optional[MetricasEjecucion] = None

        self.archivo_log.parent.mkdir(parents=True, exist_ok=True)
        self.logger = logging.getLogger(__name__)

    def iniciar_ejecucion(self, config: Dict[str, Any], semilla: Optional[int] = None):
        """Inicia el logging de una nueva ejecución."""
        self.tiempo_inicio = time.time()
        self.configuracion = dict(config) if config else {}
        if semilla is not None:
            self.configuracion['semilla'] = semilla
        self.fases = []

        self._escribir_log({
            "evento": "inicio_ejecucion",
            "timestamp": datetime.now().isoformat(),
            "configuracion": self.configuracion,
            "mensaje": "Iniciando ejecución"
        })
        self.logger.info(f"Iniciando ejecución con semilla {self.configuracion.get('semilla', 'N/A')}")

    def registrar_fase(self, fase: str, duracion: float, items: int, exito: bool, detalles: Dict = None):
        """Registra métricas de una fase completada."""
        metricas = MetricasFase(
            fase=fase,
            timestamp=datetime.now().isoformat(),
            duracion_s=duracion,
            items_procesados=items,
            exito=exito,
            detalles=detalles or {}
        )
        self.fases.append(metricas)
        self._escribir_log({"evento": "fase_completada", "fase": fase, "metricas": metricas})
        self.logger.info(f"Fase {fase}: Éxito={exito}, Tiempo={duracion:.2f}s, Items={items}")

    def registrar_paso(self, paso: int, perdida: float, detalles: Dict = None):
        """Registra un paso de entrenamiento (sólo a archivo y breadcrumb)."""
        self._escribir_log({
            "evento": "paso_entrenamiento",
            "paso": paso,
            "perdida": perdida,
            "detalles": detalles or {}
        })

    def registrar_checkpoint(self, ruta: str, paso: int):
        self._escribir_log({"evento": "checkpoint_guardado", "ruta": ruta, "paso": paso})
        self.logger.info(f"Checkpoint guardado en {ruta} (paso {paso})")

    def registrar_resultado_final(self, resultado: Dict[str, Any], exito: bool = None):
        """Finaliza el logging de la ejecución."""
        if exito is not None:
            resultado['exito'] = exito

        tiempo_total = time.time() - self.tiempo_inicio if self.tiempo_inicio else 0.0
        inicio = datetime.fromtimestamp(self.tiempo_inicio) if self.tiempo_inicio else datetime.now()
        self.metricas_ejecucion = MetricasEjecucion(
            semilla=int(self.configuracion.get('semilla', 0)),
            configuracion=self.configuracion,
            exito=bool(resultado.get('exito', False)),
            perdida_final=resultado.get('perdida_final'),
            epe_final=resultado.get('epe_final'),
            tiempo_total_s=float(resultado.get('tiempo_total', tiempo_total)),
            pasos_completados=int(resultado.get('pasos', 0)),
            fases=self.fases,
            timestamp_inicio=inicio.isoformat(),
            timestamp_fin=datetime.now().isoformat()
        )

        self._escribir_log({
            "evento": "fin_ejecucion",
            "timestamp": datetime.now().isoformat(),
            "resultado": resultado,
            "resumen": self.metricas_ejecucion
        })
        self.logger.info(
            f"Ejecución finalizada. Éxito={self.metricas_ejecucion.exito}, "
            f"Tiempo={self.metricas_ejecucion.tiempo_total_s:.2f}s"
        )

    def log_evento(self, evento: str, datos: Dict[str, Any] = None):
        """Registra un evento específico"""
        self._escribir_log({
            "evento": evento,
            "timestamp": datetime.now().isoformat(),
            "datos": datos or {}
        })
        self.logger.info(f"Evento: {evento}")

    def log_error(self, error: str, contexto: Dict[str, Any] = None):
        """Registra un error con contexto"""
        self._escribir_log({
            "evento": "error",
            "timestamp": datetime.now().isoformat(),
            "error": error,
            "contexto": contexto or {}
        })
        self.logger.error(f"Error: {error} - Contexto: {contexto}")

    def _escribir_log(self, data: Dict):
        """Escribe un log en formato JSON y lo envía a Sentry como breadcrumb"""
        data = make_json_serializable(data)
        try:
            with open(self.archivo_log, 'a', encoding='utf-8') as f:
                f.write(json.dumps(data, ensure_ascii=False) + '\n')

            category = data.get("evento", "log")
            level = "error" if category == "error" else "info"
            sentry_sdk.add_breadcrumb(
                category=category,
                message=data.get("mensaje") or f"Evento: {category}",
                data=data,
                level=level
            )
        except OSError as e:
            self.logger.error(f"No se pudo escribir en archivo de log: {e}")

    def eventos(self) -> List[Dict[str, Any]]:
        """Lee de vuelta los eventos escritos (útil en pruebas y reportes)."""
        if not self.archivo_log.exists():
            return []
        with open(self.archivo_log, encoding='utf-8') as f:
            return [json.loads(linea) for linea in f if linea.strip()]


def crear_logger_estructurado(directorio: str = None, archivo_log: str = None) -> LoggerEstructurado:
    """Crea una instancia del logger estructurado en `directorio` (por defecto settings.DISPARIDAD_LOG_DIR)"""
    if archivo_log is None:
        if directorio is None:
            from django.conf import settings
            directorio = getattr(settings, 'DISPARIDAD_LOG_DIR', 'logs')
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        archivo_log = str(Path(directorio) / f"ejecucion_{timestamp}.txt")
    return LoggerEstructurado(archivo_log)
