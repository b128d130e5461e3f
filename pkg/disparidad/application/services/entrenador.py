"""
Entrenamiento supervisado con la pérdida smooth-L1 enmascarada.

`train_step` hace un forward, un backward y una actualización; el
`EntrenadorEstereo` repite pasos sobre una muestra fija (sobreajuste) o un
flujo de muestras sintéticas, escribe el log de pérdidas y los checkpoints.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
import sentry_sdk

from disparidad.application.services.estado_modelo import EstadoModelo
from disparidad.application.services.evaluacion import ComparacionReservada, comparar_con_base, semillas_reservadas
from disparidad.application.services.inferencia import predecir
from disparidad.domain.configuracion import TrainConfig
from disparidad.domain.datos.muestras import StereoSample, SyntheticSpec
from disparidad.domain.datos.sintetico import generate_sample
from disparidad.domain.excepciones import ErrorConfiguracion, ErrorEntrenamiento, ErrorForma
from disparidad.domain.objetivo.metricas import MetricReport, evaluar
from disparidad.domain.objetivo.perdida import loss
from disparidad.domain.red.matcher import full_forward
from disparidad.domain.tensor import operaciones
from disparidad.domain.tensor.tensor import Tensor, backward
from disparidad.infrastructure.utils.archivo_configuracion import ConfiguracionExperimento
from disparidad.infrastructure.utils.logging_estructurado import LoggerEstructurado

logger = logging.getLogger(__name__)

ARCHIVO_PERDIDAS = 'perdidas.tsv'
ARCHIVO_CHECKPOINT_FINAL = 'checkpoint_final.cfpn'


def _etapa_no_finita(etapas: Dict[str, Tensor]) -> Optional[str]:
    for nombre, tensor in etapas.items():
        if not operaciones.es_finito(tensor):
            return nombre
    return None


def train_step(estado: EstadoModelo, sample: StereoSample, config: TrainConfig) -> Tuple[EstadoModelo, float]:
    """
    Un paso de entrenamiento. Un valor no finito aborta el paso antes de la
    actualización y nombra la primera etapa donde apareció.
    """
    parametros = estado.parametros.entrenar()
    estado.optimizador.learning_rate = config.learning_rate
    estado.optimizador.zero_grad()
    mascara = sample.mascara_entrenamiento(estado.red.d_max)
    if not mascara.any():
        raise ErrorForma(f"train_step: la muestra no tiene píxeles con 0 < gt < {estado.red.d_max}")

    etapas: Dict[str, Tensor] = {}
    with sentry_sdk.start_span(op="entrenamiento.forward", description="Forward y pérdida"):
        prediccion = full_forward(sample.left, sample.right, parametros, etapas)
        perdida = loss(prediccion, sample.gt_disparity, mascara)
    valor = perdida.item()
    if not np.isfinite(valor):
        etapa = _etapa_no_finita(etapas) or 'perdida'
        raise ErrorEntrenamiento(etapa, f"pérdida no finita ({valor}) en el paso {estado.paso + 1}")

    with sentry_sdk.start_span(op="entrenamiento.backward", description="Retropropagación"):
        backward(perdida)
    for nombre, tensor in parametros:
        if tensor.grad is not None and not np.all(np.isfinite(tensor.grad)):
            raise ErrorEntrenamiento(f'backward:{nombre}', f"gradiente no finito en el paso {estado.paso + 1}")

    with sentry_sdk.start_span(op="entrenamiento.actualizacion", description="Paso del optimizador"):
        estado.optimizador.step()
    estado.paso += 1
    return estado, valor


def flujo_muestras(spec: SyntheticSpec, modo: str, config: TrainConfig) -> Iterator[StereoSample]:
    """
    Muestras recortadas a crop_h×crop_w, deterministas para `config.seed`.

    'fixed' reutiliza una única muestra; 'stream' genera una nueva por paso
    con semillas spec.seed, spec.seed+1, ...
    """
    rng = np.random.default_rng(config.seed)
    fija = generate_sample(spec) if modo == 'fixed' else None
    indice = 0
    while True:
        muestra = fija if fija is not None else generate_sample(spec.con_semilla(spec.seed + indice))
        indice += 1
        yield muestra.recorte_aleatorio(config.crop_h, config.crop_w, rng)


@dataclass
class ResultadoEntrenamiento:
    exito: bool
    perdidas: List[float] = field(default_factory=list)
    pasos: int = 0
    tiempo_total: float = 0.0
    ruta_checkpoint: Optional[Path] = None
    reporte_final: Optional[MetricReport] = None
    comparacion_reservada: Optional[ComparacionReservada] = None
    razon: str = ''

    @property
    def perdida_final(self) -> Optional[float]:
        return self.perdidas[-1] if self.perdidas else None


class EntrenadorEstereo:
    """
    Bucle de entrenamiento con log de pérdidas (`paso<TAB>pérdida`),
    checkpoints periódicos y eventos estructurados.
    """

    def __init__(self, configuracion: ConfiguracionExperimento, directorio_salida: Optional[Path] = None,
                 estado: Optional[EstadoModelo] = None, logger_estructurado: Optional[LoggerEstructurado] = None):
        self.configuracion = configuracion
        self.directorio_salida = Path(directorio_salida) if directorio_salida else None
        self.estado = estado or EstadoModelo.nuevo(configuracion.red, configuracion.entrenamiento)
        self.logger_estructurado = logger_estructurado
        spec, config = configuracion.sintetico, configuracion.entrenamiento
        if config.crop_h > spec.height or config.crop_w > spec.width:
            raise ErrorConfiguracion([
                f"el recorte {config.crop_h}×{config.crop_w} excede la muestra {spec.height}×{spec.width}"
            ])
        if spec.d_max != configuracion.red.d_max:
            logger.warning(f"d_max sintético {spec.d_max} distinto del de la red {configuracion.red.d_max}")

    def entrenar(self, pasos: Optional[int] = None, al_paso: Optional[Callable[[int, float], None]] = None,
                 reservadas: int = 0, n_jobs: int = 1) -> ResultadoEntrenamiento:
        """
        Ejecuta `pasos` pasos (por defecto los de la configuración). Con
        `reservadas` > 0 compara al final el EPE medio sobre ese número de
        semillas reservadas contra la misma red sin entrenar.
        """
        config = self.configuracion.entrenamiento
        pasos = config.steps if pasos is None else pasos
        inicio = time.time()
        resultado = ResultadoEntrenamiento(exito=False)

        sentry_sdk.set_tag("variante", self.configuracion.red.pyramid_variant.value)
        sentry_sdk.set_tag("semilla", config.seed)
        if self.logger_estructurado:
            self.logger_estructurado.iniciar_ejecucion(self.configuracion.a_pares(), semilla=config.seed)

        archivo_perdidas = None
        if self.directorio_salida:
            self.directorio_salida.mkdir(parents=True, exist_ok=True)
            archivo_perdidas = open(self.directorio_salida / ARCHIVO_PERDIDAS, 'w', encoding='utf-8')

        logger.info(f"Entrenando {pasos} pasos ({self.configuracion.modo_datos}, "
                    f"{config.optimizer.value}, lr={config.learning_rate})")
        muestras = flujo_muestras(self.configuracion.sintetico, self.configuracion.modo_datos, config)
        try:
            with sentry_sdk.start_span(op="entrenamiento", description=f"{pasos} pasos"):
                for _ in range(pasos):
                    self.estado, perdida = train_step(self.estado, next(muestras), config)
                    paso = self.estado.paso
                    resultado.perdidas.append(perdida)
                    if archivo_perdidas:
                        archivo_perdidas.write(f"{paso}\t{perdida:.8g}\n")
                    if paso % config.log_every == 0:
                        logger.info(f"Paso {paso}: pérdida={perdida:.6f}")
                        if self.logger_estructurado:
                            self.logger_estructurado.registrar_paso(paso, perdida)
                    if config.checkpoint_every and paso % config.checkpoint_every == 0:
                        self._guardar(f'checkpoint_{paso:06d}.cfpn')
                    if al_paso:
                        al_paso(paso, perdida)
        except ErrorEntrenamiento as error:
            resultado.razon = str(error)
            if self.logger_estructurado:
                self.logger_estructurado.log_error(str(error), {'etapa': error.etapa, 'paso': self.estado.paso + 1})
            raise
        finally:
            if archivo_perdidas:
                archivo_perdidas.close()
            resultado.pasos = len(resultado.perdidas)
            resultado.tiempo_total = time.time() - inicio

        resultado.ruta_checkpoint = self._guardar(ARCHIVO_CHECKPOINT_FINAL)
        if self.configuracion.modo_datos == 'fixed':
            resultado.reporte_final = self.evaluar_muestra_fija()
        if reservadas:
            resultado.comparacion_reservada = self.evaluar_reservadas(reservadas, n_jobs=n_jobs)
        resultado.exito = True

        if self.logger_estructurado:
            self.logger_estructurado.registrar_fase('entrenamiento', resultado.tiempo_total, resultado.pasos, True,
                                                    {'perdida_final': resultado.perdida_final})
            self.logger_estructurado.registrar_resultado_final({
                'exito': True,
                'perdida_final': resultado.perdida_final,
                'epe_final': resultado.reporte_final.epe if resultado.reporte_final else None,
                'epe_reservado': (resultado.comparacion_reservada.entrenado.epe_medio
                                  if resultado.comparacion_reservada else None),
                'pasos': resultado.pasos,
                'tiempo_total': resultado.tiempo_total,
            })
        logger.info(f"Entrenamiento completado en {resultado.tiempo_total:.2f}s, "
                    f"pérdida final {resultado.perdida_final}")
        return resultado

    def muestra_fija(self) -> StereoSample:
        config = self.configuracion.entrenamiento
        return next(flujo_muestras(self.configuracion.sintetico, 'fixed', config))

    def evaluar_muestra_fija(self) -> MetricReport:
        """Métricas sobre la muestra de entrenamiento (BN en modo evaluación)."""
        muestra = self.muestra_fija()
        prediccion = predecir(self.estado.parametros, muestra.left, muestra.right)
        mascara = muestra.mascara_entrenamiento(self.estado.red.d_max)
        return evaluar(prediccion, muestra.gt_disparity, mascara, fg_mask=muestra.fg_mask)

    def evaluar_reservadas(self, cantidad: int, n_jobs: int = 1) -> ComparacionReservada:
        """EPE medio sobre semillas reservadas, entrenado frente a la inicialización de la misma semilla."""
        base = EstadoModelo.nuevo(self.estado.red, self.configuracion.entrenamiento).parametros
        spec = self.configuracion.sintetico
        with sentry_sdk.start_span(op="evaluacion.reservada", description=f"{cantidad} semillas"):
            comparacion = comparar_con_base(self.estado.parametros, base, spec, semillas_reservadas(cantidad),
                                            n_jobs=n_jobs)
        logger.info(f"Semillas reservadas: EPE {comparacion.entrenado.epe_medio:.4f} "
                    f"frente a {comparacion.base.epe_medio:.4f} sin entrenar")
        if self.logger_estructurado:
            self.logger_estructurado.log_evento('evaluacion_reservada', {
                'semillas': comparacion.entrenado.semillas,
                'epe_entrenado': comparacion.entrenado.epe_medio,
                'epe_base': comparacion.base.epe_medio,
                'mejora': comparacion.mejora,
            })
        return comparacion

    def _guardar(self, nombre: str) -> Optional[Path]:
        if not self.directorio_salida:
            return None
        ruta = self.directorio_salida / nombre
        self.estado.guardar(ruta)
        if self.logger_estructurado:
            self.logger_estructurado.registrar_checkpoint(str(ruta), self.estado.paso)
        return ruta
