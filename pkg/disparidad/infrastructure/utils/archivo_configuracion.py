"""
Lectura y escritura de archivos de experimento `clave = valor`.

Un mismo archivo puede llevar claves de red, de entrenamiento y de datos
sintéticos. Las listas van separadas por comas.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Union

from decouple import Csv, RepositoryEnv

from disparidad.domain.configuracion import NetworkConfig, TrainConfig
from disparidad.domain.datos.muestras import SyntheticSpec
from disparidad.domain.excepciones import ErrorConfiguracion

logger = logging.getLogger(__name__)

MODOS_DATOS = ('fixed', 'stream')
CLAVES_SINTETICAS = ('width', 'height', 'texture', 'disparity_field', 'disp_min', 'disp_max', 'num_blocks')
CLAVES_LISTA = ('block_counts', 'stage_channels', 'pyramid_pool_sizes', 'pyramid_dilations', 'kernel_pair')


@dataclass(frozen=True)
class ConfiguracionExperimento:
    """Red, entrenamiento y datos sintéticos de un experimento."""
    red: NetworkConfig = field(default_factory=NetworkConfig)
    entrenamiento: TrainConfig = field(default_factory=TrainConfig)
    sintetico: SyntheticSpec = field(default_factory=SyntheticSpec)
    modo_datos: str = 'fixed'

    def a_pares(self) -> Dict[str, str]:
        pares = dict(self.red.a_pares())
        pares.update(self.entrenamiento.a_pares())
        for clave in CLAVES_SINTETICAS:
            valor = getattr(self.sintetico, clave)
            if valor is not None:
                pares[clave] = str(getattr(valor, 'value', valor))
        pares['data_mode'] = self.modo_datos
        return pares

    def con_semilla(self, semilla: int) -> 'ConfiguracionExperimento':
        return replace(self, entrenamiento=self.entrenamiento.con(seed=semilla),
                       sintetico=self.sintetico.con_semilla(semilla))

    def con_red(self, red: NetworkConfig) -> 'ConfiguracionExperimento':
        """Sustituye la red y alinea el d_max de los datos sintéticos."""
        return replace(self, red=red, sintetico=replace(self.sintetico, d_max=red.d_max))


def _lineas_invalidas(ruta: Path) -> List[str]:
    """RepositoryEnv ignora en silencio las líneas sin '='; aquí se reportan."""
    invalidas = []
    with open(ruta, encoding='utf-8') as archivo:
        for numero, linea in enumerate(archivo, start=1):
            texto = linea.strip()
            if not texto or texto.startswith('#'):
                continue
            clave, separador, _ = texto.partition('=')
            if not separador or not clave.strip():
                invalidas.append(f"línea {numero}: se esperaba 'clave = valor', recibido '{texto}'")
    return invalidas


def leer_pares(ruta: Union[str, Path]) -> Dict[str, str]:
    ruta = Path(ruta)
    if not ruta.is_file():
        raise ErrorConfiguracion([f"no existe el archivo de configuración '{ruta}'"])
    invalidas = _lineas_invalidas(ruta)
    if invalidas:
        raise ErrorConfiguracion(invalidas)
    return dict(RepositoryEnv(str(ruta)).data)


def desde_pares(pares: Dict[str, str]) -> ConfiguracionExperimento:
    """Reparte las claves entre las tres configuraciones; cualquier otra es un error."""
    claves_red, claves_entrenamiento = set(NetworkConfig.claves()), set(TrainConfig.claves())
    conocidas = claves_red | claves_entrenamiento | set(CLAVES_SINTETICAS) | {'data_mode'}
    desconocidas = sorted(set(pares) - conocidas)
    if desconocidas:
        raise ErrorConfiguracion([f"clave desconocida '{clave}'" for clave in desconocidas])

    violaciones: List[str] = []
    red_pares: Dict[str, object] = {}
    for clave in claves_red & set(pares):
        if clave in CLAVES_LISTA:
            try:
                red_pares[clave] = tuple(Csv(cast=int)(pares[clave]))
            except ValueError as error:
                violaciones.append(f"{clave}: {error}")
        else:
            red_pares[clave] = pares[clave]
    if violaciones:
        raise ErrorConfiguracion(violaciones)

    red = NetworkConfig.desde_pares(red_pares)
    entrenamiento = TrainConfig.desde_pares({c: pares[c] for c in claves_entrenamiento & set(pares)})

    sintetico_pares: Dict[str, object] = {'d_max': red.d_max, 'seed': entrenamiento.seed}
    conversores = {'width': int, 'height': int, 'num_blocks': int, 'disp_min': float, 'disp_max': float}
    for clave in CLAVES_SINTETICAS:
        if clave not in pares:
            continue
        try:
            sintetico_pares[clave] = conversores.get(clave, str)(pares[clave])
        except ValueError as error:
            violaciones.append(f"{clave}: {error}")
    modo_datos = pares.get('data_mode', 'fixed').strip().lower()
    if modo_datos not in MODOS_DATOS:
        violaciones.append(f"data_mode debe ser uno de {', '.join(MODOS_DATOS)}, recibido '{modo_datos}'")
    if violaciones:
        raise ErrorConfiguracion(violaciones)

    return ConfiguracionExperimento(
        red=red,
        entrenamiento=entrenamiento,
        sintetico=SyntheticSpec(**sintetico_pares),
        modo_datos=modo_datos,
    )


def leer_configuracion(ruta: Union[str, Path, None]) -> ConfiguracionExperimento:
    """Sin ruta devuelve los valores por defecto."""
    if ruta is None:
        return ConfiguracionExperimento()
    configuracion = desde_pares(leer_pares(ruta))
    logger.info(f"Configuración cargada desde {ruta}: variante={configuracion.red.pyramid_variant.value}, "
                f"d_max={configuracion.red.d_max}, pasos={configuracion.entrenamiento.steps}")
    return configuracion


def escribir_configuracion(ruta: Union[str, Path], configuracion: ConfiguracionExperimento) -> None:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    lineas = [f"{clave} = {valor}" for clave, valor in configuracion.a_pares().items()]
    ruta.write_text("\n".join(lineas) + "\n", encoding='utf-8')
