"""
Punto de entrada de línea de comandos: `disparidad <subcomando> [opciones]`.

Los subcomandos son los comandos de gestión de la app; el código de salida
es 0 si todo fue bien, 1 ante un error de ejecución y 2 ante un error de uso.
"""

import os
import sys
from typing import List, Optional

import django

SUBCOMANDOS = {
    'train': 'train',
    'infer': 'infer',
    'eval': 'eval',
    'gradcheck': 'gradcheck',
    'summary': 'summary',
    'gen-data': 'gen_data',
}

USO = (
    "uso: disparidad {" + ",".join(SUBCOMANDOS) + "} [opciones]\n"
    "  disparidad <subcomando> --help muestra las opciones de cada uno\n"
)


def cli(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMANDOS:
        if argv and argv[0] not in ('-h', '--help'):
            sys.stderr.write(f"subcomando desconocido: {argv[0]}\n")
        sys.stderr.write(USO)
        return 0 if argv and argv[0] in ('-h', '--help') else 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'laboratorio.settings')
    django.setup()
    from django.core.management import load_command_class

    nombre = SUBCOMANDOS[argv[0]]
    comando = load_command_class('disparidad', nombre)
    try:
        comando.run_from_argv(['disparidad', nombre, *argv[1:]])
    except SystemExit as salida:
        codigo = salida.code
        return codigo if isinstance(codigo, int) else (0 if codigo is None else 1)
    return 0


def main():
    sys.exit(cli())


if __name__ == '__main__':
    main()
