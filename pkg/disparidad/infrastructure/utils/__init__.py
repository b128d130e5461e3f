"""
Este archivo define este directorio como un paquete Python.
Necesario para que Django y otras herramientas puedan importar módulos desde aquí.
"""
