"""
Aplicación de estimación de disparidad estéreo (pirámide espacial de forma
cruzada, volumen de costo por concatenación y regresión soft argmin).
"""
