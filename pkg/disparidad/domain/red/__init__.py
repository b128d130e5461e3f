"""
Red de disparidad: extractor 2D (LFE + pirámide) y módulo 3D de
emparejamiento con regresión soft argmin.
"""
