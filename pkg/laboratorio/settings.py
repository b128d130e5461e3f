"""
Configuración Django del laboratorio de disparidad.

El proyecto no sirve HTTP ni usa base de datos: Django aloja los comandos de
gestión (train, infer, eval, gradcheck, summary, gen_data) y la suite de
pruebas. Todo valor de entorno se lee con python-decouple.
"""

from pathlib import Path

import sentry_sdk
from decouple import config

BASE_DIR = Path(__file__).resolve().parent.parent

# Sentry sólo se inicializa si hay DSN; sin él los spans y breadcrumbs no hacen nada
SENTRY_DSN = config('SENTRY_DSN', default=None)
if SENTRY_DSN:
    sentry_sdk.init(
        dsn=SENTRY_DSN,
        traces_sample_rate=config('SENTRY_TRACES_SAMPLE_RATE', default=1.0, cast=float),
        send_default_pii=False,
    )

SECRET_KEY = config('DJANGO_SECRET_KEY', default='django-insecure-laboratorio-disparidad')

DEBUG = config('DJANGO_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'disparidad',
]

DATABASES = {}

LANGUAGE_CODE = config('LANGUAGE_CODE', default='es')

TIME_ZONE = config('TIME_ZONE', default='UTC')

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Laboratorio de disparidad
DISPARIDAD_LOG_DIR = config('DISPARIDAD_LOG_DIR', default=str(BASE_DIR / 'logs'))
DISPARIDAD_N_JOBS = config('DISPARIDAD_N_JOBS', default=1, cast=int)
