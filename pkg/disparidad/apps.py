from django.apps import AppConfig


class DisparidadConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'disparidad'
    verbose_name = 'Estimación de disparidad estéreo'
