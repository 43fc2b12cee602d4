import django

if django.VERSION[:2] < (3, 2):
    default_app_config = 'stacklin.apps.StacklinConfig'
