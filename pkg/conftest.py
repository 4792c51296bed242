import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "wcond_api.settings")
django.setup()
