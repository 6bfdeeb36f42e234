import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "tdmix_site.settings")
django.setup()
