import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ridgeapprox.settings')
django.setup()
