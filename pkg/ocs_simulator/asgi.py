"""
ASGI config for ocs_simulator project.

Seule l'interface d'administration (registres d'expériences) est servie.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "ocs_simulator.settings")

application = get_asgi_application()
