"""
WSGI config for ocs_simulator project.

Seule l'interface d'administration (registres d'expériences) est servie.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "ocs_simulator.settings")

application = get_wsgi_application()
