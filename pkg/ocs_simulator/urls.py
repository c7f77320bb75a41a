from django.contrib import admin
from django.urls import path

urlpatterns = [
    # Administration : consultation des exécutions (lecture seule)
    path("admin-ocs/", admin.site.urls),
]
