"""
URL configuration for uqsim_backend project.
"""
from django.contrib import admin
from django.urls import path, include
from .setup_views import health_check

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/v1/runs/', include('runs.urls')),
    path('health/', health_check, name='health_check'),
]
