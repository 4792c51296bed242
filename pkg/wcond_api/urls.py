"""URL configuration for wcond_api project."""
from django.urls import path, include

urlpatterns = [
    path('api/', include('operators.urls')),
]
