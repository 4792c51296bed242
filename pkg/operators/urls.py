from django.urls import path
from .views import ClassifyView, SpectrumView, UnitSquareView, VerifyView

urlpatterns = [
    path('classify/', ClassifyView.as_view(), name='operator-classify'),
    path('spectrum/', SpectrumView.as_view(), name='operator-spectrum'),
    path('verify/', VerifyView.as_view(), name='operator-verify'),
    path('unit-square/', UnitSquareView.as_view(), name='operator-unit-square'),
]
