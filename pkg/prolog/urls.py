from django.urls import path

from . import views

urlpatterns = [
    path("api/query/", views.api_query, name="api_query"),
    path("api/lint/", views.api_lint, name="api_lint"),
]
