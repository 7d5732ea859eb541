from django.contrib import admin

from .models import BenchRun, BenchTiming


class BenchTimingInline(admin.TabularInline):
    model = BenchTiming
    extra = 0
    readonly_fields = ["variant", "median_seconds", "solutions"]


@admin.register(BenchRun)
class BenchRunAdmin(admin.ModelAdmin):
    list_display = ["created_at", "query", "repetitions", "semantics"]
    search_fields = ["query", "sources"]
    list_filter = ["semantics", "created_at"]
    ordering = ["-created_at"]
    date_hierarchy = "created_at"
    inlines = [BenchTimingInline]


@admin.register(BenchTiming)
class BenchTimingAdmin(admin.ModelAdmin):
    list_display = ["run", "variant", "median_seconds", "solutions"]
    list_filter = ["variant", "run__semantics"]
    ordering = ["run", "median_seconds"]
