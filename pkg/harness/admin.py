from django.contrib import admin

from .models import ExperimentRun, SeedOutcome


class ReadOnlyAdminMixin:
    """Enregistrements d'audit : consultation seule."""

    def has_add_permission(self, request, obj=None):
        return False

    def has_change_permission(self, request, obj=None):
        return False


class SeedOutcomeInline(ReadOnlyAdminMixin, admin.TabularInline):
    model = SeedOutcome
    extra = 0
    fields = (
        "seed",
        "diverged",
        "divergence_round",
        "final_suboptimality",
        "uplink_bits",
        "bits_to_target",
    )
    readonly_fields = fields


@admin.register(ExperimentRun)
class ExperimentRunAdmin(ReadOnlyAdminMixin, admin.ModelAdmin):
    list_display = (
        "id",
        "algorithm",
        "sampler",
        "seeds",
        "status",
        "rows_written",
        "total_uplink_bits",
        "created_at",
    )
    list_filter = ("status", "algorithm", "sampler", "created_at")
    search_fields = ("config_sha256", "output_path")
    ordering = ("-created_at",)
    inlines = [SeedOutcomeInline]

    fieldsets = (
        ("Configuration", {"fields": ("algorithm", "sampler", "seeds", "config_text")}),
        (
            "Résultats",
            {"fields": ("status", "rows_written", "total_uplink_bits", "output_path", "error_message")},
        ),
        (
            "Informations système",
            {"fields": ("config_sha256", "created_at", "updated_at"), "classes": ("collapse",)},
        ),
    )
    readonly_fields = (
        "algorithm",
        "sampler",
        "seeds",
        "config_text",
        "status",
        "rows_written",
        "total_uplink_bits",
        "output_path",
        "error_message",
        "config_sha256",
        "created_at",
        "updated_at",
    )


@admin.register(SeedOutcome)
class SeedOutcomeAdmin(ReadOnlyAdminMixin, admin.ModelAdmin):
    list_display = ("run", "seed", "diverged", "final_suboptimality", "uplink_bits", "bits_to_target")
    list_filter = ("diverged",)
    ordering = ("run", "seed")
