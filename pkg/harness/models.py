import hashlib

from django.db import models


class ExperimentRun(models.Model):
    class Status(models.TextChoices):
        PENDING = "PENDING", "En attente"
        RUNNING = "RUNNING", "En cours"
        COMPLETED = "COMPLETED", "Terminée"
        DIVERGED = "DIVERGED", "Divergence"
        FAILED = "FAILED", "Échec"

    config_text = models.TextField(verbose_name="Configuration")
    config_sha256 = models.CharField(max_length=64, db_index=True, verbose_name="Empreinte SHA-256")
    algorithm = models.CharField(max_length=10, verbose_name="Algorithme")
    sampler = models.CharField(max_length=10, verbose_name="Échantillonneur")
    seeds = models.TextField(verbose_name="Graines")
    status = models.CharField(
        max_length=10, choices=Status.choices, default=Status.PENDING, verbose_name="Statut"
    )
    output_path = models.CharField(max_length=500, blank=True, verbose_name="Fichier CSV")
    rows_written = models.PositiveIntegerField(default=0, verbose_name="Lignes écrites")
    total_uplink_bits = models.PositiveBigIntegerField(default=0, verbose_name="Bits montants")
    error_message = models.TextField(blank=True, verbose_name="Erreur")
    created_at = models.DateTimeField(auto_now_add=True, verbose_name="Date de création")
    updated_at = models.DateTimeField(auto_now=True, verbose_name="Dernière modification")

    class Meta:
        verbose_name = "Expérience"
        verbose_name_plural = "Expériences"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.algorithm}/{self.sampler} #{self.pk} ({self.get_status_display()})"

    @staticmethod
    def fingerprint(config_text: str) -> str:
        return hashlib.sha256(config_text.encode("utf-8")).hexdigest()

    def save(self, *args, **kwargs):
        self.config_sha256 = self.fingerprint(self.config_text)
        super().save(*args, **kwargs)


class SeedOutcome(models.Model):
    run = models.ForeignKey(
        ExperimentRun, on_delete=models.CASCADE, related_name="outcomes", verbose_name="Expérience"
    )
    seed = models.PositiveIntegerField(verbose_name="Graine")
    diverged = models.BooleanField(default=False, verbose_name="Divergence")
    divergence_round = models.PositiveIntegerField(null=True, blank=True, verbose_name="Round de divergence")
    final_suboptimality = models.FloatField(null=True, blank=True, verbose_name="f(x) − f* final")
    uplink_bits = models.PositiveBigIntegerField(default=0, verbose_name="Bits montants")
    bits_to_target = models.PositiveBigIntegerField(null=True, blank=True, verbose_name="Bits jusqu'à la cible")
    max_dispersion = models.FloatField(default=0.0, verbose_name="Dispersion maximale")

    class Meta:
        verbose_name = "Résultat par graine"
        verbose_name_plural = "Résultats par graine"
        ordering = ["run", "seed"]
        constraints = [
            models.UniqueConstraint(fields=["run", "seed"], name="unique_seed_per_run"),
        ]

    def __str__(self):
        return f"Graine {self.seed} ({'divergée' if self.diverged else 'ok'})"
