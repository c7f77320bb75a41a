# Generated by Django 5.2.6 on 2026-10-19 09:00

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("config_text", models.TextField(verbose_name="Configuration")),
                (
                    "config_sha256",
                    models.CharField(db_index=True, max_length=64, verbose_name="Empreinte SHA-256"),
                ),
                ("algorithm", models.CharField(max_length=10, verbose_name="Algorithme")),
                ("sampler", models.CharField(max_length=10, verbose_name="Échantillonneur")),
                ("seeds", models.CharField(max_length=500, verbose_name="Graines")),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("PENDING", "En attente"),
                            ("RUNNING", "En cours"),
                            ("COMPLETED", "Terminée"),
                            ("DIVERGED", "Divergence"),
                            ("FAILED", "Échec"),
                        ],
                        default="PENDING",
                        max_length=10,
                        verbose_name="Statut",
                    ),
                ),
                ("output_path", models.CharField(blank=True, max_length=500, verbose_name="Fichier CSV")),
                ("rows_written", models.PositiveIntegerField(default=0, verbose_name="Lignes écrites")),
                (
                    "total_uplink_bits",
                    models.PositiveBigIntegerField(default=0, verbose_name="Bits montants"),
                ),
                ("error_message", models.TextField(blank=True, verbose_name="Erreur")),
                ("created_at", models.DateTimeField(auto_now_add=True, verbose_name="Date de création")),
                ("updated_at", models.DateTimeField(auto_now=True, verbose_name="Dernière modification")),
            ],
            options={
                "verbose_name": "Expérience",
                "verbose_name_plural": "Expériences",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="SeedOutcome",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("seed", models.PositiveIntegerField(verbose_name="Graine")),
                ("diverged", models.BooleanField(default=False, verbose_name="Divergence")),
                (
                    "divergence_round",
                    models.PositiveIntegerField(blank=True, null=True, verbose_name="Round de divergence"),
                ),
                (
                    "final_suboptimality",
                    models.FloatField(blank=True, null=True, verbose_name="f(x) − f* final"),
                ),
                ("uplink_bits", models.PositiveBigIntegerField(default=0, verbose_name="Bits montants")),
                (
                    "bits_to_target",
                    models.PositiveBigIntegerField(blank=True, null=True, verbose_name="Bits jusqu'à la cible"),
                ),
                ("max_dispersion", models.FloatField(default=0.0, verbose_name="Dispersion maximale")),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="outcomes",
                        to="harness.experimentrun",
                        verbose_name="Expérience",
                    ),
                ),
            ],
            options={
                "verbose_name": "Résultat par graine",
                "verbose_name_plural": "Résultats par graine",
                "ordering": ["run", "seed"],
                "constraints": [
                    models.UniqueConstraint(fields=("run", "seed"), name="unique_seed_per_run")
                ],
            },
        ),
    ]
