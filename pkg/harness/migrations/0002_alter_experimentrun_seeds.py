# Generated by Django 5.2.6 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ("harness", "0001_initial"),
    ]

    operations = [
        migrations.AlterField(
            model_name="experimentrun",
            name="seeds",
            field=models.TextField(verbose_name="Graines"),
        ),
    ]
