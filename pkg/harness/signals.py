import logging

from django.db.models.signals import post_save, pre_save
from django.dispatch import receiver

from .models import ExperimentRun

logger = logging.getLogger(__name__)


# ---------- ExperimentRun : suivi des changements de statut ----------
@receiver(pre_save, sender=ExperimentRun, dispatch_uid="harness_run_remember_status")
def remember_previous_status(sender, instance: ExperimentRun, **kwargs):
    previous = None
    if instance.pk:
        previous = (
            ExperimentRun.objects.filter(pk=instance.pk).values_list("status", flat=True).first()
        )
    instance._previous_status = previous


@receiver(post_save, sender=ExperimentRun, dispatch_uid="harness_run_log_status")
def log_status_transition(sender, instance: ExperimentRun, created, **kwargs):
    previous = getattr(instance, "_previous_status", None)
    if not created and previous == instance.status:
        return

    if instance.status == ExperimentRun.Status.FAILED:
        logger.error("Expérience %s en échec : %s", instance.pk, instance.error_message)
    elif instance.status == ExperimentRun.Status.DIVERGED:
        logger.warning("Expérience %s : au moins une graine a divergé", instance.pk)
    else:
        logger.info(
            "Expérience %s : %s -> %s", instance.pk, previous or "-", instance.status
        )
