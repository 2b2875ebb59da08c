from django.db import models


class Run(models.Model):
    class Status(models.TextChoices):
        RUNNING = "running"
        DONE = "done"
        FAILED = "failed"

    command = models.CharField(max_length=32)
    seed = models.BigIntegerField(default=0)
    status = models.CharField(max_length=16, choices=Status.choices, default=Status.RUNNING)
    config = models.JSONField(default=dict)
    input_digests = models.JSONField(default=dict)
    output_dir = models.CharField(max_length=1024)
    summary = models.JSONField(default=dict)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at"]

    @property
    def variant(self) -> str:
        return self.config.get("variant", "")

    def __str__(self) -> str:
        return f"{self.command} #{self.pk} ({self.status})"


class EpochMetric(models.Model):
    run = models.ForeignKey(Run, on_delete=models.CASCADE, related_name="epochs")
    epoch = models.IntegerField()
    loss = models.FloatField()
    reconstruction = models.FloatField()
    kl = models.FloatField()
    beta = models.FloatField()
    learning_rate = models.FloatField()

    class Meta:
        ordering = ["epoch"]
        constraints = [
            models.UniqueConstraint(fields=["run", "epoch"], name="unique_run_epoch"),
        ]

    def __str__(self) -> str:
        return f"{self.run} epoch {self.epoch}"
