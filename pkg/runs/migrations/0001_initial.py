# Generated by Django 4.2.6 on 2026-10-18 09:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="Run",
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
                ("command", models.CharField(max_length=32)),
                ("seed", models.BigIntegerField(default=0)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("running", "Running"),
                            ("done", "Done"),
                            ("failed", "Failed"),
                        ],
                        default="running",
                        max_length=16,
                    ),
                ),
                ("config", models.JSONField(default=dict)),
                ("input_digests", models.JSONField(default=dict)),
                ("output_dir", models.CharField(max_length=1024)),
                ("summary", models.JSONField(default=dict)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("finished_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="EpochMetric",
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
                ("epoch", models.IntegerField()),
                ("loss", models.FloatField()),
                ("reconstruction", models.FloatField()),
                ("kl", models.FloatField()),
                ("beta", models.FloatField()),
                ("learning_rate", models.FloatField()),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="epochs",
                        to="runs.run",
                    ),
                ),
            ],
            options={
                "ordering": ["epoch"],
            },
        ),
        migrations.AddConstraint(
            model_name="epochmetric",
            constraint=models.UniqueConstraint(
                fields=("run", "epoch"), name="unique_run_epoch"
            ),
        ),
    ]
