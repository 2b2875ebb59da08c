from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from runs.models import Run, EpochMetric


class SizeListField(serializers.ListField):
    """Layer sizes as a list or as comma-separated text ("16,16")."""

    child = serializers.IntegerField(min_value=1)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [part.strip() for part in data.split(",") if part.strip()]
        return tuple(super().to_internal_value(list(data)))


class ModelConfigSerializer(serializers.Serializer):
    obs_dim = serializers.IntegerField(min_value=1, required=False)
    latent_dim = serializers.IntegerField(min_value=1, required=False)
    rnn_dim = serializers.IntegerField(min_value=1, required=False)
    prior_rnn_dim = serializers.IntegerField(min_value=1, required=False)
    mlp_hidden = SizeListField(min_length=1, required=False)
    window = serializers.IntegerField(min_value=2, required=False)
    beta_final = serializers.FloatField(min_value=0.0, required=False)
    beta_decay_rate = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    beta_decay_steps = serializers.IntegerField(min_value=1, required=False)
    dropout_rate = serializers.FloatField(min_value=0.0, required=False)
    l2_lambda = serializers.FloatField(min_value=0.0, required=False)
    learning_rate = serializers.FloatField(min_value=0.0, required=False)
    lr_decay_rate = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    lr_decay_steps = serializers.IntegerField(min_value=1, required=False)
    epochs = serializers.IntegerField(min_value=0, required=False)
    batch_size = serializers.IntegerField(min_value=1, required=False)
    mc_samples = serializers.IntegerField(min_value=1, required=False)
    train_frac = serializers.FloatField(required=False)
    checkpoint_every = serializers.IntegerField(min_value=1, required=False)
    trainable_prior = serializers.BooleanField(required=False)
    ar_decoder = serializers.BooleanField(required=False)
    backward_only_encoder = serializers.BooleanField(required=False)
    zero_mean_decoder = serializers.BooleanField(required=False)
    diag_decoder_cov = serializers.BooleanField(required=False)
    no_anneal = serializers.BooleanField(required=False)
    no_dropout = serializers.BooleanField(required=False)
    no_l2 = serializers.BooleanField(required=False)
    deterministic_bottleneck = serializers.BooleanField(required=False)
    high_dim = serializers.BooleanField(required=False)

    def validate_dropout_rate(self, value):
        if value >= 1.0:
            raise ValidationError("dropout_rate must be below 1")
        return value

    def validate_train_frac(self, value):
        if not 0.0 < value < 1.0:
            raise ValidationError("train_frac must be in (0, 1)")
        return value

    def validate(self, attrs):
        data = super(ModelConfigSerializer, self).validate(attrs=attrs)
        unknown = sorted(set(self.initial_data) - set(self.fields))
        if unknown:
            raise ValidationError({key: "unknown configuration key" for key in unknown})
        if data.get("deterministic_bottleneck") and data.get("no_anneal"):
            raise ValidationError(
                "deterministic_bottleneck has no KL term, so no_anneal cannot be combined with it"
            )
        return data


class RunSerializer(serializers.ModelSerializer):
    class Meta:
        model = Run
        fields = (
            "id",
            "command",
            "seed",
            "status",
            "config",
            "input_digests",
            "output_dir",
            "summary",
            "created_at",
            "finished_at",
        )


class EpochMetricSerializer(serializers.ModelSerializer):
    class Meta:
        model = EpochMetric
        fields = ("epoch", "loss", "reconstruction", "kl", "beta", "learning_rate")
