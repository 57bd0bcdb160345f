from django import forms
from django.conf import settings

from construct.builders import MASS_METHODS
from construct.forms import METHODS, BuilderConfigForm
from construct.strata import MODES
from spectral.catalog import resolve_target

from .models import ExperimentConfig

SAMPLERS = ('exact', 'simplified')
SWEEP_MIN_M = 3
SWEEP_MIN_SEEDS = 10


def _choices(values):
    return [(value, value) for value in values]


class IntegerListField(forms.Field):
    """A list of whole numbers, given as a JSON list or a comma-separated string."""

    default_error_messages = {'invalid': "Enter a list of whole numbers."}

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, str):
            value = [item for item in value.replace(' ', '').split(',') if item]
        elif isinstance(value, int):
            value = [value]
        numbers = []
        for item in value:
            try:
                number = int(item)
            except (TypeError, ValueError):
                raise forms.ValidationError(self.error_messages['invalid'], code='invalid') from None
            if isinstance(item, float) and item != number:
                raise forms.ValidationError(self.error_messages['invalid'], code='invalid')
            numbers.append(number)
        return numbers


class ExperimentForm(forms.Form):
    target = forms.CharField()
    methods = forms.MultipleChoiceField(choices=_choices(METHODS))
    m = IntegerListField()
    seeds = IntegerListField(required=False)
    s = forms.TypedChoiceField(choices=[(2, '2'), (3, '3')], coerce=int, required=False, empty_value=2)
    sampler = forms.ChoiceField(choices=_choices(SAMPLERS), required=False)
    epsilon = forms.FloatField(required=False)
    mode = forms.ChoiceField(choices=_choices(MODES), required=False)
    m0 = forms.IntegerField(min_value=1, required=False)
    masses = forms.ChoiceField(choices=_choices(MASS_METHODS), required=False)
    nodes = forms.IntegerField(min_value=2, required=False)
    resolution = forms.IntegerField(min_value=3, required=False)
    force = forms.BooleanField(required=False)

    def default_seeds(self):
        return [settings.RIDGE_DEFAULT_SEED]

    def clean_target(self):
        target = self.cleaned_data['target']
        try:
            self.entry = resolve_target(target)
        except ValueError as exc:
            raise forms.ValidationError(str(exc)) from None
        return target

    def clean_m(self):
        m = self.cleaned_data['m']
        if min(m) < 1:
            raise forms.ValidationError("Every m must be positive.")
        if any(b <= a for a, b in zip(m, m[1:])):
            raise forms.ValidationError("The m list must be strictly increasing.")
        return m

    def clean_seeds(self):
        seeds = self.cleaned_data['seeds'] or self.default_seeds()
        if min(seeds) < 0:
            raise forms.ValidationError("Seeds must be nonnegative.")
        return seeds

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        cleaned_data['sampler'] = cleaned_data.get('sampler') or 'exact'
        cleaned_data['mode'] = cleaned_data.get('mode') or 'fractional'
        cleaned_data['masses'] = cleaned_data.get('masses') or 'exact'
        for method in cleaned_data['methods']:
            builder = BuilderConfigForm({
                'method': method,
                'm': cleaned_data['m'][-1],
                'epsilon': cleaned_data.get('epsilon') if method == 'stratified' else None,
                'mode': cleaned_data['mode'],
                'm0': cleaned_data.get('m0'),
                'masses': cleaned_data['masses'],
                'seed': cleaned_data['seeds'][0],
            })
            if not builder.is_valid():
                raise forms.ValidationError([error for errors in builder.errors.values() for error in errors])
        if 'stratified' in cleaned_data['methods'] and cleaned_data['sampler'] == 'simplified':
            raise forms.ValidationError("The stratified builder needs the exact sampler.")
        if not cleaned_data.get('force'):
            self._check_desk_scale(cleaned_data)
        return cleaned_data

    def _check_desk_scale(self, cleaned_data):
        if self.entry.d > settings.RIDGE_MAX_DIM:
            raise forms.ValidationError(
                f"Dimension {self.entry.d} exceeds {settings.RIDGE_MAX_DIM}; pass --force to run anyway."
            )
        if cleaned_data['m'][-1] > settings.RIDGE_MAX_M:
            raise forms.ValidationError(
                f"m={cleaned_data['m'][-1]} exceeds {settings.RIDGE_MAX_M}; pass --force to run anyway."
            )
        if len(cleaned_data['seeds']) > settings.RIDGE_MAX_SEEDS:
            raise forms.ValidationError(
                f"{len(cleaned_data['seeds'])} seeds exceed {settings.RIDGE_MAX_SEEDS}; pass --force to run anyway."
            )

    def to_config(self):
        data = self.cleaned_data
        return ExperimentConfig(
            target=data['target'], methods=tuple(data['methods']), m=tuple(data['m']),
            seeds=tuple(data['seeds']), s=data['s'], sampler=data['sampler'],
            epsilon=data.get('epsilon'), mode=data['mode'], m0=data.get('m0'),
            masses=data['masses'], nodes=data.get('nodes'), resolution=data.get('resolution'),
        )


# pour la commande build : une seule méthode, un seul m et un seul seed
class BuildForm(ExperimentForm):
    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        for name in ('methods', 'm', 'seeds'):
            if len(cleaned_data.get(name) or ()) > 1:
                raise forms.ValidationError(f"build takes a single value for {name}.")
        return cleaned_data


class SweepForm(ExperimentForm):
    def default_seeds(self):
        return list(range(settings.RIDGE_DEFAULT_SEED, settings.RIDGE_DEFAULT_SEED + SWEEP_MIN_SEEDS))

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        if len(cleaned_data.get('m') or ()) < SWEEP_MIN_M:
            raise forms.ValidationError(f"A rate sweep needs at least {SWEEP_MIN_M} m values.")
        if len(cleaned_data.get('seeds') or ()) < SWEEP_MIN_SEEDS:
            raise forms.ValidationError(f"A rate sweep needs at least {SWEEP_MIN_SEEDS} seeds.")
        return cleaned_data
