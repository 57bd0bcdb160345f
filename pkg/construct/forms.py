from django import forms

from .builders import MASS_METHODS
from .strata import MODES

METHODS = ('iid', 'stratified', 'sparse')


def _choices(values):
    return [(value, value) for value in values]


class BuilderConfigForm(forms.Form):
    """Validate a builder config {method, m, epsilon?, mode?, m0?, seed}."""

    method = forms.ChoiceField(choices=_choices(METHODS))
    m = forms.IntegerField(min_value=1)
    epsilon = forms.FloatField(required=False)
    mode = forms.ChoiceField(choices=_choices(MODES), required=False)
    m0 = forms.IntegerField(min_value=1, required=False)
    masses = forms.ChoiceField(choices=_choices(MASS_METHODS), required=False)
    seed = forms.IntegerField(min_value=0, required=False)

    def clean_epsilon(self):
        epsilon = self.cleaned_data.get('epsilon')
        if epsilon is not None and epsilon <= 0:
            raise forms.ValidationError("epsilon must be positive.")
        return epsilon

    def clean(self):
        cleaned_data = super().clean()
        method = cleaned_data.get('method')
        if method == 'sparse' and cleaned_data.get('m0') is None:
            raise forms.ValidationError("The sparse builder needs m0.")
        if method != 'stratified' and cleaned_data.get('epsilon') is not None:
            raise forms.ValidationError("epsilon only applies to the stratified builder.")
        cleaned_data['mode'] = cleaned_data.get('mode') or 'fractional'
        cleaned_data['masses'] = cleaned_data.get('masses') or 'exact'
        return cleaned_data
