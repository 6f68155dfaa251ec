import pytest

from services.generators import random_model
from services.topos_battery import topos_battery
from services.translation import internal_language


def _failures(checks):
    return [c.to_dict() for c in checks if not c.passed]


class TestFiniteCategory:
    @pytest.fixture
    def lang(self):
        return internal_language({'X': 2, 'Y': 3}, {
            'f': ('X', 'Y', {0: 0, 1: 2}),
            'g': ('Y', 'X', {0: 0, 1: 1, 2: 1}),
        })

    def test_every_check_passes(self, lang, rng):
        checks = topos_battery(lang, rng)
        assert checks
        assert _failures(checks) == []

    def test_only_monic_arrows_are_classified(self, lang, rng):
        checks = topos_battery(lang, rng)
        classified = {c.subject for c in checks if c.name == 'characteristic'}
        assert classified == {'f'}
        assert 'chi_f' in lang.arrows
        details = {c.subject: c.detail for c in checks if c.name == 'monic_criterion'}
        assert details == {'f': 'monic', 'g': 'not monic'}


class TestRandomModels:
    def test_record_kinds(self, rng):
        model = random_model(rng)
        names = {c.name for c in topos_battery(model.lang, rng)}
        assert {'f_star', 'unicity', 'square', 'r_bijective', 'belonging', 'rho', 'monic_criterion'} <= names

    def test_small_models(self, rng):
        for _ in range(3):
            model = random_model(rng, max_objects=2, max_size=3, max_functions=2)
            assert _failures(topos_battery(model.lang, rng)) == []

    @pytest.mark.slow
    def test_many_models(self, rng):
        for _ in range(20):
            model = random_model(rng)
            assert _failures(topos_battery(model.lang, rng)) == []
