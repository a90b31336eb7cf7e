import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petersburg import criteria
from petersburg.criteria import (
    Convergence,
    CriterionId,
    CriterionValue,
    EvalConfig,
    Recommendation,
    Tag,
    ToleranceError,
    TruncationPolicy,
    classify_divergence,
    cost_term,
    eval_criterion,
    expected_net_log_utility,
    gain_term,
    truncated_criterion_iii,
)
from petersburg.errors import DiagnosticError, DomainError
from petersburg.model import E2, Game

I, II, III, IV = CriterionId

# 40-digit mpmath sums of the full infinite series
GAIN_A = {1.0: 1.1788784390890231453, 10.0: 0.26567732286037159439, 100.0: 0.042957700775667335618}
GROWTH_A_W10_P1 = 0.18168675663840669606


def brute_gain_a(W, N=50):
    """Partial sum to N plus the closed-form tail bound ln(1+x) <= ln x + 1/x."""
    partial = math.fsum(2.0**-n * math.log((W + 2.0 ** (n - 1)) / W) for n in range(1, N + 1))
    tail = math.fsum(
        2.0**-n * ((n - 1) * math.log(2) - math.log(W) + W * 2.0 ** (1 - n)) for n in range(N + 1, 400)
    )
    return partial, tail


def brute_growth_a(W, P, N=50):
    return math.fsum(2.0**-n * math.log((W - P + 2.0 ** (n - 1)) / W) for n in range(1, N + 1))


# -- gain and cost terms ------------------------------------------------------

def test_gain_b_diverges_with_unit_terms():
    v = gain_term(Game.B, 2.5)
    assert v.tag is Tag.POS_DIVERGENT
    assert [2.0**-n * criteria.log_gain_ratio(Game.B, n, 2.5) for n in range(1, 61)] == [1.0] * 60


def test_gain_a_matches_brute_force_with_tail_bound():
    partial, tail = brute_gain_a(1.0)
    v = gain_term(Game.A, 1.0)
    assert v.tag is Tag.FINITE
    assert partial <= v.value <= partial + tail
    assert v.value == pytest.approx(GAIN_A[1.0], abs=1e-14)
    assert v.error_bound <= 1e-12


@pytest.mark.parametrize("W", sorted(GAIN_A))
def test_gain_a_frozen(W):
    v = gain_term(Game.A, W)
    assert abs(v.value - GAIN_A[W]) <= v.error_bound + 1e-14


def test_gain_c_diverges():
    assert gain_term(Game.C, 1.0).tag is Tag.POS_DIVERGENT
    terms = [2.0**-n * math.log1p(math.exp(2.0**n)) for n in range(7, 10)]
    assert min(terms) > 0.99


def test_cost_term_examples():
    assert cost_term(1.0, 0.0).value == 0.0
    assert cost_term(1.0, 0.5).value == pytest.approx(math.log(2), rel=1e-15)
    assert cost_term(1.0, 1.0).tag is Tag.UNDEFINED
    assert cost_term(1.0, 1 - 1e-12).value > 27


# -- criteria -----------------------------------------------------------------

def test_criterion_i_always_diverges():
    for game in Game:
        v = eval_criterion(I, game, 1.0, 1e6)
        assert v.tag is Tag.POS_DIVERGENT
        assert v.recommendation() is Recommendation.PLAY
    diag = eval_criterion(I, Game.A, 1.0, 3.0).diagnostics
    assert diag["truncated_value"] == 60 / 2 - 3.0
    assert diag["growth_per_toss"] == 0.5


def test_criterion_iii_game_b_examples():
    v = eval_criterion(III, Game.B, 1.0, 0.999)
    assert v.tag is Tag.POS_DIVERGENT and v.recommendation() is Recommendation.PLAY
    v = eval_criterion(III, Game.B, 1.0, 1.5)
    assert v.tag is Tag.UNDEFINED and v.recommendation() is Recommendation.REJECT


def test_criterion_ii_game_b_threshold():
    below = eval_criterion(II, Game.B, 1.0, E2 - 0.001)
    assert below.tag is Tag.POS_DIVERGENT and below.recommendation() is Recommendation.PLAY
    at = eval_criterion(II, Game.B, 1.0, E2)
    assert at.tag is Tag.UNDEFINED and at.recommendation() is Recommendation.REJECT


def test_criterion_ii_game_a_value():
    v = eval_criterion(II, Game.A, 10.0, 1.0)
    assert v.tag is Tag.FINITE
    assert v.recommendation() is Recommendation.PLAY
    assert v.value == pytest.approx(brute_growth_a(10.0, 1.0), abs=1e-13)
    assert abs(v.value - GROWTH_A_W10_P1) <= v.error_bound + 1e-14


def test_criterion_iv_ignores_price():
    base = eval_criterion(IV, Game.A, 1.0, 0.0)
    for P in (0.5, 1.0, 999.0):
        assert eval_criterion(IV, Game.A, 1.0, P) == base


@pytest.mark.parametrize("W", [1.0, 10.0, 100.0])
def test_free_ticket_reduces_ii_iii_iv_to_gain(W):
    for game in Game:
        values = [eval_criterion(c, game, W, 0.0) for c in (II, III, IV)]
        assert len({v.tag for v in values}) == 1
        if values[0].is_finite:
            assert max(v.value for v in values) - min(v.value for v in values) <= 1e-12


@pytest.mark.parametrize("W", [1.0, 10.0, 100.0])
@pytest.mark.parametrize("frac", [0.0, 0.3, 0.7, 0.99])
def test_growth_rate_equals_expected_log_utility_change(W, frac):
    P = frac * (W + 1)
    ii = eval_criterion(II, Game.A, W, P)
    assert abs(ii.value - expected_net_log_utility(Game.A, W, P)) <= 1e-10


@settings(max_examples=60)
@given(
    st.sampled_from([0.5, 1.0, 10.0, 100.0]),
    st.floats(min_value=0, max_value=0.98),
    st.floats(min_value=1e-4, max_value=0.01),
)
def test_monotone_in_price(W, frac, step):
    for crit, limit in ((II, W + 1), (III, W)):
        P1 = frac * limit
        P2 = min(P1 + step * limit, 0.999 * limit)
        v1 = eval_criterion(crit, Game.A, W, P1)
        v2 = eval_criterion(crit, Game.A, W, P2)
        assert v2.value < v1.value


@pytest.mark.parametrize("game", list(Game))
@pytest.mark.parametrize("W", [0.5, 1.0, 7.0])
def test_undefined_iff_ruinous(game, W):
    threshold = W + {Game.A: 1.0, Game.B: W * (E2 - 1), Game.C: E2}[game]
    assert eval_criterion(II, game, W, threshold).tag is Tag.UNDEFINED
    assert eval_criterion(II, game, W, threshold * 1.5).tag is Tag.UNDEFINED
    assert eval_criterion(II, game, W, threshold * (1 - 1e-9)).tag is not Tag.UNDEFINED


def test_truncation_dominance():
    short = eval_criterion(IV, Game.A, 1.0, 0.0, EvalConfig(n_cap=30, tail_tolerance=1e-6))
    full = eval_criterion(IV, Game.A, 1.0, 0.0)
    assert short.value <= full.value <= short.value + short.error_bound


def test_tolerance_not_met_is_an_error():
    with pytest.raises(ToleranceError):
        gain_term(Game.A, 1.0, EvalConfig(n_cap=30))


def test_error2_no_finite_negative_region_for_game_b():
    prices = [k / 1000 for k in range(0, 3000)]
    for P in prices:
        v = eval_criterion(III, Game.B, 1.0, P)
        assert not (v.is_finite and v.value < 0)
        assert (v.recommendation() is Recommendation.REJECT) == (P >= 1.0)


# -- combination and recommendation rules ---------------------------------------

def test_subtraction_rules():
    fin = CriterionValue.finite(2.0, 1e-13)
    pos = CriterionValue.of(Tag.POS_DIVERGENT)
    neg = CriterionValue.of(Tag.NEG_DIVERGENT)
    und = CriterionValue.of(Tag.UNDEFINED)
    assert (pos - fin).tag is Tag.POS_DIVERGENT
    assert (fin - pos).tag is Tag.NEG_DIVERGENT
    assert (fin - neg).tag is Tag.POS_DIVERGENT
    assert (pos - und).tag is Tag.UNDEFINED
    assert (pos - pos).tag is Tag.UNDEFINED
    diff = fin - CriterionValue.finite(0.5, 1e-13)
    assert diff.value == 1.5 and diff.error_bound == 2e-13


def test_indifference_band():
    cfg = EvalConfig()
    assert CriterionValue.finite(5e-12).recommendation(cfg) is Recommendation.INDIFFERENT
    assert CriterionValue.finite(-5e-12).recommendation(cfg) is Recommendation.INDIFFERENT
    assert CriterionValue.finite(2e-11).recommendation(cfg) is Recommendation.PLAY
    assert CriterionValue.finite(-2e-11).recommendation(cfg) is Recommendation.REJECT
    assert CriterionValue.of(Tag.NEG_DIVERGENT).recommendation(cfg) is Recommendation.REJECT


def test_value_dict_round_trip():
    v = eval_criterion(II, Game.A, 10.0, 1.0)
    assert CriterionValue.from_dict(v.to_dict()) == v


def test_config_validation():
    for kwargs in ({"tail_tolerance": 0}, {"n_cap": 61}, {"n_cap": 0}, {"root_tolerance": -1}):
        with pytest.raises(DomainError):
            EvalConfig(**kwargs)


# -- divergence classification ------------------------------------------------

def test_classification():
    assert classify_divergence(Game.A, 1.0) is Convergence.CONVERGENT
    assert classify_divergence(Game.B, 1.0) is Convergence.DIVERGENT
    assert classify_divergence(Game.C, 1.0) is Convergence.DIVERGENT
    for W in (1e-200, 1e200):
        assert classify_divergence(Game.A, W) is Convergence.CONVERGENT
        assert classify_divergence(Game.C, W) is Convergence.DIVERGENT


def test_game_a_terms_obey_geometric_bound():
    for n in range(1, 61):
        assert 2.0**-n * criteria.log_gain_ratio(Game.A, n, 1.0) <= 2.0**-n * n * math.log(2)


def test_broken_payout_model_is_detected(monkeypatch):
    monkeypatch.setattr(criteria, "log_gain_ratio", lambda game, n, W: 2.0**n)
    with pytest.raises(DiagnosticError):
        classify_divergence(Game.A, 1.0)


# -- truncated game ---------------------------------------------------------

def test_truncated_examples():
    v = truncated_criterion_iii(Game.B, 1.0, 0.5, 1)
    assert v.value == pytest.approx(1 - math.log(2), abs=1e-15)
    assert v.recommendation() is Recommendation.PLAY
    v = truncated_criterion_iii(Game.B, 1.0, -math.expm1(-3.0), 3)
    assert abs(v.value) <= 1e-15
    for policy in TruncationPolicy:
        for k in (1, 7, 30):
            assert truncated_criterion_iii(Game.B, 1.0, 0.0, k, policy).value == k


def test_truncated_undefined_at_wealth():
    assert truncated_criterion_iii(Game.B, 1.0, 1.0, 5).tag is Tag.UNDEFINED
    with pytest.raises(DomainError):
        truncated_criterion_iii(Game.B, 1.0, 0.5, 0)


def test_truncated_game_a_approaches_full_criterion():
    full = eval_criterion(III, Game.A, 1.0, 0.3).value
    trunc = truncated_criterion_iii(Game.A, 1.0, 0.3, 60, TruncationPolicy.FORFEIT_TICKET).value
    assert trunc == pytest.approx(full, abs=1e-15)
    assert truncated_criterion_iii(Game.A, 1.0, 0.3, 5).value < full
