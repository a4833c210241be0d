import random
from fractions import Fraction as F

import pytest

from lvpir.audit import FAIL, PASS, audit_exact, audit_sampled
from lvpir.corpus import audit_corpus, planted_groups
from lvpir.errors import TooManyQueriesError
from lvpir.model import CharMatrix
from lvpir.planner import SchemePlan, plan_best, plan_grouping
from lvpir.rng import SplitMix64


@pytest.fixture
def singleton_plan():
    return SchemePlan.partition(3, [[1], [2], [3]])


def test_exact_example1(h1):
    plan, _ = plan_best(h1)
    r = audit_exact(h1, plan)
    assert r.verdict == PASS
    assert [(q.query.to_list(), q.probability) for q in r.per_query] == [([1, 2], F(2, 3)),
                                                                         ([3], F(1, 3))]
    assert all(q.posterior.probs == (F(1, 2), F(1, 2)) for q in r.per_query)
    assert r.max_tv_distance == 0 and r.mutual_information_bits == 0


def test_exact_example3(h3):
    r = audit_exact(h3, plan_best(h3)[0])
    assert r.passed
    assert [q.posterior.probs for q in r.per_query] == [(F(1, 5), F(3, 10), F(1, 2))] * 2


def test_exact_example2_grouping(h2):
    r = audit_exact(h2, plan_grouping(h2)[0])
    assert r.passed and len(r.per_query) == 12
    assert all(q.probability == F(1, 12) for q in r.per_query)


def test_exact_invalid_plan(h1, singleton_plan):
    r = audit_exact(h1, singleton_plan)
    assert r.verdict == FAIL
    post = {tuple(q.query.members): q.posterior.probs for q in r.per_query}
    assert post[(1,)] == (F(1, 10), F(9, 10))
    assert r.max_tv_distance == F(2, 5)
    assert r.mutual_information_bits > 0


def test_exact_catches_non_uniform_sampler(h2):
    # groups with distinct columns mixed together: valid sizes, wrong structure
    bad = SchemePlan.grouping(6, [[1, 2, 5, 6], [3, 4]])
    assert audit_exact(h2, bad).verdict == FAIL


def test_exact_probability_bookkeeping():
    for _, H in audit_corpus(seed=5, per_kind=8):
        for plan in (plan_best(H)[0], plan_grouping(H)[0], SchemePlan.full(H.K)):
            r = audit_exact(H, plan)
            assert sum(q.probability for q in r.per_query) == 1
            assert r.passed


def test_too_many_queries():
    H = CharMatrix(((F(1),) * 12,))
    plan = SchemePlan.grouping(12, [list(range(1, 13))])
    plan2 = SchemePlan.grouping(12, [list(range(1, 7)), list(range(7, 13))])
    assert audit_exact(H, plan).passed  # rho = 12: 12 singleton queries
    with pytest.raises(TooManyQueriesError):
        audit_exact(CharMatrix(((F(1),) * 12,)), plan2, max_enum=10)


def test_sampled_pass_and_fail(h1, singleton_plan):
    good = audit_sampled(h1, plan_best(h1)[0], 100_000, SplitMix64(11), alpha=0.01)
    assert good.verdict == PASS
    bad = audit_sampled(h1, singleton_plan, 100_000, SplitMix64(11), alpha=0.01)
    assert bad.verdict == FAIL
    assert sorted(g.query for g in bad.rejected) == [[1], [2]]


def test_sampled_full_download(h3):
    r = audit_sampled(h3, SchemePlan.full(4), 20_000, SplitMix64(2))
    assert r.passed and len(r.groups) == 1 and r.groups[0].n == 20_000


def test_sampled_worker_invariance(h2):
    plan, _ = plan_grouping(h2)
    a = audit_sampled(h2, plan, 30_000, SplitMix64(4), chunk_size=5000, workers=1)
    b = audit_sampled(h2, plan, 30_000, SplitMix64(4), chunk_size=5000, workers=3)
    assert a == b


def test_sampled_hashed_groups(h2):
    plan, _ = plan_grouping(h2)
    r = audit_sampled(h2, plan, 20_000, SplitMix64(4), max_groups=4)
    assert all(g.key.startswith("h:") and g.query is None for g in r.groups)
    assert len(r.groups) <= 4 and r.passed


def test_sampled_skips_thin_groups(h1):
    r = audit_sampled(h1, plan_best(h1)[0], 6, SplitMix64(0))
    assert not any(g.tested for g in r.groups) and r.passed


def test_zero_prior_cells_are_left_out_of_the_test():
    # s2 has prior 0; chi-square runs on the support only
    H = CharMatrix(((F(1), F(1)), (F(0), F(0))))
    r = audit_sampled(H, SchemePlan.partition(2, [[1], [2]]), 1000, SplitMix64(0))
    assert r.passed and all(g.counts[1] == 0 for g in r.groups)


def test_agreement_exact_pass_implies_few_rejections():
    rnd = random.Random(21)
    for i in range(6):
        H = planted_groups(rnd, rnd.randint(2, 6), 3)
        plan, _ = plan_best(H)
        assert audit_exact(H, plan).passed
        r = audit_sampled(H, plan, 20_000, SplitMix64(100 + i), alpha=0.01)
        tested = sum(g.tested for g in r.groups)
        assert len(r.rejected) <= max(1, 0.01 * tested)
