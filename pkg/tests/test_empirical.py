import pytest

from samplerlang import measures as M
from samplerlang.corpus import load_corpus
from samplerlang.empirical import (
    DegeneratePrefixError,
    empirical_measure,
    k_equidistribution_test,
    visit_count,
    weak_convergence_test,
)
from samplerlang.interpreter import Interpreter
from samplerlang.parser import parse_measure, parse_program, parse_term
from samplerlang.quadrature import build_family
from samplerlang.terms import Var, self_product


@pytest.fixture(scope="module")
def corpus():
    return {it.name: it for it in load_corpus()}


def test_unweighted_alternating_prefix(corpus):
    it = Interpreter(corpus["alternating"].program)
    em = empirical_measure(it.stream(), 4)
    assert {v: w for v, w in em.atoms} == {0: 0.5, 1: 0.5}


def test_equal_weight_pairs():
    em = empirical_measure([(0.0, 2.0), (1.0, 2.0)], 2)
    assert {v: w for v, w in em.atoms} == {0.0: 0.5, 1.0: 0.5}


def test_zero_weight_pairs_drop_from_support(corpus):
    # in the reweighted pair stream the equal pairs carry weight zero and
    # vanish from the normalized support
    it = Interpreter(corpus["von_neumann"].program)
    inner = parse_term(
        "reweight(fun b : B * B => if (fst(b) and snd(b)) or (not fst(b) and not snd(b))"
        " then 0 else 1, flip^2)",
        {"flip"},
    )
    em = empirical_measure(it.stream(inner), 200)
    support = {v for v, w in em.atoms if w > 0}
    assert support <= {(True, False), (False, True)}
    assert abs(em.total_mass() - 1.0) <= 1e-12


def test_degenerate_prefix_raises():
    entries = [(1.0, 0.0)] * 5
    with pytest.raises(DegeneratePrefixError):
        empirical_measure(entries, 5)


def test_total_mass_one(corpus):
    for item in corpus.values():
        it = Interpreter(item.program)
        try:
            em = empirical_measure(it.stream(), 100)
        except DegeneratePrefixError:
            continue
        assert abs(em.total_mass() - 1.0) <= 1e-12


def test_prefix_consistency(corpus):
    it = Interpreter(corpus["geometric"].program)
    stream = it.stream()
    em1 = empirical_measure(stream, 10)
    _ = empirical_measure(stream, 50)
    em2 = empirical_measure(stream, 10)
    assert em1.atoms == em2.atoms


def test_map_commutes_with_empirical(corpus):
    # the empirical measure of map(f, s) is the pushforward of the empirical
    # measure of s, atom by atom, with weights unchanged
    it = Interpreter(corpus["geometric"].program)
    mapped = it.stream(
        parse_term("map(fun x : R => x * 2 + 1, prng(fun x : R => x/2, 1))")
    )
    base = it.stream(parse_term("prng(fun x : R => x/2, 1)"))
    n = 40
    em_mapped = empirical_measure(mapped, n)
    em_base = empirical_measure(base, n)
    pushed = {2 * v + 1: w for v, w in em_base.atoms}
    assert {v: w for v, w in em_mapped.atoms} == pushed


def test_geometric_bound_exact(corpus):
    # |int g dsigma_n - g(0)| <= 2/n for every 1-Lipschitz bound-1 member
    it = Interpreter(corpus["geometric"].program)
    stream = it.stream()
    family = build_family(M.Dirac(0.0)).lipschitz_bounded(1.0, 1.0)
    assert family
    for n in (1, 10, 100, 1000, 10000):
        em = empirical_measure(stream, n)
        for member in family:
            d = abs(em.integrate(member) - member(0.0))
            assert d <= 2.0 / n, (n, member.name, d)


def test_weak_convergence_alternating(corpus):
    it = Interpreter(corpus["alternating"].program)
    report = weak_convergence_test(
        it.stream(), parse_measure("bernoulli(0.5)"), (100, 1000, 10000)
    )
    assert report.passed


def test_weak_convergence_thinned(corpus):
    it = Interpreter(corpus["thinned_alternating"].program)
    ok = weak_convergence_test(it.stream(), parse_measure("dirac(0)"), (100, 1000))
    bad = weak_convergence_test(
        it.stream(), parse_measure("bernoulli(0.5)"), (100, 1000)
    )
    assert ok.passed and not bad.passed
    assert "discrepancy" in bad.reason


def test_k2_failure_is_dirac_witness(corpus):
    prog = corpus["alternating"].program
    it = Interpreter(prog)
    report = k_equidistribution_test(
        prog.body, parse_measure("bernoulli(0.5)"), 2, it, n=2000
    )
    assert not report.passed
    em = empirical_measure(it.stream(self_product(prog.body, 2)), 500)
    assert em.atoms == [((0, 1), 1.0)]


def test_k1_alternating_passes(corpus):
    prog = corpus["alternating"].program
    it = Interpreter(prog)
    report = k_equidistribution_test(
        prog.body, parse_measure("bernoulli(0.5)"), 1, it, n=2000
    )
    assert report.passed


@pytest.mark.slow
def test_lcg_pair_equidistribution_evidence():
    # statistical evidence for the documented generator's 2-equidistribution
    # assumption; this is evidence for an axiom, not a proof
    prog = parse_program(
        "extern sampler rand : S R+ targets uniform(0, 1) equidistributed 2\nrand"
    )
    it = Interpreter(prog)
    report = k_equidistribution_test(
        Var("rand"), parse_measure("uniform(0, 1)"), 2, it, n=100000, tol=0.02
    )
    assert report.passed, report.reason


def test_visit_counts(corpus):
    alt = Interpreter(corpus["alternating"].program)
    assert visit_count(alt.stream(), lambda v: v == 0, 100) == 50
    geo = Interpreter(corpus["geometric"].program)
    assert visit_count(geo.stream(), lambda v: v == 0, 1000) == 0
    rej = Interpreter(corpus["rejection"].program)
    counts = [visit_count(rej.stream(), lambda v: True, n) for n in (100, 1000, 10000)]
    # accepted proposals (positive weight) keep arriving
    assert counts[0] > 0 and counts[0] < counts[1] < counts[2]


def test_report_json_shape(corpus):
    it = Interpreter(corpus["alternating"].program)
    report = weak_convergence_test(
        it.stream(), parse_measure("bernoulli(0.5)"), (100, 1000)
    )
    data = report.to_json()
    assert data["passed"] is True
    assert [pt["n"] for pt in data["ladder"]] == [100, 1000]
    assert all("worst" in pt and "tol" in pt for pt in data["ladder"])
