#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cfspec/oracle.hpp"
#include "cfspec/spectra.hpp"
#include "test_util.hpp"

using namespace cfspec;

static double approx(const QuadSurd& x) { return x.to_double(); }

TEST_CASE("best_in_range golden hand check") {
    // q in [3, 4], pairs exclusion: convergent pair (2,3) excluded, best is
    // the doubled convergent (2, 4)
    QuadSurd phi(1, 1, 2, 5);
    auto rec = best_in_range(phi, 3, 4, Exclusion::pairs);
    CHECK(rec.q == 4);
    CHECK(rec.p == 6);  // 2 * p_2 / 2 * q_2 of [1;(1)] ... floor(4 phi) = 6
    CHECK(rec.quality_lo < rec.quality_hi);
}

TEST_CASE("rational target rejected") {
    CHECK_THROWS_AS(best_in_range(QuadSurd(7, 0, 5, 0), 1, 100, Exclusion::pairs),
                    domain_error);
}

TEST_CASE("oracle matches k2 for golden ratio") {
    auto est = estimate_k2(CFExpansion::parse("[1; (1)]"), 1000000, Exclusion::pairs);
    double target = approx(k2_periodic(CFExpansion::parse("[1; (1)]")).exact);
    CHECK(est.estimate_lo.get_d() > target - 1e-4);
    CHECK(est.estimate_hi.get_d() < target + 1e-4);
}

TEST_CASE("oracle matches k2star for golden ratio") {
    auto est = estimate_k2(CFExpansion::parse("[0; (1)]"), 1000000, Exclusion::fractions);
    CHECK(est.estimate_lo.get_d() > approx(QuadSurd(0, 1, 5, 5)) - 1e-4);
    CHECK(est.estimate_hi.get_d() < approx(QuadSurd(0, 1, 5, 5)) + 1e-4);
}

TEST_CASE("oracle with automatic window base on [2;(1,1,3)]") {
    auto cf = CFExpansion::parse("[2; (1,1,3)]");
    auto est = estimate_k2(cf, 1000000, Exclusion::pairs, 0);
    double target = approx(QuadSurd(0, 1, 4, 17));
    CHECK(est.estimate_lo.get_d() > target - 1e-4);
    CHECK(est.estimate_hi.get_d() < target + 1e-4);
}

TEST_CASE("classification of best window records") {
    auto cf = CFExpansion::parse("[2; (1,1,3)]");
    detail::ApproxSearcher s(cf_value(cf), 100000);
    const auto& convs = s.convergents();
    int classified = 0;
    for (std::size_t k = 1; k + 1 < convs.size() && convs[k + 1].q <= 100000; ++k) {
        if (convs[k + 1].q - 1 < convs[k].q) continue;
        auto rec = s.best_in_range(convs[k].q, convs[k + 1].q - 1, Exclusion::pairs);
        if (!rec) continue;  // every candidate excluded in a tiny window
        rec->label = classify_record(*rec, convs);
        CHECK(rec->label != CaseLabel::other);
        ++classified;
    }
    CHECK(classified > 5);
}

TEST_CASE("exclusion consistency: fraction best never beats pair best") {
    std::mt19937_64 rng(246810);
    for (int i = 0; i < 10; ++i) {
        auto cf = testutil::random_periodic(rng, 4, 9);
        detail::ApproxSearcher s(cf_value(cf), 20000);
        auto pairs = s.best_in_range(10000, 20000, Exclusion::pairs);
        auto fracs = s.best_in_range(10000, 20000, Exclusion::fractions);
        REQUIRE(pairs.has_value());
        REQUIRE(fracs.has_value());
        CHECK(fracs->quality_lo <= pairs->quality_hi);
    }
}

TEST_CASE("legendre bound under fraction exclusion") {
    std::mt19937_64 rng(135791);
    for (int i = 0; i < 10; ++i) {
        auto cf = testutil::random_periodic(rng, 5, 12);
        detail::ApproxSearcher s(cf_value(cf), 50000);
        auto rec = s.best_in_range(25000, 50000, Exclusion::fractions);
        REQUIRE(rec.has_value());
        CHECK(rec->quality_hi < mpq_class(2) + mpq_class(1, 1000));
    }
}

TEST_CASE("window convergence for a quadratic target") {
    auto est = estimate_k2(CFExpansion::parse("[1; (1)]"), 100000, Exclusion::pairs);
    REQUIRE(est.windows.size() >= 3);
    auto val = [](const WindowRecord& w) { return w.best->quality_lo.get_d(); };
    std::size_t n = est.windows.size();
    double a = val(est.windows[n - 3]), b = val(est.windows[n - 2]), c = val(est.windows[n - 1]);
    CHECK(std::abs(a - c) < 1e-3);
    CHECK(std::abs(b - c) < 1e-3);
}

TEST_CASE("q_max floor enforced") {
    CHECK_THROWS_AS(estimate_k2(CFExpansion::parse("[1; (1)]"), 100, Exclusion::pairs),
                    domain_error);
}
