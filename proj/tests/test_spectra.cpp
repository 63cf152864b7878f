#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cfspec/spectra.hpp"
#include "test_util.hpp"

using namespace cfspec;

static LocalData local17() {
    return LocalData(QuadSurd(3, 1, 2, 17), QuadSurd(-3, 1, 2, 17), 3);
}
static LocalData local_golden() {
    return LocalData(QuadSurd(1, 1, 2, 5), QuadSurd(-1, 1, 2, 5), 1);
}
static LocalData local_sqrt2() {
    return LocalData(QuadSurd(1, 1, 1, 2), QuadSurd(-1, 1, 1, 2), 2);
}

TEST_CASE("kappa branch values") {
    auto ld = local17();
    CHECK(kappa1(ld) == QuadSurd(0, 1, 4, 17));
    CHECK(kappa2(ld) == QuadSurd(0, 1, 4, 17));
    CHECK(kappa4(ld) == QuadSurd(0, 1, 4, 17));
    CHECK(kappa3(ld) == QuadSurd(0, 1, 8, 17));

    auto g = local_golden();
    CHECK(kappa4(g) == QuadSurd(0, 1, 4, 5));
    CHECK(kappa3(g) == QuadSurd(0, 1, 5, 5));
    CHECK_THROWS_AS(kappa1(g), domain_error);
    CHECK_THROWS_AS(kappa2(g), domain_error);

    auto s = local_sqrt2();
    CHECK(kappa1(s) == QuadSurd::sqrt_of(2));
    CHECK(kappa2(s) == QuadSurd::sqrt_of(2));
    CHECK(kappa4(s) == QuadSurd(0, 1, 2, 2));
}

TEST_CASE("delta, gamma, moshchevitin kappa") {
    auto g = local_golden();
    CHECK(delta_at(g).exact == QuadSurd(0, 1, 4, 5));
    CHECK(delta_at(g).branch == Branch::quarter);
    CHECK(gamma_at(g).exact == QuadSurd(0, 1, 5, 5));
    CHECK(kappa_moshchevitin_at(g).exact == QuadSurd(0, 1, 5, 5));
    CHECK(kappa_moshchevitin_at(g).branch == Branch::mosh_a1);

    auto s = local_sqrt2();
    CHECK(delta_at(s).exact == QuadSurd::sqrt_of(2));
    CHECK(delta_at(s).branch == Branch::kappa1);
    CHECK(gamma_at(s).exact == QuadSurd::sqrt_of(2));
    CHECK(kappa_moshchevitin_at(s).exact == QuadSurd::sqrt_of(2));

    auto l = local17();
    CHECK(delta_at(l).exact == QuadSurd(0, 1, 4, 17));
    CHECK(delta_at(l).branch == Branch::quarter);  // tie resolves to quarter
    CHECK(gamma_at(l).exact == QuadSurd(0, 1, 4, 17));
    CHECK(kappa_moshchevitin_at(l).exact == QuadSurd(0, 1, 4, 17));
}

TEST_CASE("golden spectrum values") {
    CHECK(k2_periodic(CFExpansion::parse("[1; (1)]")).exact == QuadSurd(0, 1, 4, 5));
    CHECK(k2_periodic(CFExpansion::parse("[2; (1,1,3)]")).exact == QuadSurd(0, 1, 4, 17));
    CHECK(k2_periodic(CFExpansion::parse("[2; (1,1,1,1,3,1,1,3)]")).exact ==
          QuadSurd(0, 13, 164, 173));
    CHECK(k2star_periodic(CFExpansion::parse("[0; (1)]")).exact == QuadSurd(0, 1, 5, 5));
    CHECK(k2star_periodic(CFExpansion::parse("[0; (1,1,1,1,21)]")).exact ==
          QuadSurd(0, 1, 33, 493));
    CHECK(k2star_periodic(CFExpansion::parse("[0; (1,1,145)]")).exact ==
          QuadSurd(0, 1, 217, 21317));
    CHECK(k_classical_periodic(CFExpansion::parse("[0; (1)]")).exact == QuadSurd::sqrt_of(5));
    CHECK(k_classical_periodic(CFExpansion::parse("[1; (2)]")).exact == QuadSurd(0, 2, 1, 2));
    CHECK(k_classical_periodic(CFExpansion::parse("[2; (1,1,3)]")).exact ==
          QuadSurd::sqrt_of(17));
}

TEST_CASE("spectrum of a rational is rejected") {
    CHECK_THROWS_AS(k2_periodic(CFExpansion::parse("[1; 2, 2]")), domain_error);
}

TEST_CASE("discrete part") {
    auto entries = discrete_part(10);
    REQUIRE(entries.size() == 8);
    CHECK(entries[0].n == 3);
    CHECK(entries[0].lambda == QuadSurd(0, 13, 164, 173));
    CHECK(entries[0].xi.str() == "[0; (1, 1, 1, 1, 3, 1, 1, 3)]");
    // strictly increasing, all below the accumulation point
    for (std::size_t i = 1; i < entries.size(); ++i)
        CHECK(entries[i].lambda.compare(entries[i - 1].lambda) > 0);
    for (const auto& e : entries) CHECK(e.lambda.compare(lambda_infinity()) < 0);
    // lambda_10 approaches lambda_infinity
    BigFloat a(256), b(256);
    lambda_infinity().eval(a.get(), MPFR_RNDN);
    entries.back().lambda.eval(b.get(), MPFR_RNDN);
    mpfr_sub(a.get(), a.get(), b.get(), MPFR_RNDN);
    double gap = a.to_double();
    CHECK(gap > 0);
    CHECK(gap < 1e-4);
    // xi_n's own k2 matches the lambda_n formula
    for (const auto& e : entries) CHECK(k2_periodic(e.xi).exact == e.lambda);
    CHECK(discrete_part(2).empty());
}

TEST_CASE("shift identity for digit 1") {
    std::mt19937_64 rng(444555);
    int done = 0;
    while (done < 1000) {
        auto cf = testutil::random_periodic(rng, 6, 8);
        std::size_t ps = cf.period_start();
        for (std::size_t j = 0; j < cf.period_length() && done < 1000; ++j) {
            // want a_n = 1 at position n = ps+j, with alpha_{n+1}, beta_{n+1}
            if (cf.digit(ps + j) != 1) continue;
            QuadSurd a1 = tail_alpha(cf, ps + j + 1);
            QuadSurd b1 = limit_beta(cf, ps + j + 1);
            QuadSurd one = QuadSurd::from_int(1), two = QuadSurd::from_int(2);
            QuadSurd an = one + a1.inverse();
            QuadSurd bn = b1.inverse() - one;
            QuadSurd lhs = (an + bn) / ((two * an - one) * (two * bn + one));
            QuadSurd rhs = (a1 + b1) / ((two - b1) * (a1 + two));
            CHECK(lhs == rhs);
            ++done;
        }
    }
}

TEST_CASE("gamma and moshchevitin kappa have equal period maxima") {
    std::mt19937_64 rng(777888);
    for (int i = 0; i < 500; ++i) {
        auto cf = testutil::random_periodic(rng, 9, 30, /*allow_all_ones=*/false);
        auto g = k2star_periodic(cf);
        auto m = detail::periodic_max(
            cf, [](const LocalData& ld) { return kappa_moshchevitin_at(ld); });
        CHECK(g.exact == m.exact);
    }
}

TEST_CASE("threshold and bound lemmas") {
    std::mt19937_64 rng(999000);
    for (int i = 0; i < 300; ++i) {
        auto cf = testutil::random_periodic(rng, 7, 25);
        auto v = k2_periodic(cf);
        if (v.exact.compare(mpq_class(2)) >= 0) CHECK(v.branch == Branch::quarter);
        std::size_t ps = cf.period_start();
        for (std::size_t j = 0; j < cf.period_length(); ++j) {
            LocalData ld = detail::local_at(cf, ps + j);
            if (ld.a >= 2) {
                CHECK(kappa1(ld).compare(mpq_class(2)) < 0);
                CHECK(kappa2(ld).compare(mpq_class(2)) < 0);
            }
        }
        // second spectrum of the fraction-exclusion kind never exceeds 2
        CHECK(k2star_periodic(cf).exact.compare(mpq_class(2)) <= 0);
    }
}

TEST_CASE("structure check near 2/3") {
    auto a = structure_check_near_two_thirds(CFExpansion::parse("[0; (1,1,145)]"));
    CHECK(a.applicable);
    CHECK(a.block_structure);
    REQUIRE(a.xs.size() == 1);
    CHECK(a.xs[0] == 145);

    auto b = structure_check_near_two_thirds(CFExpansion::parse("[0; (1,1,1,1,21)]"));
    CHECK_FALSE(b.applicable);  // value is the excluded right endpoint

    auto c = structure_check_near_two_thirds(CFExpansion::parse("[0; (1)]"));
    CHECK_FALSE(c.applicable);

    auto d = structure_check_near_two_thirds(CFExpansion::parse("[0; (1,1,163,1,1,200)]"));
    CHECK(d.applicable);
    CHECK(d.block_structure);
    CHECK(d.xs.size() == 2);
}
