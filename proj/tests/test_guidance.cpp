#include "fixtures.hpp"

#include "cfguide/errors.hpp"
#include "cfguide/guidance.hpp"
#include "cfguide/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cfguide;
using fixtures::make_dataset;

namespace {

double naive_dissimilarity(const NormalizedView& v, const IndexSet& a, const IndexSet& b,
                           const std::vector<std::size_t>& cols) {
    double total = 0.0;
    for (auto i : a) {
        for (auto j : b) {
            double s = 0.0;
            for (auto c : cols) s += (v.at(i, c) - v.at(j, c)) * (v.at(i, c) - v.at(j, c));
            total += 1.0 - std::exp(-std::sqrt(s));
        }
    }
    return total / static_cast<double>(a.size() * b.size());
}

double pearson_with_indicator(const Dataset& d, const IndexSet& in, const IndexSet& ex) {
    std::vector<double> g, y;
    for (auto i : in) g.push_back(1.0), y.push_back(d.at(i, d.outcome_index()));
    for (auto i : ex) g.push_back(0.0), y.push_back(d.at(i, d.outcome_index()));
    const double n = static_cast<double>(g.size());
    double mg = 0, my = 0;
    for (std::size_t i = 0; i < g.size(); ++i) mg += g[i] / n, my += y[i] / n;
    double sgy = 0, sgg = 0, syy = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sgy += (g[i] - mg) * (y[i] - my);
        sgg += (g[i] - mg) * (g[i] - mg);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sgy / std::sqrt(sgg * syy);
}

}  // namespace

TEST_CASE("similarity") {
    CHECK(similarity(0.0) == 1.0);
    CHECK(similarity(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(similarity(5.0) == doctest::Approx(0.006737946999085467).epsilon(1e-12));
    CHECK_THROWS_AS(similarity(-1.0), DomainError);
    CHECK_THROWS_AS(similarity(std::nan("")), DomainError);
}

TEST_CASE("subset dissimilarity by hand") {
    const double ln2 = std::log(2.0);
    const auto d = make_dataset({"a", "y"}, {{0.0, ln2, 1.0}, {0, 0, 0}}, "y");
    const NormalizedView v(d);
    const GuidanceSpace space{{"a"}};
    CHECK(subset_dissimilarity(v, {0}, {0}, space) == 0.0);
    CHECK(subset_dissimilarity(v, {0}, {1}, space) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(subset_dissimilarity(v, {0, 1}, {1}, space) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(subset_dissimilarity(v, {}, {1}, space), DegeneratePartition);
}

TEST_CASE("subset dissimilarity matches a double loop and is symmetric") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = fixtures::random_dataset(seed, 60 + seed * 20, 2 + seed % 8);
        const NormalizedView v(d);
        std::mt19937_64 rng(seed);
        IndexSet a, b;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            const auto r = rng() % 3;
            if (r == 0) a.push_back(i);
            else if (r == 1) b.push_back(i);
        }
        GuidanceSpace space;
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < d.cols(); c += 2) {
            space.variables.push_back(d.columns()[c].name);
            cols.push_back(c);
        }
        const double ab = subset_dissimilarity(v, a, b, space);
        CHECK(ab == doctest::Approx(naive_dissimilarity(v, a, b, cols)).epsilon(1e-12));
        CHECK(ab == doctest::Approx(subset_dissimilarity(v, b, a, space)).epsilon(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("counterfactual guidance formula") {
    CHECK(cf_guidance(0.0, 0.9) == 0.0);
    CHECK(cf_guidance(1.0, 1.0) == 1.0);
    CHECK(cf_guidance(0.5, 0.08) == doctest::Approx(0.35).epsilon(1e-14));
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        CHECK(std::fabs(cf_guidance(x, x) - x) <= 1e-12);
        CHECK(std::fabs(cf_guidance(x, 0.0) - x / 2) <= 1e-12);
        for (int j = 0; j <= 100; j += 10) {
            const double g = cf_guidance(x, j / 100.0);
            CHECK(g >= 0.0);
            CHECK(g <= 1.0);
        }
    }
    CHECK_THROWS_AS(cf_guidance(-0.1, 0.5), DomainError);
    CHECK_THROWS_AS(cf_guidance(0.5, 1.5), DomainError);
}

TEST_CASE("correlation guidance") {
    SUBCASE("identical outcomes carry no association") {
        const auto d = make_dataset({"a", "y"}, {{1, 1, 0, 0}, {3, 3, 3, 3}}, "y");
        const auto c = corr_guidance(d, {0, 1}, {2, 3});
        CHECK(c.value == 0.0);
        CHECK(c.degenerate);
    }
    SUBCASE("two constant levels correlate perfectly") {
        const auto d = make_dataset({"a", "y"}, {{1, 1, 1, 0, 0}, {7, 7, 7, 2, 2}}, "y");
        CHECK(corr_guidance(d, {0, 1, 2}, {3, 4}).value == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("independent noise stays small") {
        std::mt19937_64 rng(42);
        std::normal_distribution<double> normal;
        std::vector<double> a(1000), y(1000);
        IndexSet in, ex;
        for (std::size_t i = 0; i < 1000; ++i) {
            a[i] = normal(rng);
            y[i] = normal(rng);
            (a[i] > 0.67 ? in : ex).push_back(i);
        }
        const auto d = make_dataset({"a", "y"}, {a, y}, "y");
        CHECK(corr_guidance(d, in, ex).value < 0.1);
    }
    SUBCASE("agrees with Pearson on an indicator") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto d = fixtures::random_dataset(seed, 200, 3);
            const auto split = apply_filters(d, FilterSet{{"v0", fixtures::upper_tail(d, "v0", 0.6)}});
            CHECK(corr_guidance(d, split.in_idx, split.ex_idx).value ==
                  doctest::Approx(std::fabs(pearson_with_indicator(d, split.in_idx, split.ex_idx)))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("distribution score") {
    CHECK(distribution_score(10, 10) == 1.0);
    CHECK(distribution_score(7, 0) == 0.0);
    CHECK(distribution_score(0, 7) == 0.0);
    CHECK(std::fabs(distribution_score(30, 10) - 0.5) <= 1e-12);
    CHECK(distribution_score(19, 1) == 0.1);
    CHECK(distribution_score(5, 9) == distribution_score(9, 5));
    CHECK_THROWS_AS(distribution_score(0, 0), DegeneratePartition);
}

TEST_CASE("validity flips at a distribution score of 0.1") {
    // 3|IN| > N, so CF is half of EX: (19, 1) scores 0.1, (20, 1) below it.
    const auto build = [](int n_in) {
        std::vector<double> a, z, y;
        for (int i = 0; i < n_in + 2; ++i) {
            a.push_back(i < n_in ? 1.0 : 0.0);
            z.push_back(i);
            y.push_back(i % 3);
        }
        return make_dataset({"a", "z", "y"}, {a, z, y}, "y");
    };
    const FilterSet f{{"a", {1, 1}}};
    const auto at = build(19);
    const auto rep = guidance_report(NormalizedView(at), f, GuidanceMode::cf);
    CHECK(rep.distribution_in_cf == 0.1);
    CHECK(rep.valid_cf);
    const auto below = build(20);
    const auto rep2 = guidance_report(NormalizedView(below), f, GuidanceMode::cf);
    CHECK(rep2.distribution_in_cf < 0.1);
    CHECK_FALSE(rep2.valid_cf);
}

TEST_CASE("report contents per mode") {
    const auto d = fixtures::random_dataset(8, 300, 5);
    const NormalizedView v(d);
    const FilterSet f{{"v1", fixtures::upper_tail(d, "v1", 0.75)}};
    const auto cf = guidance_report(v, f, GuidanceMode::cf);
    CHECK(cf.guidance_cf.has_value());
    CHECK_FALSE(cf.guidance_corr.has_value());
    const auto corr = guidance_report(v, f, GuidanceMode::corr);
    CHECK_FALSE(corr.guidance_cf.has_value());
    CHECK(corr.guidance_corr.has_value());
    CHECK(corr.sizes == cf.sizes);
    const auto both = guidance_report(v, f, GuidanceMode::both);
    CHECK(*both.guidance_cf == *cf.guidance_cf);
    CHECK(*both.guidance_corr == *corr.guidance_corr);
    CHECK(cf.sizes.in + cf.sizes.cf + cf.sizes.rem == d.rows());
    for (double s : {*both.d_in_cf, *both.d_in_rem, *both.guidance_cf, *both.guidance_corr,
                     both.distribution_in_cf, both.distribution_in_ex}) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK_THROWS_AS(guidance_report(v, FilterSet{{"v1", {100, 200}}}, GuidanceMode::cf),
                    DegeneratePartition);
}

TEST_CASE("low confidence below five IN rows") {
    const auto d = fixtures::random_dataset(4, 100, 3);
    const auto hi = fixtures::upper_tail(d, "v0", 0.97);
    const auto rep = guidance_report(NormalizedView(d), FilterSet{{"v0", hi}}, GuidanceMode::both);
    CHECK(rep.sizes.in < 5);
    CHECK(rep.low_confidence);
}

TEST_CASE("archetype ordering") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CAPTURE(seed);
        std::map<int, GuidanceReport> rep;
        for (int c = 1; c <= 5; ++c) {
            const auto a = fixtures::make_archetype(c, seed);
            rep[c] = guidance_report(NormalizedView(a.data), a.filter, GuidanceMode::both);
        }
        const auto g = [&](int c) { return *rep[c].guidance_cf; };
        const auto r = [&](int c) { return *rep[c].guidance_corr; };
        CHECK(g(1) < g(3));
        CHECK(g(1) < g(4));
        CHECK(g(2) < g(4));
        CHECK(r(2) > r(1));
        // all alike: both scores near zero
        CHECK(r(1) < 0.1);
        // only REM shifted: cf stays low while correlation picks it up
        CHECK(g(2) < g(4) / 2);
        CHECK(r(2) > 2 * r(1));
        // IN shifted from both: both scores high
        CHECK(r(4) > 0.5);
        CHECK(g(4) > g(2));
    }
}

TEST_CASE("variable ranking") {
    const auto d = fixtures::random_dataset(12, 400, 14);
    const NormalizedView v(d);
    SUBCASE("one entry per filterable variable") {
        const auto r = rank_variables(v, {}, GuidanceMode::cf);
        CHECK(r.entries.size() == 13);
        for (std::size_t i = 1; i < r.entries.size(); ++i) {
            const auto& p = r.entries[i - 1];
            const auto& q = r.entries[i];
            CHECK((p.score > q.score || (p.score == q.score && p.variable < q.variable)));
        }
    }
    SUBCASE("applied variables are excluded") {
        const FilterSet f{{"v3", *d.column("v3").default_range}};
        const auto r = rank_variables(v, f, GuidanceMode::corr);
        CHECK(r.entries.size() == 12);
        for (const auto& e : r.entries) CHECK(e.variable != "v3");
    }
    SUBCASE("scores equal standalone reports") {
        const auto r = rank_variables(v, {}, GuidanceMode::corr);
        for (const auto& e : r.entries) {
            const FilterSet f{{e.variable, *d.column(e.variable).default_range}};
            CHECK(e.score == *guidance_report(v, f, GuidanceMode::corr).guidance_corr);
        }
    }
    SUBCASE("thread count does not change the result") {
        const int before = kernels::thread_count();
        kernels::set_thread_count(1);
        const auto one = rank_variables(v, {}, GuidanceMode::cf);
        kernels::set_thread_count(3);
        CHECK(rank_variables(v, {}, GuidanceMode::cf) == one);
        kernels::set_thread_count(before);
    }
    SUBCASE("a candidate that empties IN is marked degenerate") {
        const FilterSet f{{"v0", {1e6, 2e6}}};
        const auto r = rank_variables(v, f, GuidanceMode::cf);
        for (const auto& e : r.entries) {
            CHECK(e.degenerate);
            CHECK(e.score == 0.0);
        }
    }
    SUBCASE("mode both is rejected") {
        CHECK_THROWS_AS(rank_variables(v, {}, GuidanceMode::both), ValidationError);
    }
}

TEST_CASE("guidance mode names") {
    CHECK(parse_guidance_mode("cf") == GuidanceMode::cf);
    CHECK(parse_guidance_mode("corr") == GuidanceMode::corr);
    CHECK(parse_guidance_mode("both") == GuidanceMode::both);
    CHECK_THROWS_AS(parse_guidance_mode("xyz"), ValidationError);
    CHECK(to_string(GuidanceMode::corr) == "corr");
}
