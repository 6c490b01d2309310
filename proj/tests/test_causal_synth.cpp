#include "cfguide/causal_synth.hpp"
#include "cfguide/errors.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cfguide;

namespace {

CausalGraphSpec chain_spec() {
    CausalGraphSpec s;
    s.nodes = {{"A"}, {"B"}, {"Y", true}};
    s.edges = {{"A", "B", 0.5}, {"B", "Y", 0.7}};
    s.seed = 3;
    return s;
}

Eigen::VectorXd column(const Dataset& d, const std::string& name) {
    const auto v = d.column_values(d.column_index(name));
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Least squares with an intercept; returns the slopes only.
Eigen::VectorXd ols(const Dataset& d, const std::vector<std::string>& xs, const std::string& y) {
    const auto n = static_cast<Eigen::Index>(d.rows());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(xs.size()) + 1);
    X.col(0).setOnes();
    for (std::size_t j = 0; j < xs.size(); ++j) X.col(static_cast<Eigen::Index>(j) + 1) = column(d, xs[j]);
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(column(d, y));
    return beta.tail(static_cast<Eigen::Index>(xs.size()));
}

Eigen::VectorXd residual(const Dataset& d, const std::string& target, const std::vector<std::string>& given) {
    const auto n = static_cast<Eigen::Index>(d.rows());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(given.size()) + 1);
    X.col(0).setOnes();
    for (std::size_t j = 0; j < given.size(); ++j)
        X.col(static_cast<Eigen::Index>(j) + 1) = column(d, given[j]);
    const Eigen::VectorXd t = column(d, target);
    return t - X * X.colPivHouseholderQr().solve(t);
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("graph validation") {
    SUBCASE("a chain is fine") { CHECK(validate_graph(chain_spec()).empty()); }
    SUBCASE("two-cycle") {
        auto s = chain_spec();
        s.edges.push_back({"B", "A", 0.2});
        CHECK_THROWS_AS(require_valid(s), CycleError);
        const auto issues = validate_graph(s);
        REQUIRE_FALSE(issues.empty());
        CHECK(issues.front().kind == GraphIssueKind::cycle);
        CHECK(issues.front().message.find("A") != std::string::npos);
    }
    SUBCASE("undeclared endpoint") {
        auto s = chain_spec();
        s.edges.push_back({"Z", "Y", 0.1});
        CHECK_THROWS_AS(require_valid(s), RefError);
    }
    SUBCASE("structural problems") {
        auto s = chain_spec();
        s.nodes[0].outcome = true;
        CHECK_THROWS_AS(require_valid(s), ValidationError);
        s = chain_spec();
        s.edges.push_back({"Y", "A", 0.3});
        CHECK_FALSE(validate_graph(s).empty());
        s = chain_spec();
        s.noise_scale = 0;
        CHECK_THROWS_AS(require_valid(s), ValidationError);
        s = chain_spec();
        s.edges.push_back({"A", "Y", 0.7});  // ties the strength of B -> Y
        CHECK_THROWS_AS(require_valid(s), ValidationError);
    }
    SUBCASE("topological order") {
        const auto order = topological_order(chain_spec());
        CHECK(order == std::vector<std::string>{"A", "B", "Y"});
    }
}

TEST_CASE("spec documents round trip") {
    const auto s = default_study_spec();
    const auto back = CausalGraphSpec::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
    CHECK_THROWS(CausalGraphSpec::from_json("{not json"));
}

TEST_CASE("single edge coefficient is recovered") {
    CausalGraphSpec s;
    s.nodes = {{"A"}, {"Y", true}};
    s.edges = {{"A", "Y", 0.8}};
    s.seed = 11;
    const auto data = generate(s, 10000);
    const double standardized = ols(data.dataset, {"A"}, "Y")(0);
    CHECK(standardized == doctest::Approx(0.8 / std::sqrt(1.64)).epsilon(0.05));
    // back on the outcome's structural scale
    const double raw = standardized * data.raw_scale.at("Y");
    CHECK(raw >= 0.75);
    CHECK(raw <= 0.85);
}

TEST_CASE("generated columns are standardized and finite") {
    const auto data = generate(default_study_spec(), 2000);
    for (std::size_t c = 0; c < data.dataset.cols(); ++c) {
        const auto v = data.dataset.column_values(c);
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        CHECK(std::fabs(mean) < 1e-12);
        CHECK(std::sqrt(ss / static_cast<double>(v.size())) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("degenerate sizes") {
    const auto one = generate(chain_spec(), 1);
    CHECK(one.dataset.rows() == 1);
    for (std::size_t c = 0; c < one.dataset.cols(); ++c) CHECK(std::isfinite(one.dataset.at(0, c)));
    CHECK_THROWS_AS(generate(chain_spec(), 0), ValidationError);
}

TEST_CASE("seeded determinism") {
    const auto a = generate(default_study_spec(), 500);
    const auto b = generate(default_study_spec(), 500);
    CHECK(a.dataset.cells() == b.dataset.cells());
    auto other = default_study_spec();
    other.seed += 1;
    CHECK_FALSE(generate(other, 500).dataset.cells() == a.dataset.cells());
}

TEST_CASE("default study graph") {
    const auto s = default_study_spec();
    CHECK(s.outcome() == "mortality risk");
    std::vector<double> strengths;
    for (const auto& e : s.edges)
        if (e.target == "mortality risk") strengths.push_back(e.strength);
    CHECK(strengths.size() == 14);
    std::sort(strengths.begin(), strengths.end());
    for (std::size_t i = 0; i < strengths.size(); ++i)
        CHECK(strengths[i] == doctest::Approx(0.21 + 0.05 * static_cast<double>(i)).epsilon(1e-12));
    CHECK(s.nodes.size() == 15);
    CHECK(validate_graph(s).empty());

    const auto gt = ground_truth_ranking(s);
    CHECK(gt.ranking.size() == 14);
    const std::vector<double> top{0.86, 0.81, 0.76, 0.71, 0.66};
    REQUIRE(gt.top_k.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(gt.ranking[i].strength == doctest::Approx(top[i]).epsilon(1e-12));
}

TEST_CASE("ground truth ranks direct parents only") {
    CausalGraphSpec s;
    s.nodes = {{"A"}, {"B"}, {"C"}, {"Y", true}};
    s.edges = {{"A", "Y", 0.3}, {"B", "Y", 0.7}, {"C", "A", 0.9}};
    const auto gt = ground_truth_ranking(s);
    CHECK(gt.ranked_names() == std::vector<std::string>{"B", "A"});
    const auto back = GroundTruth::from_json(gt.to_json());
    CHECK(back.ranked_names() == gt.ranked_names());
    CHECK(back.top_k == gt.top_k);
}

TEST_CASE("coefficients track the specified strengths") {
    const auto spec = default_study_spec();
    const auto data = generate(spec, 10000);
    std::vector<std::string> parents;
    std::vector<double> strengths;
    for (const auto& e : spec.edges) {
        if (e.target != spec.outcome()) continue;
        parents.push_back(e.source);
        strengths.push_back(e.strength);
    }
    const auto beta = ols(data.dataset, parents, spec.outcome());
    // ranks of both vectors; strengths are distinct so ties only matter for beta
    const auto ranks = [](std::vector<double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
        return r;
    };
    std::vector<double> b(beta.data(), beta.data() + beta.size());
    const auto rb = ranks(b);
    const auto rs = ranks(strengths);
    const Eigen::Map<const Eigen::VectorXd> vb(rb.data(), static_cast<Eigen::Index>(rb.size()));
    const Eigen::Map<const Eigen::VectorXd> vs(rs.data(), static_cast<Eigen::Index>(rs.size()));
    CHECK(correlation(vb, vs) >= 0.9);
}

TEST_CASE("a zero-strength edge carries no dependence") {
    CausalGraphSpec s;
    s.nodes = {{"A"}, {"C"}, {"B"}, {"Y", true}};
    s.edges = {{"A", "B", 0.0}, {"C", "B", 0.5}, {"B", "Y", 0.4}, {"A", "Y", 0.6}};
    s.seed = 5;
    const auto d = generate(s, 10000).dataset;
    const double partial = correlation(residual(d, "A", {"C"}), residual(d, "B", {"C"}));
    CHECK(std::fabs(partial) < 0.05);
    // the live edge stays visible
    const double live = correlation(residual(d, "C", {"A"}), residual(d, "B", {"A"}));
    CHECK(std::fabs(live) > 0.3);
}
