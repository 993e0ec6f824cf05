#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bcot/scenario_tree.hpp"

using namespace bcot;

namespace {

// hand-built T=1 tree: root x0, children (lo @ p_lo, hi @ p_hi)
ScenarioTree tiny_tree(double x0, double lo, double p_lo, double hi, double p_hi) {
    ScenarioTree t;
    t.horizon = 1;
    t.level_offsets = {0, 1};
    TreeNode root;
    root.state = x0;
    root.children = {{1, p_lo}, {2, p_hi}};
    TreeNode a, b;
    a.state = lo;
    a.depth = 1;
    a.parent = 0;
    b.state = hi;
    b.depth = 1;
    b.parent = 0;
    t.nodes = {root, a, b};
    return t;
}

} // namespace

TEST_SUITE("scenario_tree") {

TEST_CASE("zero-noise model collapses to a constant tree") {
    GaussianAR1 model({1.0}, Mat(1, 1, 0.0), 3);
    ScenarioTree tree = build_tree(model, 3, 100, Rng(5));
    REQUIRE(tree.nodes.size() == 15); // 2^4 - 1
    for (const TreeNode& nd : tree.nodes) {
        CHECK(nd.state == 1.0);
        if (!nd.children.empty()) {
            CHECK(nd.children[0].second == 0.5);
            CHECK(nd.children[1].second == 0.5);
        }
    }
}

TEST_CASE("mean split of a unit normal lands at +-sqrt(2/pi)") {
    GaussianAR1 model({0.4}, Mat::identity(1), 1);
    ScenarioTree tree = build_tree(model, 1, 1000000, Rng(9));
    const double half_normal_mean = std::sqrt(2.0 / 3.14159265358979323846);
    double lo = tree.nodes[1].state, hi = tree.nodes[2].state;
    CHECK(std::abs(lo - (0.4 - half_normal_mean)) < 0.01);
    CHECK(std::abs(hi - (0.4 + half_normal_mean)) < 0.01);
    CHECK(std::abs(tree.nodes[0].children[0].second - 0.5) < 0.01);
    CHECK(std::abs(tree.nodes[0].children[1].second - 0.5) < 0.01);
}

TEST_CASE("tree expectation of the final state keeps the martingale mean") {
    GaussianAR1 model({2.0}, Mat::identity(1), 3);
    // SE of the tree mean is about sqrt(T/S); 4 SE with T=3, S=1e4 is ~0.07
    ScenarioTree tree = build_tree(model, 3, 10000, Rng(13));
    double mean = tree_expectation(
        tree, [](std::span<const double> path) { return path[path.size() - 1]; });
    CHECK(std::abs(mean - 2.0) < 0.07);
}

TEST_CASE("tree expectation basics") {
    ScenarioTree tree = tiny_tree(1.0, 0.5, 0.4, 2.0, 0.6);
    CHECK(tree_expectation(tree, [](std::span<const double>) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tree_expectation(tree, [](std::span<const double> p) { return p[1]; }) ==
          doctest::Approx(1.4).epsilon(1e-12));

    GaussianAR1 model({1.0}, Mat(1, 1, 0.0), 2);
    ScenarioTree constant = build_tree(model, 2, 50, Rng(3));
    CHECK(tree_expectation(constant, [](std::span<const double> p) { return p.back(); }) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("structure invariants hold on a sampled tree") {
    GaussianAR1 model({0.0}, Mat::identity(1, 0.7), 5);
    ScenarioTree tree = build_tree(model, 5, 300, Rng(21));

    // unique parents, level sizes, child probability normalization
    for (int t = 0; t <= 5; ++t) {
        CHECK(tree.level_size(t) == static_cast<std::size_t>(1) << t);
    }
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
        CHECK(tree.nodes[i].parent >= 0);
    }
    for (const TreeNode& nd : tree.nodes) {
        if (!nd.children.empty()) {
            double s = nd.children[0].second + nd.children[1].second;
            CHECK(std::abs(s - 1.0) <= 1e-12);
            CHECK(nd.children[0].second > 0.0);
            CHECK(nd.children[1].second > 0.0);
        }
    }

    // leaf probabilities: positive, in (0,1], summing to 1
    double leaf_sum = 0.0;
    for (std::size_t i = tree.level_begin(5); i < tree.nodes.size(); ++i) {
        double prob = 1.0;
        int cur = static_cast<int>(i);
        while (tree.nodes[cur].parent >= 0) {
            int par = tree.nodes[cur].parent;
            for (auto [child, p] : tree.nodes[par].children) {
                if (child == cur) prob *= p;
            }
            cur = par;
        }
        CHECK(prob > 0.0);
        CHECK(prob <= 1.0);
        leaf_sum += prob;
    }
    CHECK(std::abs(leaf_sum - 1.0) <= 1e-9);
}

TEST_CASE("construction is deterministic under a fixed seed") {
    GaussianAR1 model({0.0}, Mat::identity(1), 4);
    ScenarioTree a = build_tree(model, 4, 500, Rng(77));
    ScenarioTree b = build_tree(model, 4, 500, Rng(77));
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].state == b.nodes[i].state);
    }
}

TEST_CASE("invalid inputs are rejected") {
    GaussianAR1 model2d({0.0, 0.0}, Mat::identity(2), 2);
    CHECK_THROWS_AS(build_tree(model2d, 2, 100, Rng(1)), std::invalid_argument);
    GaussianAR1 model({0.0}, Mat::identity(1), 2);
    CHECK_THROWS_AS(build_tree(model, 2, 1, Rng(1)), std::invalid_argument);
    CHECK_THROWS_AS(build_tree(model, 0, 100, Rng(1)), std::invalid_argument);
}

TEST_CASE("text dump lists one node per line with children") {
    ScenarioTree tree = tiny_tree(1.0, 0.5, 0.4, 2.0, 0.6);
    std::string text = to_text(tree);
    CHECK(text.find("0 0 -1 1") != std::string::npos);
    CHECK(text.find("1:0.4") != std::string::npos);
    CHECK(text.find("2:0.6") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

} // TEST_SUITE
