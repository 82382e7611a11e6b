#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hoidist/promptspace.hpp"

using namespace promptspace;
using numcore::ParamStore;
using numcore::Tensor;

namespace {

hoidist::CategorySet toy_categories() {
    hoidist::CategorySet c;
    c.objects = {"ball", "bicycle", "apple", "horse"};
    c.interactions = {"hold", "ride", "kick", "throw", "chase", "watch"};
    c.hoi_pairs = {{0, 0}, {0, 2}, {1, 1}, {1, 3}, {2, 0}, {2, 1},
                   {3, 0}, {3, 2}, {4, 3}, {5, 2}, {5, 3}, {5, 0}};
    return c;
}

}  // namespace

TEST_CASE("build_groups produces the expected group sizes and block shapes") {
    ParamStore store(42);
    textenc::Vocab vocab(16);
    BuildOptions opt;
    opt.K = 8;
    opt.L = 16;
    opt.e = 16;
    auto gs = build_groups(store, vocab, toy_categories(), opt);
    CHECK(gs.subject.N() == 4);
    CHECK(gs.object.N() == 4);
    CHECK(gs.interaction.N() == 12);
    for (const auto& col : gs.interaction.collections)
        CHECK(col.block.shape() == numcore::Shape{8, 16, 16});
    // subjects are anonymous: fully learnable
    for (const auto& col : gs.subject.collections)
        for (auto f : col.frozen_kl)
            CHECK(f == 0);
}

TEST_CASE("build is deterministic given the same seed") {
    textenc::Vocab vocab(8);
    BuildOptions opt;
    opt.K = 4;
    opt.L = 12;
    opt.e = 8;
    ParamStore s1(42), s2(42), s3(43);
    auto g1 = build_groups(s1, vocab, toy_categories(), opt);
    auto g2 = build_groups(s2, vocab, toy_categories(), opt);
    auto g3 = build_groups(s3, vocab, toy_categories(), opt);
    CHECK(g1.object.collections[2].block.data() == g2.object.collections[2].block.data());
    CHECK(g1.subject.collections[0].block.data() == g2.subject.collections[0].block.data());
    CHECK(g1.object.collections[2].block.data() != g3.object.collections[2].block.data());
}

TEST_CASE("the K prompts of a collection share frozen content, differ on learnable slots") {
    ParamStore store(42);
    textenc::Vocab vocab(8);
    BuildOptions opt;
    opt.K = 4;
    opt.L = 12;
    opt.e = 8;
    auto gs = build_groups(store, vocab, toy_categories(), opt);
    const auto& col = gs.object.collections[0];
    bool learnable_differs = false;
    for (int t = 0; t < col.L; ++t) {
        const bool frozen = col.frozen_kl[t] != 0;
        for (int j = 0; j < col.e; ++j) {
            const double v0 = col.block.at({0, t, j});
            for (int k = 1; k < col.K; ++k) {
                if (frozen)
                    CHECK(col.block.at({k, t, j}) == v0);
                else if (col.block.at({k, t, j}) != v0)
                    learnable_differs = true;
            }
        }
    }
    CHECK(learnable_differs);
}

TEST_CASE("unseen pairs get placeholder prompts, seen pairs keep priors") {
    ParamStore store(42);
    textenc::Vocab vocab(8);
    BuildOptions opt;
    opt.K = 2;
    opt.L = 16;
    opt.e = 8;
    opt.unseen_pairs = {3, 7};
    auto gs = build_groups(store, vocab, toy_categories(), opt);
    for (int p = 0; p < 12; ++p) {
        const auto& col = gs.interaction.collections[p];
        if (opt.unseen_pairs.count(p))
            CHECK(col.placeholder_count == 8);
        else
            CHECK(col.placeholder_count == 0);
    }

    // degenerate: all pairs unseen
    ParamStore store2(42);
    BuildOptions opt2 = opt;
    opt2.unseen_pairs.clear();
    for (int p = 0; p < 12; ++p)
        opt2.unseen_pairs.insert(p);
    auto gs2 = build_groups(store2, vocab, toy_categories(), opt2);
    for (const auto& col : gs2.interaction.collections)
        CHECK(col.placeholder_count == 8);
}

TEST_CASE("duplicate category names are rejected") {
    ParamStore store(42);
    textenc::Vocab vocab(8);
    auto cats = toy_categories();
    cats.objects[1] = "ball";
    CHECK_THROWS_AS(build_groups(store, vocab, cats, BuildOptions{}), hoidist::ConfigError);
}

TEST_CASE("pooled_mean matches a brute-force elementwise mean") {
    ParamStore store(42);
    textenc::Vocab vocab(8);
    BuildOptions opt;
    opt.K = 8;
    opt.L = 12;
    opt.e = 8;
    auto gs = build_groups(store, vocab, toy_categories(), opt);
    const auto& col = gs.object.collections[1];
    Tensor pooled = col.pooled_mean();
    for (int t = 0; t < col.L; ++t)
        for (int j = 0; j < col.e; ++j) {
            double acc = 0.0;
            for (int k = 0; k < col.K; ++k)
                acc += col.block.at({k, t, j});
            CHECK(pooled.at({t, j}) == doctest::Approx(acc / col.K).epsilon(1e-12));
        }
}

TEST_CASE("pooled_mean trivia: constant and two-value blocks") {
    Tensor block = Tensor::full({4, 2, 3}, 3.0, true);
    PromptCollection col;
    col.block = block;
    col.K = 4;
    col.L = 2;
    col.e = 3;
    col.frozen_kl.assign(8, 0);
    Tensor pooled = col.pooled_mean();
    for (double v : pooled.data())
        CHECK(v == 3.0);

    // K=2 with values 0 and 2 per element -> all ones
    std::vector<double> data(2 * 2 * 3);
    for (int i = 0; i < 6; ++i)
        data[i] = 0.0;
    for (int i = 6; i < 12; ++i)
        data[i] = 2.0;
    PromptCollection col2;
    col2.block = Tensor::from_data({2, 2, 3}, data, true);
    col2.K = 2;
    col2.L = 2;
    col2.e = 3;
    col2.frozen_kl.assign(4, 0);
    Tensor pooled2 = col2.pooled_mean();
    for (double v : pooled2.data())
        CHECK(v == 1.0);
}

TEST_CASE("group parameter count equals N * learnable positions * e") {
    ParamStore store(42);
    textenc::Vocab vocab(8);
    BuildOptions opt;
    opt.K = 4;
    opt.L = 16;
    opt.e = 8;
    auto gs = build_groups(store, vocab, toy_categories(), opt);
    int64_t expected = 0;
    for (const auto& col : gs.object.collections) {
        int64_t learnable_positions = 0;
        for (auto f : col.frozen_kl)
            learnable_positions += (f == 0);
        expected += learnable_positions * col.e;
    }
    CHECK(store.param_count("prompt.obj.") == expected);
}
