#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>

#include "hoidist/synthworld.hpp"

using namespace synthworld;
using hoidist::Box;

TEST_CASE("n=0 produces an empty list") {
    auto cats = default_categories();
    CHECK(generate(cats, 0, 42, SplitSpec{}, true).empty());
}

TEST_CASE("same seed produces bit-identical scenes") {
    auto cats = default_categories();
    SplitSpec split;
    auto a = generate(cats, 25, 42, split, true);
    auto b = generate(cats, 25, 42, split, true);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].subject.cx == b[i].subject.cx);
        CHECK(a[i].pose_mode == b[i].pose_mode);
        REQUIRE(a[i].objects.size() == b[i].objects.size());
        for (size_t k = 0; k < a[i].objects.size(); ++k) {
            CHECK(a[i].objects[k].cls == b[i].objects[k].cls);
            CHECK(a[i].objects[k].box.cx == b[i].objects[k].box.cx);
            CHECK(a[i].objects[k].box.cy == b[i].objects[k].box.cy);
        }
    }
    auto c = generate(cats, 25, 43, split, true);
    CHECK(a[0].subject.cx != c[0].subject.cx);
}

TEST_CASE("every emitted triplet satisfies its interaction predicate") {
    auto cats = default_categories();
    SplitSpec split;
    for (bool training : {true, false}) {
        auto scenes = generate(cats, 300, 42, split, training);
        for (const auto& s : scenes) {
            CHECK(!s.triplets.empty());
            for (const auto& t : s.triplets) {
                const auto& [ii, oi] = cats.hoi_pairs[t.pair_id];
                const auto& obj = s.objects[t.object_index];
                CHECK(obj.cls == oi);
                CHECK(interaction_holds(cats.interactions[ii], s.subject, obj.box));
                CHECK(s.subject.x1() >= 0.0);
                CHECK(s.subject.x2() <= 1.0);
                CHECK(obj.box.x1() >= 0.0);
                CHECK(obj.box.y2() <= 1.0);
            }
        }
    }
}

TEST_CASE("longtail profile yields a nonempty rare set under the recount oracle") {
    auto cats = default_categories();
    SplitSpec split;
    split.profile = Profile::longtail;
    split.rare_threshold = 10;
    auto scenes = generate(cats, 2000, 42, split, true);

    std::map<int, int> counts;
    for (const auto& s : scenes)
        for (const auto& t : s.triplets)
            counts[t.pair_id]++;
    int rare = 0, total = 0;
    for (int p = 0; p < cats.n_pairs(); ++p) {
        total += counts[p];
        if (counts[p] < split.rare_threshold)
            ++rare;
    }
    CHECK(rare > 0);
    CHECK(rare < cats.n_pairs());
    CHECK(total >= 2000);
    // head pair dominates tail pair
    CHECK(counts[0] > 20 * std::max(1, counts[cats.n_pairs() - 1]));
}

TEST_CASE("unseen pairs never appear in training scenes but do in test scenes") {
    auto cats = default_categories();
    SplitSpec split;
    split.unseen_pairs = {2, 7};
    split.profile = Profile::uniform;
    auto train = generate(cats, 400, 42, split, true);
    int train_unseen = 0;
    for (const auto& s : train)
        for (const auto& t : s.triplets)
            train_unseen += split.unseen_pairs.count(t.pair_id);
    CHECK(train_unseen == 0);

    auto test = generate(cats, 400, 42, split, false);
    int test_unseen = 0;
    for (const auto& s : test)
        for (const auto& t : s.triplets)
            test_unseen += split.unseen_pairs.count(t.pair_id);
    CHECK(test_unseen > 0);
}

TEST_CASE("uniform profile matches multinomial 3-sigma bounds") {
    auto cats = default_categories();
    SplitSpec split;
    split.profile = Profile::uniform;
    auto scenes = generate(cats, 3000, 7, split, true);
    std::map<int, int> counts;
    int total = 0;
    for (const auto& s : scenes)
        for (const auto& t : s.triplets) {
            counts[t.pair_id]++;
            ++total;
        }
    const double p = 1.0 / cats.n_pairs();
    const double mean = total * p;
    const double sd = std::sqrt(total * p * (1 - p));
    for (int i = 0; i < cats.n_pairs(); ++i)
        CHECK(std::fabs(counts[i] - mean) <= 3.0 * sd);
}

TEST_CASE("unsatisfiable placement raises a generation error naming the pair") {
    auto cats = default_categories();
    SplitSpec split;
    split.profile = Profile::uniform;
    GenOptions opt;
    // a subject filling the frame leaves no room above for 'throw'
    opt.subject_w_min = opt.subject_w_max = 0.95;
    opt.subject_h_min = opt.subject_h_max = 0.95;
    try {
        generate(cats, 50, 42, split, true, opt);
        FAIL("expected GenerationError");
    } catch (const hoidist::GenerationError& e) {
        CHECK(std::string(e.what()).find("'") != std::string::npos);
    }
}

TEST_CASE("rasterize: empty scene is zero, single-cell object hits one cell") {
    Scene empty;
    empty.subject = Box{0.5, 0.5, 0.0, 0.0};
    auto feats = rasterize(empty, 8, 4);
    for (double v : feats.data())
        CHECK(v == 0.0);

    Scene one;
    one.subject = Box{0.5, 0.5, 0.0, 0.0};
    // object exactly covering cell (2,1) of an 8x8 grid
    one.objects.push_back({2, Box{2.5 / 8.0, 1.5 / 8.0, 1.0 / 8.0, 1.0 / 8.0}});
    auto f = rasterize(one, 8, 4);
    const int C = feature_channels(4);
    int nonzero_cells = 0;
    for (int cell = 0; cell < 64; ++cell) {
        bool any = false;
        for (int c = 0; c < C; ++c)
            if (f.data()[cell * C + c] != 0.0)
                any = true;
        nonzero_cells += any;
        if (any) {
            CHECK(cell == 1 * 8 + 2);
            CHECK(f.data()[cell * C + 4] == doctest::Approx(1.0));       // obj coverage
            CHECK(f.data()[cell * C + 7 + 2] == doctest::Approx(1.0));   // class channel
        }
    }
    CHECK(nonzero_cells == 1);
}

TEST_CASE("integer-cell translation translates the features") {
    const int G = 8;
    Scene s;
    s.subject = Box{3.5 / G, 4.5 / G, 2.0 / G, 2.0 / G};
    s.pose_mode = 1;
    s.objects.push_back({1, Box{2.5 / G, 2.0 / G, 1.5 / G, 1.0 / G}});
    auto f = rasterize(s, G, 4);

    Scene t = s;
    const double dx = 2.0 / G, dy = 1.0 / G;
    t.subject.cx += dx;
    t.subject.cy += dy;
    t.objects[0].box.cx += dx;
    t.objects[0].box.cy += dy;
    auto g = rasterize(t, G, 4);

    const int C = feature_channels(4);
    for (int y = 0; y < G; ++y)
        for (int x = 0; x < G; ++x) {
            const int sy = y + 1, sx = x + 2;
            if (sy >= G || sx >= G)
                continue;
            for (int c = 0; c < C; ++c)
                CHECK(g.data()[(sy * G + sx) * C + c] ==
                      doctest::Approx(f.data()[(y * G + x) * C + c]).epsilon(1e-12));
        }
}

TEST_CASE("scene jsonl round trip") {
    namespace fs = std::filesystem;
    auto cats = default_categories();
    auto scenes = generate(cats, 30, 42, SplitSpec{}, true);
    const auto dir = fs::temp_directory_path() / "hoidist_scene_test";
    fs::create_directories(dir);
    const std::string path = (dir / "scenes.jsonl").string();
    save_scenes(scenes, path);
    auto loaded = load_scenes(path);
    REQUIRE(loaded.size() == scenes.size());
    for (size_t i = 0; i < scenes.size(); ++i) {
        CHECK(loaded[i].id == scenes[i].id);
        CHECK(loaded[i].subject.cx == scenes[i].subject.cx);
        CHECK(loaded[i].pose_mode == scenes[i].pose_mode);
        REQUIRE(loaded[i].triplets.size() == scenes[i].triplets.size());
        for (size_t k = 0; k < scenes[i].triplets.size(); ++k)
            CHECK(loaded[i].triplets[k].pair_id == scenes[i].triplets[k].pair_id);
    }
    fs::remove_all(dir);
}

TEST_CASE("interaction predicates expose at least two modes each") {
    auto cats = default_categories();
    for (const auto& name : cats.interactions)
        CHECK(interaction_mode_count(name) >= 2);
    CHECK_THROWS_AS(interaction_holds("teleport", Box{}, Box{}), hoidist::ConfigError);
}
