#include "hoidist/synthworld.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include <json.hpp>

#include "hoidist/errors.hpp"

namespace synthworld {

using hoidist::Box;
using hoidist::CategorySet;
using numcore::Rng;
using numcore::Tensor;

Profile parse_profile(const std::string& s) {
    if (s == "uniform")
        return Profile::uniform;
    if (s == "longtail")
        return Profile::longtail;
    throw hoidist::ConfigError("unknown frequency profile: " + s);
}

const char* profile_name(Profile p) {
    return p == Profile::uniform ? "uniform" : "longtail";
}

CategorySet default_categories() {
    CategorySet c;
    c.objects = {"ball", "bicycle", "apple", "horse"};
    c.interactions = {"hold", "ride", "kick", "throw", "chase", "watch"};
    c.hoi_pairs = {
        {0, 0},  // hold a ball
        {0, 2},  // hold an apple
        {1, 1},  // ride a bicycle
        {1, 3},  // ride a horse
        {2, 0},  // kick a ball
        {2, 1},  // kick a bicycle
        {3, 0},  // throw a ball
        {3, 2},  // throw an apple
        {4, 3},  // chase a horse
        {5, 2},  // watch an apple
        {5, 3},  // watch a horse
        {5, 0},  // watch a ball
    };
    return c;
}

namespace {

double urange(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

double object_scale(int cls) {
    // class-dependent size so object identity is visible in geometry
    switch (cls % 4) {
        case 0: return 0.90;  // ball
        case 1: return 1.45;  // bicycle
        case 2: return 0.75;  // apple
        default: return 1.65; // horse
    }
}

Box sample_object_dims(Rng& rng, int cls) {
    const double s = object_scale(cls);
    Box o;
    o.w = urange(rng, 0.09, 0.15) * s;
    o.h = urange(rng, 0.09, 0.15) * s;
    return o;
}

struct Predicate {
    int modes;
    // checker over geometry
    std::function<bool(const Box&, const Box&)> holds;
    // proposes an object center for (subject, object dims, mode)
    std::function<void(Rng&, const Box&, Box&, int)> place;
};

bool hold_holds(const Box& s, const Box& o) {
    return hoidist::iou(s, o) > 0.0 && o.area() <= 0.5 * s.area() &&
           std::fabs(o.cy - s.cy) <= 0.5 * s.h;
}

bool ride_holds(const Box& s, const Box& o) {
    return std::fabs(o.cx - s.cx) <= 0.35 * std::max(s.w, o.w) && s.cy < o.cy &&
           hoidist::box_gap(s, o) <= 0.02;
}

bool kick_holds(const Box& s, const Box& o) {
    const double dx = std::fabs(o.cx - s.cx);
    return (o.cy - s.cy) >= 0.25 * s.h && dx >= 0.2 * s.w && dx <= 1.5 * s.w &&
           hoidist::box_gap(s, o) <= 0.06;
}

bool throw_holds(const Box& s, const Box& o) {
    return (s.cy - o.cy) >= 0.5 * s.h + 0.5 * o.h &&
           std::fabs(o.cx - s.cx) <= 1.5 * s.w;
}

bool chase_holds(const Box& s, const Box& o) {
    if (hoidist::iou(s, o) > 0.0)
        return false;
    const double hgap = std::max(o.x1() - s.x2(), s.x1() - o.x2());
    return std::fabs(o.cy - s.cy) <= 0.35 * std::max(s.h, o.h) && hgap >= 0.02 && hgap <= 0.22;
}

bool watch_holds(const Box& s, const Box& o) {
    return hoidist::center_dist(s, o) >= 0.45 && hoidist::box_gap(s, o) > 0.05;
}

const std::map<std::string, Predicate>& registry() {
    static const std::map<std::string, Predicate> reg = {
        {"hold",
         {2, hold_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              o.w = std::min(o.w, 0.55 * s.w);
              o.h = std::min(o.h, 0.55 * s.h);
              const double side = mode == 0 ? -1.0 : 1.0;
              o.cx = s.cx + side * 0.25 * s.w;
              o.cy = s.cy + urange(rng, -0.3, 0.3) * s.h * 0.8;
          }}},
        {"ride",
         {2, ride_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              o.w = std::max(o.w, 0.8 * s.w);
              o.cx = s.cx + urange(rng, -0.25, 0.25) * std::max(s.w, o.w);
              if (mode == 0) {
                  // perched on top edge
                  o.cy = s.y2() + 0.5 * o.h - urange(rng, 0.0, 0.01);
              } else {
                  // astride, sunk into the object
                  o.cy = s.y2() + urange(rng, 0.1, 0.3) * o.h;
              }
          }}},
        {"kick",
         {2, kick_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              const double side = mode == 0 ? -1.0 : 1.0;
              o.cx = s.cx + side * (0.5 * s.w + urange(rng, 0.2, 0.45) * o.w);
              o.cy = s.y2() - urange(rng, 0.0, 0.3) * o.h;
          }}},
        {"throw",
         {2, throw_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
              if (mode == 0)
                  o.cx = s.cx + side * urange(rng, 0.0, 0.25) * s.w;
              else
                  o.cx = s.cx + side * urange(rng, 0.6, 1.4) * s.w;
              o.cy = s.y1() - 0.5 * o.h - urange(rng, 0.02, 0.12);
          }}},
        {"chase",
         {2, chase_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              const double side = mode == 0 ? 1.0 : -1.0;
              const double gap = urange(rng, 0.03, 0.2);
              o.cx = side > 0 ? s.x2() + gap + 0.5 * o.w : s.x1() - gap - 0.5 * o.w;
              o.cy = s.cy + urange(rng, -0.2, 0.2) * std::max(s.h, o.h);
          }}},
        {"watch",
         {4, watch_holds,
          [](Rng& rng, const Box& s, Box& o, int mode) {
              const double sx = (mode & 1) ? 1.0 : -1.0;
              const double sy = (mode & 2) ? 1.0 : -1.0;
              const double d = urange(rng, 0.5, 0.75);
              const double ang = urange(rng, 0.25, 1.3);
              o.cx = s.cx + sx * d * std::cos(ang);
              o.cy = s.cy + sy * d * std::sin(ang);
          }}},
    };
    return reg;
}

const Predicate& predicate_for(const std::string& interaction) {
    const auto& reg = registry();
    auto it = reg.find(interaction);
    if (it == reg.end())
        throw hoidist::ConfigError("no geometric predicate for interaction '" + interaction + "'");
    return it->second;
}

bool in_bounds(const Box& b) {
    return b.x1() >= 0.005 && b.y1() >= 0.005 && b.x2() <= 0.995 && b.y2() <= 0.995;
}

}  // namespace

bool interaction_holds(const std::string& interaction, const Box& subject, const Box& object) {
    return predicate_for(interaction).holds(subject, object);
}

int interaction_mode_count(const std::string& interaction) {
    return predicate_for(interaction).modes;
}

std::vector<double> pair_probabilities(const CategorySet& cats, const SplitSpec& split,
                                       bool training) {
    std::vector<double> p(static_cast<size_t>(cats.n_pairs()), 0.0);
    for (int i = 0; i < cats.n_pairs(); ++i) {
        if (training && split.unseen_pairs.count(i))
            continue;
        p[i] = split.profile == Profile::uniform
                   ? 1.0
                   : std::pow(static_cast<double>(i + 1), -2.5);
    }
    double total = 0.0;
    for (double v : p)
        total += v;
    if (total <= 0.0)
        throw hoidist::ConfigError("no pairs left to sample (all unseen?)");
    for (double& v : p)
        v /= total;
    return p;
}

std::vector<Scene> generate(const CategorySet& cats, int n_scenes, uint64_t seed,
                            const SplitSpec& split, bool training, const GenOptions& opt) {
    cats.validate();
    for (int pr : split.unseen_pairs)
        if (pr < 0 || pr >= cats.n_pairs())
            throw hoidist::ConfigError("unseen pair index out of range");

    const auto probs = pair_probabilities(cats, split, training);
    Rng base = Rng(seed).substream(training ? 1 : 2);

    std::vector<Scene> scenes;
    scenes.reserve(static_cast<size_t>(n_scenes));
    for (int si = 0; si < n_scenes; ++si) {
        Rng rng = base.substream(static_cast<uint64_t>(si));
        Scene scene;
        scene.id = (training ? 0 : n_scenes) + si;

        // Draw the pairs up front and keep them fixed across placement
        // retries, so the emitted pair marginal stays exactly the profile.
        const int n_triplets = rng.uniform() < opt.two_triplet_prob ? 2 : 1;
        std::vector<int> pair_ids;
        for (int t = 0; t < n_triplets; ++t) {
            double u = rng.uniform();
            int pair_id = 0;
            for (int i = 0; i < cats.n_pairs(); ++i) {
                pair_id = i;
                if (u < probs[i])
                    break;
                u -= probs[i];
            }
            pair_ids.push_back(pair_id);
        }

        bool done = false;
        int blocked_pair = pair_ids[0];
        for (int attempt = 0; attempt < opt.max_attempts && !done; ++attempt) {
            scene.objects.clear();
            scene.triplets.clear();
            scene.subject.w = urange(rng, opt.subject_w_min, opt.subject_w_max);
            scene.subject.h = urange(rng, opt.subject_h_min, opt.subject_h_max);
            scene.subject.cx = urange(rng, 0.5 * scene.subject.w + 0.02, 1.0 - 0.5 * scene.subject.w - 0.02);
            scene.subject.cy = urange(rng, 0.5 * scene.subject.h + 0.02, 1.0 - 0.5 * scene.subject.h - 0.02);
            scene.pose_mode = static_cast<int>(rng.next_u64() % 3);
            if (!in_bounds(scene.subject))
                continue;

            bool ok = true;
            for (int t = 0; t < n_triplets && ok; ++t) {
                const int pair_id = pair_ids[static_cast<size_t>(t)];
                const auto& [ii, oi] = cats.hoi_pairs[static_cast<size_t>(pair_id)];
                const Predicate& pred = predicate_for(cats.interactions[static_cast<size_t>(ii)]);

                bool placed = false;
                for (int oa = 0; oa < opt.max_attempts && !placed; ++oa) {
                    Box obj = sample_object_dims(rng, oi);
                    const int mode = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(pred.modes));
                    pred.place(rng, scene.subject, obj, mode);
                    if (!in_bounds(obj) || !pred.holds(scene.subject, obj))
                        continue;
                    bool collides = false;
                    for (const auto& other : scene.objects)
                        if (hoidist::iou(obj, other.box) > 0.3)
                            collides = true;
                    if (collides)
                        continue;
                    scene.objects.push_back({oi, obj});
                    scene.triplets.push_back({static_cast<int>(scene.objects.size()) - 1, pair_id});
                    placed = true;
                }
                if (!placed) {
                    blocked_pair = pair_id;
                    ok = false;
                }
            }
            done = ok;
        }
        if (!done)
            throw hoidist::GenerationError("cannot satisfy interaction predicate for pair '" +
                                           cats.pair_text(blocked_pair) + "'");
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

int feature_channels(int n_obj_classes) {
    return 7 + n_obj_classes;
}

numcore::Tensor rasterize(const Scene& scene, int grid, int n_obj_classes) {
    const int C = feature_channels(n_obj_classes);
    Tensor features = Tensor::zeros({static_cast<int64_t>(grid) * grid, C});
    auto& d = features.mutable_data();
    const double cell = 1.0 / grid;

    auto coverage = [&](const Box& b, int gx, int gy) {
        const double x1 = gx * cell, y1 = gy * cell;
        const double ix = std::max(0.0, std::min(b.x2(), x1 + cell) - std::max(b.x1(), x1));
        const double iy = std::max(0.0, std::min(b.y2(), y1 + cell) - std::max(b.y1(), y1));
        return ix * iy / (cell * cell);
    };

    // offsets are in cell units so their scale matches the coverage channels
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
            const int64_t ci = (static_cast<int64_t>(gy) * grid + gx) * C;
            const double ccx = (gx + 0.5) * cell, ccy = (gy + 0.5) * cell;
            const double sc = coverage(scene.subject, gx, gy);
            if (sc > 0.0) {
                d[ci + 0] += sc;
                d[ci + 1] += (scene.subject.cx - ccx) / cell * sc;
                d[ci + 2] += (scene.subject.cy - ccy) / cell * sc;
                d[ci + 3] += (scene.pose_mode + 1) / 3.0 * sc;
            }
            for (const auto& obj : scene.objects) {
                const double oc = coverage(obj.box, gx, gy);
                if (oc <= 0.0)
                    continue;
                d[ci + 4] += oc;
                d[ci + 5] += (obj.box.cx - ccx) / cell * oc;
                d[ci + 6] += (obj.box.cy - ccy) / cell * oc;
                d[ci + 7 + obj.cls] += oc;
            }
        }
    return features;
}

void save_scenes(const std::vector<Scene>& scenes, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw hoidist::ConfigError("cannot write scene file: " + path);
    for (const auto& s : scenes) {
        nlohmann::json j;
        j["id"] = s.id;
        j["subject"] = {{"box", {s.subject.cx, s.subject.cy, s.subject.w, s.subject.h}},
                        {"pose", s.pose_mode}};
        nlohmann::json objs = nlohmann::json::array();
        for (const auto& o : s.objects)
            objs.push_back({{"cls", o.cls}, {"box", {o.box.cx, o.box.cy, o.box.w, o.box.h}}});
        j["objects"] = objs;
        nlohmann::json trips = nlohmann::json::array();
        for (const auto& t : s.triplets)
            trips.push_back({{"object", t.object_index}, {"pair", t.pair_id}});
        j["triplets"] = trips;
        f << j.dump() << "\n";
    }
}

std::vector<Scene> load_scenes(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw hoidist::ConfigError("cannot open scene file: " + path);
    std::vector<Scene> scenes;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        nlohmann::json j = nlohmann::json::parse(line);
        Scene s;
        s.id = j.at("id").get<int>();
        const auto& sb = j.at("subject");
        const auto& bb = sb.at("box");
        s.subject = Box{bb[0], bb[1], bb[2], bb[3]};
        s.pose_mode = sb.at("pose").get<int>();
        for (const auto& o : j.at("objects")) {
            const auto& ob = o.at("box");
            s.objects.push_back({o.at("cls").get<int>(), Box{ob[0], ob[1], ob[2], ob[3]}});
        }
        for (const auto& t : j.at("triplets"))
            s.triplets.push_back({t.at("object").get<int>(), t.at("pair").get<int>()});
        scenes.push_back(std::move(s));
    }
    return scenes;
}

}  // namespace synthworld
