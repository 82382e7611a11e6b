#include "hoidist/harness/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "hoidist/errors.hpp"

namespace harness {

using hoidist::ConfigError;
using nlohmann::json;

DataManifest gen_data(const hoidist::CategorySet& cats, const GenDataOptions& opt,
                      const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    synthworld::SplitSpec train_split{opt.rare_threshold, opt.unseen_pairs, opt.train_profile};
    synthworld::SplitSpec test_split{opt.rare_threshold, opt.unseen_pairs, opt.test_profile};

    auto train = synthworld::generate(cats, opt.n_train, opt.seed, train_split, true);
    auto test = synthworld::generate(cats, opt.n_test, opt.seed, test_split, false);

    DataManifest m;
    m.seed = opt.seed;
    m.n_train = opt.n_train;
    m.n_test = opt.n_test;
    m.train_profile = synthworld::profile_name(opt.train_profile);
    m.test_profile = synthworld::profile_name(opt.test_profile);
    m.rare_threshold = opt.rare_threshold;
    m.unseen_pairs = opt.unseen_pairs;
    m.train_pair_counts.assign(static_cast<size_t>(cats.n_pairs()), 0);
    for (const auto& s : train)
        for (const auto& t : s.triplets)
            m.train_pair_counts[static_cast<size_t>(t.pair_id)]++;
    for (int p = 0; p < cats.n_pairs(); ++p)
        if (m.train_pair_counts[static_cast<size_t>(p)] < opt.rare_threshold)
            m.rare_pairs.push_back(p);

    cats.to_json_file((fs::path(out_dir) / "categories.json").string());
    synthworld::save_scenes(train, (fs::path(out_dir) / "train.jsonl").string());
    synthworld::save_scenes(test, (fs::path(out_dir) / "test.jsonl").string());

    json j;
    j["seed"] = m.seed;
    j["n_train"] = m.n_train;
    j["n_test"] = m.n_test;
    j["train_profile"] = m.train_profile;
    j["test_profile"] = m.test_profile;
    j["rare_threshold"] = m.rare_threshold;
    j["unseen_pairs"] = std::vector<int>(m.unseen_pairs.begin(), m.unseen_pairs.end());
    j["rare_pairs"] = m.rare_pairs;
    j["train_pair_counts"] = m.train_pair_counts;
    std::ofstream f((fs::path(out_dir) / "manifest.json").string(), std::ios::trunc);
    if (!f)
        throw ConfigError("cannot write manifest in " + out_dir);
    f << j.dump(2) << "\n";
    return m;
}

DataManifest load_manifest(const std::string& data_dir) {
    namespace fs = std::filesystem;
    const std::string path = (fs::path(data_dir) / "manifest.json").string();
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open manifest: " + path);
    json j;
    f >> j;
    DataManifest m;
    m.seed = j.at("seed").get<uint64_t>();
    m.n_train = j.at("n_train").get<int>();
    m.n_test = j.at("n_test").get<int>();
    m.train_profile = j.at("train_profile").get<std::string>();
    m.test_profile = j.at("test_profile").get<std::string>();
    m.rare_threshold = j.at("rare_threshold").get<int>();
    for (int p : j.at("unseen_pairs").get<std::vector<int>>())
        m.unseen_pairs.insert(p);
    m.rare_pairs = j.at("rare_pairs").get<std::vector<int>>();
    m.train_pair_counts = j.at("train_pair_counts").get<std::vector<int>>();
    return m;
}

detector::SceneTargets targets_of(const synthworld::Scene& scene) {
    detector::SceneTargets t;
    for (const auto& trip : scene.triplets) {
        t.subject_boxes.push_back(scene.subject);
        t.object_boxes.push_back(scene.objects[static_cast<size_t>(trip.object_index)].box);
        t.object_cls.push_back(scene.objects[static_cast<size_t>(trip.object_index)].cls);
        t.pair_id.push_back(trip.pair_id);
    }
    return t;
}

Dataset load_dataset(const std::string& data_dir, const std::string& split_file, int grid,
                     int max_scenes) {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.cats = hoidist::CategorySet::from_json_file((fs::path(data_dir) / "categories.json").string());
    ds.manifest = load_manifest(data_dir);
    ds.scenes = synthworld::load_scenes((fs::path(data_dir) / split_file).string());
    if (max_scenes > 0 && static_cast<int>(ds.scenes.size()) > max_scenes)
        ds.scenes.resize(static_cast<size_t>(max_scenes));
    ds.features.reserve(ds.scenes.size());
    ds.targets.reserve(ds.scenes.size());
    for (const auto& s : ds.scenes) {
        ds.features.push_back(synthworld::rasterize(s, grid, ds.cats.n_objects()));
        ds.targets.push_back(targets_of(s));
    }
    return ds;
}

}  // namespace harness
