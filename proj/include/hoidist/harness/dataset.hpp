#pragma once

#include <set>
#include <string>
#include <vector>

#include "hoidist/categories.hpp"
#include "hoidist/detector/matcher.hpp"
#include "hoidist/synthworld.hpp"

namespace harness {

struct DataManifest {
    uint64_t seed = 42;
    int n_train = 0, n_test = 0;
    std::string train_profile = "longtail";
    std::string test_profile = "uniform";
    int rare_threshold = 10;
    std::set<int> unseen_pairs;
    std::vector<int> rare_pairs;         // derived from train counts
    std::vector<int> train_pair_counts;  // per pair id
};

struct GenDataOptions {
    int n_train = 2000;
    int n_test = 400;
    uint64_t seed = 42;
    synthworld::Profile train_profile = synthworld::Profile::longtail;
    synthworld::Profile test_profile = synthworld::Profile::uniform;
    int rare_threshold = 10;
    std::set<int> unseen_pairs;
};

// Writes categories.json, train.jsonl, test.jsonl and manifest.json. The
// rare set is recounted from the emitted training triplets.
DataManifest gen_data(const hoidist::CategorySet& cats, const GenDataOptions& opt,
                      const std::string& out_dir);

DataManifest load_manifest(const std::string& data_dir);

// Scenes with features rasterized on load plus matcher-form targets.
struct Dataset {
    hoidist::CategorySet cats;
    DataManifest manifest;
    std::vector<synthworld::Scene> scenes;
    std::vector<numcore::Tensor> features;
    std::vector<detector::SceneTargets> targets;

    size_t size() const { return scenes.size(); }
};

Dataset load_dataset(const std::string& data_dir, const std::string& split_file, int grid,
                     int max_scenes = 0);

detector::SceneTargets targets_of(const synthworld::Scene& scene);

}  // namespace harness
