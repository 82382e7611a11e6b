#pragma once

#include <set>
#include <string>
#include <vector>

#include "hoidist/boxes.hpp"
#include "hoidist/categories.hpp"
#include "hoidist/numcore/tensor.hpp"

// Deterministic synthetic HOI scenes. Interactions are geometric predicates
// over (subject box, object box), each with several disjoint visual modes so
// one category spans distinct spatial patterns.
namespace synthworld {

struct SceneObject {
    int cls = 0;
    hoidist::Box box;
};

struct Triplet {
    int object_index = 0;  // into Scene::objects
    int pair_id = 0;       // into CategorySet::hoi_pairs
};

struct Scene {
    int id = 0;
    hoidist::Box subject;
    int pose_mode = 0;
    std::vector<SceneObject> objects;
    std::vector<Triplet> triplets;
};

enum class Profile { uniform, longtail };

Profile parse_profile(const std::string& s);
const char* profile_name(Profile p);

struct SplitSpec {
    int rare_threshold = 10;
    std::set<int> unseen_pairs;
    Profile profile = Profile::longtail;
};

struct GenOptions {
    double subject_w_min = 0.18, subject_w_max = 0.30;
    double subject_h_min = 0.26, subject_h_max = 0.40;
    double two_triplet_prob = 0.35;
    int max_attempts = 64;
};

// The built-in 4-object / 6-interaction / 12-pair universe.
hoidist::CategorySet default_categories();

// True iff (subject, object) geometry satisfies the named interaction.
// Unknown names raise ConfigError.
bool interaction_holds(const std::string& interaction, const hoidist::Box& subject,
                       const hoidist::Box& object);
int interaction_mode_count(const std::string& interaction);

// Pair probabilities under a profile (longtail: p ~ (rank+1)^-2.5), with
// unseen pairs zeroed out when `training`.
std::vector<double> pair_probabilities(const hoidist::CategorySet& cats, const SplitSpec& split,
                                       bool training);

// Deterministic given (cats, n_scenes, seed, split, training). Training
// output never contains unseen pairs. Throws GenerationError naming the
// pair when a predicate cannot be satisfied.
std::vector<Scene> generate(const hoidist::CategorySet& cats, int n_scenes, uint64_t seed,
                            const SplitSpec& split, bool training, const GenOptions& opt = {});

// Feature grid: per cell [subj cov, subj dx, subj dy, pose, obj cov, obj dx,
// obj dy, per-class cov...], additive over overlapping objects.
int feature_channels(int n_obj_classes);
numcore::Tensor rasterize(const Scene& scene, int grid, int n_obj_classes);

// JSON-lines round trip (geometry only; features rasterized on load).
void save_scenes(const std::vector<Scene>& scenes, const std::string& path);
std::vector<Scene> load_scenes(const std::string& path);

}  // namespace synthworld
