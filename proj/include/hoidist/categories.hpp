#pragma once

#include <string>
#include <utility>
#include <vector>

namespace hoidist {

// Category universe: object classes, interaction verbs, and the valid
// (interaction, object) combinations. Loaded from JSON:
//   {"objects": [...], "interactions": [...], "hoi_pairs": [[i_idx, o_idx], ...]}
struct CategorySet {
    std::vector<std::string> objects;
    std::vector<std::string> interactions;
    std::vector<std::pair<int, int>> hoi_pairs;  // (interaction index, object index)

    int n_objects() const { return static_cast<int>(objects.size()); }
    int n_interactions() const { return static_cast<int>(interactions.size()); }
    int n_pairs() const { return static_cast<int>(hoi_pairs.size()); }

    // "<interaction> a/an <object>", e.g. "throw an apple".
    std::string pair_text(int pair_id) const;

    // Throws ConfigError on duplicates or out-of-range pair indices.
    void validate() const;

    static CategorySet from_json_file(const std::string& path);
    void to_json_file(const std::string& path) const;
};

}  // namespace hoidist
