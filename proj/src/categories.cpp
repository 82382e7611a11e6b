#include "hoidist/categories.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "hoidist/errors.hpp"

namespace hoidist {

using nlohmann::json;

std::string CategorySet::pair_text(int pair_id) const {
    const auto& [ii, oi] = hoi_pairs.at(static_cast<size_t>(pair_id));
    const std::string& obj = objects.at(static_cast<size_t>(oi));
    const bool vowel = !obj.empty() && std::string("aeiouAEIOU").find(obj[0]) != std::string::npos;
    return interactions.at(static_cast<size_t>(ii)) + (vowel ? " an " : " a ") + obj;
}

void CategorySet::validate() const {
    std::set<std::string> seen;
    for (const auto& o : objects)
        if (!seen.insert("o:" + o).second)
            throw ConfigError("duplicate object category: " + o);
    for (const auto& i : interactions)
        if (!seen.insert("i:" + i).second)
            throw ConfigError("duplicate interaction category: " + i);
    std::set<std::pair<int, int>> pairs;
    for (const auto& [ii, oi] : hoi_pairs) {
        if (ii < 0 || ii >= n_interactions() || oi < 0 || oi >= n_objects())
            throw ConfigError("hoi pair index out of range");
        if (!pairs.insert({ii, oi}).second)
            throw ConfigError("duplicate hoi pair");
    }
}

CategorySet CategorySet::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open category file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad category JSON in " + path + ": " + e.what());
    }
    CategorySet c;
    c.objects = j.at("objects").get<std::vector<std::string>>();
    c.interactions = j.at("interactions").get<std::vector<std::string>>();
    for (const auto& p : j.at("hoi_pairs"))
        c.hoi_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    c.validate();
    return c;
}

void CategorySet::to_json_file(const std::string& path) const {
    json j;
    j["objects"] = objects;
    j["interactions"] = interactions;
    json pairs = json::array();
    for (const auto& [ii, oi] : hoi_pairs)
        pairs.push_back(json::array({ii, oi}));
    j["hoi_pairs"] = pairs;
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw ConfigError("cannot write category file: " + path);
    f << j.dump(2) << "\n";
}

}  // namespace hoidist
