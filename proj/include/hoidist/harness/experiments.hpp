#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hoidist/harness/train.hpp"

namespace harness {

// Ablation suites: `components` walks the component ladder; the others vary
// one knob each (loss variants, sampling strategies, space bases, and the
// K / N_s / lambda hyper grid). One CSV row per configuration, schema-stable
// across suites.
extern const std::vector<std::string> kAblationColumns;

std::vector<std::string> ablation_suites();

void run_ablation(const std::string& suite, const RunConfig& base, const std::string& data_dir,
                  const std::string& out_csv, const std::string& work_dir);

// Trains each (N_q, N_p) entry under an equal parameter budget; throws
// ConfigError when budgets differ. CSV: one row per entry.
extern const std::vector<std::string> kSweepColumns;

void sweep_pattern_dim(const std::vector<std::pair<int, int>>& entries, const RunConfig& base,
                       const std::string& data_dir, const std::string& out_csv,
                       const std::string& work_dir);

// Per-category distribution exports: variance.csv (sigma stats and parameter
// counts per category), space.csv (mu norm / mean sigma), and cosine.csv
// (pairwise cosine of pooled category means within each group).
void export_dist(const RunConfig& cfg, const std::string& checkpoint, const std::string& data_dir,
                 const std::string& out_dir);

}  // namespace harness
