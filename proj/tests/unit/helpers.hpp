#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sbb/data_model.hpp"
#include "sbb/rng.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("sbb_test_" + tag + "_" + std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Small random survey dataset for property tests. Weights vary within
/// clusters; outcome is standard normal plus cluster noise.
inline sbb::SurveyDataset random_dataset(sbb::Rng& rng, bool with_outcome = true,
                                         bool cluster_constant_weights = false,
                                         std::uint64_t min_clusters_per_stratum = 1) {
    sbb::SurveyColumns cols;
    cols.outcome_name = with_outcome ? "y" : "";
    std::vector<double> outcome;
    const auto n_strata = 1 + rng.uniform_index(3);
    for (std::uint64_t h = 0; h < n_strata; ++h) {
        const auto n_clusters = min_clusters_per_stratum + rng.uniform_index(4);
        for (std::uint64_t c = 0; c < n_clusters; ++c) {
            const auto n_members = 1 + rng.uniform_index(5);
            const double cluster_weight = 0.2 + 4.0 * rng.uniform01();
            const double cluster_shift = rng.normal();
            for (std::uint64_t j = 0; j < n_members; ++j) {
                cols.strata.push_back("S" + std::to_string(h + 1));
                cols.clusters.push_back("S" + std::to_string(h + 1) + "C" + std::to_string(c + 1));
                cols.weights.push_back(cluster_constant_weights
                                           ? cluster_weight
                                           : 0.2 + 4.0 * rng.uniform01());
                if (with_outcome) {
                    outcome.push_back(rng.normal() + cluster_shift);
                }
            }
        }
    }
    if (with_outcome) {
        cols.outcome = std::move(outcome);
    }
    return sbb::SurveyDataset::from_columns(std::move(cols));
}

} // namespace testutil
