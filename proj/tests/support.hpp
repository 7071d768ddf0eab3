#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "obh/ais.hpp"
#include "obh/rng.hpp"

namespace obh::test {

// Independent optimization baseline: pure uniform random search at a fixed
// evaluation budget. Used as the oracle the clonal optimizer must beat.
inline double random_search(const ais::Objective& objective, std::size_t evaluations,
                            std::uint64_t seed) {
    Rng rng(seed);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> genome(objective.bounds.size());
    for (std::size_t i = 0; i < evaluations; ++i) {
        for (std::size_t d = 0; d < genome.size(); ++d) {
            genome[d] = rng.uniform(objective.bounds[d].lo, objective.bounds[d].hi);
        }
        best = std::max(best, objective.fitness(genome));
    }
    return best;
}

// Plain recursive-definition edit distance; deliberately separate from the
// production DP implementation.
inline std::size_t edit_distance_reference(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
        }
    }
    return d[a.size()][b.size()];
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("obh_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace obh::test
