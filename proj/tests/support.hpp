#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "flatcyl/spectral_core.hpp"

namespace flatcyl::testkit {

/// Random real field with modes in |k1| <= b1, k2 <= b2 and amplitude `amp`.
inline SpectrumField random_field(Truncation tr, int b1, int b2, std::mt19937_64& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    SpectrumField f(tr);
    for (int k1 = 0; k1 <= std::min(b1, tr.k1max); ++k1)
        for (int k2 = 0; k2 <= std::min(b2, tr.k2max); ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            if (k1 == 0) {
                f(0, k2) = u(rng);
            } else {
                f(k1, k2) = {u(rng), u(rng)};
                f(-k1, k2) = std::conj(f(k1, k2));
            }
        }
    return f;
}

inline double max_diff(const ModeArray& a, const ModeArray& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

/// Columns of a CSV file with a header row; empty cells read as NaN.
struct Csv {
    std::vector<std::string> header;
    std::map<std::string, std::vector<double>> col;
    std::size_t rows = 0;
};

inline Csv read_csv(const std::filesystem::path& p) {
    std::ifstream is(p);
    Csv c;
    std::string line;
    if (!std::getline(is, line)) return c;
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) c.header.push_back(h);
    while (std::getline(is, line)) {
        std::stringstream ls(line);
        std::string cell;
        for (const auto& h : c.header) {
            if (!std::getline(ls, cell, ',')) cell.clear();
            c.col[h].push_back(cell.empty() ? std::nan("") : std::stod(cell));
        }
        ++c.rows;
    }
    return c;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("flatcyl_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace flatcyl::testkit
