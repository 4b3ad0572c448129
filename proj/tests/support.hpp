#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "vmin/rng.hpp"
#include "vmin/types.hpp"

namespace testsupport {

/// Unique scratch directory under the system temp dir, removed on exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path_ = base / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(i));
            if (!std::filesystem::exists(path_)) break;
        }
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline vmin::Matrix random_matrix(vmin::Rng& rng, vmin::Index rows, vmin::Index cols,
                                  double scale = 1.0) {
    vmin::Matrix m(rows, cols);
    for (vmin::Index i = 0; i < rows; ++i) {
        for (vmin::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

inline vmin::Vector random_vector(vmin::Rng& rng, vmin::Index size, double scale = 1.0) {
    vmin::Vector v(size);
    for (vmin::Index i = 0; i < size; ++i) v[i] = scale * rng.normal();
    return v;
}

/// Central finite difference of a scalar function at x, for oracles.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace testsupport
