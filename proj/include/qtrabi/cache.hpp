#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qtrabi/eigensolver.hpp"
#include "qtrabi/point.hpp"

namespace qtrabi::io {

/// On-disk cache of PointResult records, one JSON file per key.
///
/// The key is the canonical text of (gamma, lambda, eta, solver config) with
/// every real printed to 15 significant digits; the file name is its 64-bit
/// FNV-1a hash and the full text is stored in the record and compared on
/// load, so a hash collision reads as a miss. Writes go to a temporary file
/// that is renamed into place.
class ResultCache {
public:
    explicit ResultCache(std::filesystem::path dir);

    const std::filesystem::path& directory() const noexcept { return dir_; }

    std::optional<PointResult> load(const PointKey& key, const solver::SolverConfig& cfg);
    void store(const PointResult& result, const solver::SolverConfig& cfg);

    std::uint64_t hits() const noexcept { return hits_.load(); }
    std::uint64_t misses() const noexcept { return misses_.load(); }

    static std::string canonical_key(const PointKey& key, const solver::SolverConfig& cfg);
    static std::string hash_hex(const std::string& text);

private:
    std::filesystem::path path_for(const std::string& canonical) const;

    std::filesystem::path dir_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> temp_counter_{0};
};

/// Cache directory from an explicit flag, else $QTRABI_CACHE, else ./.qtrabi-cache.
std::filesystem::path resolve_cache_dir(const std::string& flag_value);

}  // namespace qtrabi::io
