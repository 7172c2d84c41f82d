#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qtrabi/eigensolver.hpp"

namespace qtrabi::io {

/// printf-style %.{digits}g with '.' as decimal separator.
std::string format_double(double value, int digits = 17);

/// `start:stop:count`, inclusive endpoints. Throws InputError.
std::vector<double> parse_range(const std::string& text);

/// `lo:hi` pair.
std::pair<double, double> parse_interval(const std::string& text);

/// Comma-separated reals.
std::vector<double> parse_list(const std::string& text);

std::vector<double> linspace(double start, double stop, std::size_t count);

/// CSV table with a fixed header; reals are written with 17 significant
/// digits and rows end in '\n'.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    class Row {
    public:
        Row& operator<<(double v);
        Row& operator<<(int v);
        Row& operator<<(const std::string& v);

    private:
        friend class CsvTable;
        explicit Row(std::string& line) : line_(line) {}
        void sep();
        std::string& line_;
    };

    Row row();
    std::size_t rows() const noexcept { return lines_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::string> lines_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
void write_text(const std::filesystem::path& path, const std::string& text);

inline constexpr const char* kToolVersion = "0.3.0";

struct RunManifest {
    std::string command;
    nlohmann::json params;
    solver::SolverConfig solver_config;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;

    nlohmann::json to_json() const;  // adds tool_version and a UTC timestamp
};

nlohmann::json to_json(const solver::SolverConfig& cfg);

}  // namespace qtrabi::io
