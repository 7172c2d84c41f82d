#include "qtrabi/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qtrabi/errors.hpp"

namespace qtrabi::io {

std::string format_double(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

namespace {

double parse_real(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InputError("malformed number '" + text + "' in " + context);
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw InputError("malformed number '" + text + "' in " + context);
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char delim) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, delim)) {
        parts.push_back(item);
    }
    if (!text.empty() && text.back() == delim) {
        parts.emplace_back();
    }
    return parts;
}

}  // namespace

std::vector<double> linspace(double start, double stop, std::size_t count) {
    if (count == 0) {
        throw InputError("grid needs at least one point");
    }
    if (count == 1) {
        return {start};
    }
    std::vector<double> out(count);
    const double span = stop - start;
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = start + span * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = stop;
    return out;
}

std::vector<double> parse_range(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw InputError("range '" + text + "' is not start:stop:count");
    }
    const double start = parse_real(parts[0], "range '" + text + "'");
    const double stop = parse_real(parts[1], "range '" + text + "'");
    const double count = parse_real(parts[2], "range '" + text + "'");
    if (count < 1.0 || count != static_cast<double>(static_cast<long>(count))) {
        throw InputError("range count must be a positive integer in '" + text + "'");
    }
    if (count > 1.0 && !(stop > start)) {
        throw InputError("range '" + text + "' must have stop > start");
    }
    if (count == 1.0 && stop != start) {
        throw InputError("single-point range '" + text + "' needs start == stop");
    }
    return linspace(start, stop, static_cast<std::size_t>(count));
}

std::pair<double, double> parse_interval(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) {
        throw InputError("interval '" + text + "' is not lo:hi");
    }
    const double lo = parse_real(parts[0], "interval '" + text + "'");
    const double hi = parse_real(parts[1], "interval '" + text + "'");
    if (!(hi > lo)) {
        throw InputError("interval '" + text + "' must have hi > lo");
    }
    return {lo, hi};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        out.push_back(parse_real(part, "list '" + text + "'"));
    }
    if (out.empty()) {
        throw InputError("empty list");
    }
    return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::Row::sep() {
    if (!line_.empty()) {
        line_ += ',';
    }
}

CsvTable::Row& CsvTable::Row::operator<<(double v) {
    sep();
    line_ += format_double(v, 17);
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(int v) {
    sep();
    line_ += std::to_string(v);
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const std::string& v) {
    sep();
    line_ += v;
    return *this;
}

CsvTable::Row CsvTable::row() {
    lines_.emplace_back();
    return Row(lines_.back());
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        out += (i ? "," : "") + header_[i];
    }
    out += '\n';
    for (const auto& line : lines_) {
        out += line;
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    write_text(path, str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    write_text(path, value.dump(2) + "\n");
}

nlohmann::json to_json(const solver::SolverConfig& cfg) {
    return {
        {"eig_tol", cfg.eig_tol},
        {"trunc_tol", cfg.trunc_tol},
        {"energy_tol", cfg.energy_tol},
        {"initial_cutoff", cfg.initial_cutoff},
        {"max_cutoff", cfg.max_cutoff},
        {"dense_threshold", cfg.dense_threshold},
        {"krylov_basis", cfg.krylov_basis},
        {"krylov_keep", cfg.krylov_keep},
        {"max_matvecs", cfg.max_matvecs},
    };
}

nlohmann::json RunManifest::to_json() const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return {
        {"command", command},
        {"params", params},
        {"solver_config", io::to_json(solver_config)},
        {"tool_version", kToolVersion},
        {"timestamp", stamp},
        {"cache_hits", cache_hits},
        {"cache_misses", cache_misses},
    };
}

}  // namespace qtrabi::io
