#include "qtrabi/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qtrabi/errors.hpp"
#include "qtrabi/io.hpp"

namespace qtrabi::io {

namespace fs = std::filesystem;
using nlohmann::json;

ResultCache::ResultCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
        throw Error("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }
}

std::string ResultCache::canonical_key(const PointKey& key, const solver::SolverConfig& cfg) {
    std::ostringstream out;
    out << "gamma=" << format_double(key.gamma, 15) << ";lambda=" << format_double(key.lambda, 15)
        << ";eta=" << format_double(key.eta, 15) << ";eig_tol=" << format_double(cfg.eig_tol, 15)
        << ";trunc_tol=" << format_double(cfg.trunc_tol, 15) << ";energy_tol=" << format_double(cfg.energy_tol, 15)
        << ";initial_cutoff=" << cfg.initial_cutoff << ";max_cutoff=" << cfg.max_cutoff
        << ";dense_threshold=" << cfg.dense_threshold << ";krylov_basis=" << cfg.krylov_basis
        << ";krylov_keep=" << cfg.krylov_keep << ";max_matvecs=" << cfg.max_matvecs;
    return out.str();
}

std::string ResultCache::hash_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

fs::path ResultCache::path_for(const std::string& canonical) const {
    return dir_ / (hash_hex(canonical) + ".json");
}

std::optional<PointResult> ResultCache::load(const PointKey& key, const solver::SolverConfig& cfg) {
    const std::string canonical = canonical_key(key, cfg);
    std::ifstream in(path_for(canonical));
    if (!in) {
        ++misses_;
        return std::nullopt;
    }
    try {
        const json j = json::parse(in);
        if (j.at("key").get<std::string>() != canonical) {
            ++misses_;
            return std::nullopt;
        }
        PointResult r;
        r.key = {j.at("gamma").get<double>(), j.at("lambda").get<double>(), j.at("eta").get<double>()};
        r.energy = j.at("energy").get<double>();
        r.cutoff_used = j.at("cutoff_used").get<int>();
        r.top_level_weight = j.at("top_level_weight").get<double>();
        r.residual = j.at("residual").get<double>();
        r.parity = j.at("parity").get<int>();
        const json& o = j.at("observables");
        r.observables = {o.at("e_g_scaled").get<double>(), o.at("n_ph").get<double>(), o.at("dp2").get<double>(),
                         o.at("dx2").get<double>(),        o.at("h_avg").get<double>(), o.at("x_avg").get<double>()};
        ++hits_;
        return r;
    } catch (const json::exception&) {
        // Unreadable record: recompute and overwrite.
        ++misses_;
        return std::nullopt;
    }
}

void ResultCache::store(const PointResult& r, const solver::SolverConfig& cfg) {
    const std::string canonical = canonical_key(r.key, cfg);
    const json j = {
        {"key", canonical},
        {"gamma", r.key.gamma},
        {"lambda", r.key.lambda},
        {"eta", r.key.eta},
        {"energy", r.energy},
        {"cutoff_used", r.cutoff_used},
        {"top_level_weight", r.top_level_weight},
        {"residual", r.residual},
        {"parity", r.parity},
        {"observables",
         {{"e_g_scaled", r.observables.e_g_scaled},
          {"n_ph", r.observables.n_ph},
          {"dp2", r.observables.dp2},
          {"dx2", r.observables.dx2},
          {"h_avg", r.observables.h_avg},
          {"x_avg", r.observables.x_avg}}},
    };
    const fs::path target = path_for(canonical);
    std::ostringstream tmp_name;
    tmp_name << target.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
             << "." << temp_counter_.fetch_add(1);
    const fs::path tmp = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write cache record " + tmp.string());
        }
        out << j.dump(1) << '\n';
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move cache record into place: " + target.string());
    }
}

fs::path resolve_cache_dir(const std::string& flag_value) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (const char* env = std::getenv("QTRABI_CACHE"); env != nullptr && *env != '\0') {
        return env;
    }
    return ".qtrabi-cache";
}

}  // namespace qtrabi::io
