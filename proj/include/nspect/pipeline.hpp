#pragma once

#include <mutex>

#include "nspect/config.hpp"
#include "nspect/io.hpp"

namespace nspect {

/// Shared caches: rasters in memory, spectra in memory and optionally on
/// disk (keyed by domain hash, h, m, tol, seed). Insertion is synchronized;
/// cached values are immutable.
class Lab {
public:
    explicit Lab(std::string cache_dir = "");

    std::shared_ptr<const RasterDomain> raster(const Domain& d, double h);
    std::shared_ptr<const SpectrumResult> spectrum(const Domain& d, double h, int m, double tol,
                                                   uint64_t seed);

    const std::string& cache_dir() const { return cache_dir_; }

private:
    std::mutex mu_;
    std::map<std::pair<uint64_t, int64_t>, std::shared_ptr<const RasterDomain>> rasters_;
    std::map<std::tuple<uint64_t, int64_t, int, int64_t, uint64_t>,
             std::shared_ptr<const SpectrumResult>>
        spectra_;
    std::string cache_dir_;
};

/// Output sink for one command run: writes artifacts under out_dir and keeps
/// the manifest (config hash, version, per-step timings, file inventory).
/// Timings make the manifest itself non-deterministic; every other emitted
/// file is byte-stable for a fixed config and seed.
class RunContext {
public:
    RunContext(std::string out_dir, const ConfigFile& cfg, int jobs);

    const std::string& out_dir() const { return out_dir_; }
    int jobs() const { return jobs_; }
    Lab& lab() { return lab_; }

    std::string path(const std::string& filename) const;
    void emit_json(const std::string& filename, const Json& j);
    void emit_text(const std::string& filename, const std::string& content);
    void emit_csv(const std::string& filename, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows);

    template <class F>
    auto step(const std::string& name, F&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record_step(name, t0);
        } else {
            auto out = fn();
            record_step(name, t0);
            return out;
        }
    }

    void write_manifest();

private:
    void record_step(const std::string& name, std::chrono::steady_clock::time_point t0);
    std::string out_dir_;
    int jobs_;
    Lab lab_;
    Json manifest_;
    std::vector<std::string> files_;
};

struct CommandResult {
    int exit_code = 0;  // 0 pass, 1 violation, 2 inconclusive, 3 usage/io
    Json summary;
};

CommandResult cmd_spectrum(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_whitney(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_dimension(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_heatkernel(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_sobolev(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_perturb(const ConfigFile& cfg, RunContext& ctx);
CommandResult cmd_verify_all(const ConfigFile& cfg, RunContext& ctx);

}  // namespace nspect
