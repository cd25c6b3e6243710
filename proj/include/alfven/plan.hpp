#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alfven/diagnostics.hpp"
#include "alfven/scattering.hpp"
#include "alfven/solver.hpp"

namespace alfven {

enum class Mode { simulate, scatter, invert, verify, sweep };

Mode mode_from(const std::string& name);
std::string to_string(Mode mode);

/// Invalid or incomplete plan. `key()` is the dotted path of the offending
/// entry, e.g. "grid.n".
class PlanError : public Error {
public:
    PlanError(std::string key, const std::string& message);
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct EnergySettings {
    int max_order = kDefaultMaxOrder;
    int flux_order = 0;
};

struct ScatterSettings {
    ScatterCase scatter_case = ScatterCase::a;
    int sobolev_order = kDefaultSobolevOrder;
};

struct InvertSettings {
    int max_iterations = 5;
    double tolerance = 1e-5;
};

struct SweepSettings {
    std::vector<double> eps;
    /// Horizons; empty means the config's T only.
    std::vector<double> T;
};

struct VerifySettings {
    /// Random fields in each div-curl corpus.
    int corpus_count = 20;
};

struct ExperimentPlan {
    std::string name;
    Mode mode = Mode::simulate;
    SimConfig config;
    EnergySettings energy;
    ScatterSettings scatter;
    InvertSettings invert;
    SweepSettings sweep;
    VerifySettings verify;
    /// Every stored snapshot whose index is a multiple of this is written as a
    /// container (simulate mode); 0 writes the first and last only.
    int snapshot_every = 0;
    /// Empty when the plan does not name one.
    std::filesystem::path output;
};

/// Parses a JSON plan. Missing required keys, unknown keys, wrong types and
/// values rejected by the configuration all raise PlanError naming the key.
ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Canonical JSON of a plan (every field, defaults filled in, sorted keys).
std::string plan_json(const ExperimentPlan& plan);

}  // namespace alfven
