#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "alfven/plan.hpp"

namespace alfven {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Output directory of one experiment. Every file is created through path(),
/// so the manifest lists exactly what was written.
class ArtifactSink {
public:
    explicit ArtifactSink(std::filesystem::path root);

    /// Absolute path of `relative`, with parent directories created.
    std::filesystem::path path(const std::filesystem::path& relative);
    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    [[nodiscard]] const std::vector<std::filesystem::path>& files() const { return files_; }

    /// Writes manifest.json: {"plan", "seed", "artifacts": [{"path", "bytes", "sha256"}]}
    /// sorted by path. The manifest does not list itself.
    void write_manifest(const std::string& plan_name, std::uint64_t seed) const;

private:
    std::filesystem::path root_;
    std::vector<std::filesystem::path> files_;
};

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    /// "<=" or ">=".
    std::string relation = "<=";
    bool pass = false;
    /// Set when the check could not be evaluated.
    std::string note;
};

/// One line: "PASS name value <= tolerance" (plus the note on failures).
std::string format_check(const CheckResult& c);

struct VerifyReport {
    std::vector<CheckResult> checks;
    [[nodiscard]] bool all_pass() const;
};

/// Conservation, travelling wave, div-curl corpus, separation, pressure decay,
/// linear energy slack and transport identity on the plan's configuration.
VerifyReport verify_suite(const ExperimentPlan& plan, std::ostream& log);

/// Runs the plan's mode into `out` and writes the manifest. Returns the exit
/// status: 0 on success, 1 when a verify check fails. Runtime failures throw.
int run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out, std::ostream& log);

}  // namespace alfven
