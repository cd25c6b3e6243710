#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "alfven/experiment.hpp"
#include "alfven/parallel.hpp"
#include "alfven/plan.hpp"

namespace {

/// Exit statuses: 0 success, 1 a verify check failed, 2 usage or plan error,
/// 3 runtime failure.
constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;

/// Default output root when neither --out nor the plan names a directory.
constexpr const char* kOutputRootVariable = "ALFVEN_OUTPUT_ROOT";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear Alfven wave lab: runs one experiment plan"};
    std::string plan_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int threads = 1;
    app.add_option("--plan", plan_path, "JSON plan file")->required();
    app.add_option("--out", out_dir, "output directory (overrides the plan)");
    app.add_option("--seed", seed, "initial-data seed (overrides the plan)")->check(CLI::NonNegativeNumber);
    app.add_option("--threads", threads, "worker threads for data-parallel loops")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    alfven::ExperimentPlan plan;
    try {
        plan = alfven::load_plan(plan_path);
    } catch (const alfven::PlanError& e) {
        std::cerr << "alfven: usage error: " << e.what() << "\n";
        return kUsageError;
    }
    if (seed >= 0) plan.config.recipe.seed = static_cast<std::uint64_t>(seed);

    std::filesystem::path out;
    if (!out_dir.empty()) {
        out = out_dir;
    } else if (!plan.output.empty()) {
        out = plan.output;
    } else {
        const char* root = std::getenv(kOutputRootVariable);
        out = std::filesystem::path(root && *root ? root : "runs") / plan.name;
    }

    alfven::set_thread_count(threads);
    try {
        const int status = alfven::run_experiment(plan, out, std::cerr);
        std::cerr << "alfven: " << alfven::to_string(plan.mode) << " finished, artifacts in " << out.string()
                  << "\n";
        return status;
    } catch (const std::exception& e) {
        std::cerr << "alfven: error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
