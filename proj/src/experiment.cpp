#include "alfven/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include "json.hpp"

#include "alfven/csv.hpp"
#include "alfven/diagnostics.hpp"
#include "alfven/initial_data.hpp"
#include "alfven/snapshot_io.hpp"
#include "alfven/spectral.hpp"

namespace alfven {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256: digest initialization failed");
    }
    std::vector<char> buffer(1 << 16);
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

ArtifactSink::ArtifactSink(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path ArtifactSink::path(const std::filesystem::path& relative) {
    const auto full = root_ / relative;
    std::filesystem::create_directories(full.parent_path());
    if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
    return full;
}

void ArtifactSink::write_manifest(const std::string& plan_name, std::uint64_t seed) const {
    auto sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& rel : sorted) {
        const auto full = root_ / rel;
        if (!std::filesystem::exists(full)) throw Error("artifact was registered but not written: " + rel.string());
        artifacts.push_back({{"path", rel.generic_string()},
                             {"bytes", std::filesystem::file_size(full)},
                             {"sha256", sha256_file(full)}});
    }
    const nlohmann::json manifest{{"plan", plan_name}, {"seed", seed}, {"artifacts", artifacts}};
    std::ofstream out(root_ / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw Error("cannot write manifest in " + root_.string());
}

std::string format_check(const CheckResult& c) {
    std::string line = (c.pass ? "PASS " : "FAIL ") + c.name + " " + format_number(c.value) + " " + c.relation + " " +
                       format_number(c.tolerance);
    if (!c.note.empty()) line += " (" + c.note + ")";
    return line;
}

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::map<std::string, std::string> seed_meta(const ExperimentPlan& plan) {
    return {{"seed", std::to_string(plan.config.recipe.seed)}, {"plan", plan.name}};
}

void write_state_artifact(ArtifactSink& sink, const std::filesystem::path& rel, const ElsasserState& s,
                          const ExperimentPlan& plan) {
    auto meta_rel = rel;
    meta_rel += ".meta";
    sink.path(meta_rel);
    write_state(sink.path(rel), s, plan.config.epsilon, plan.config.weight, seed_meta(plan));
}

void write_field_artifact(ArtifactSink& sink, const std::filesystem::path& rel, const ScatteringField& f,
                          const ExperimentPlan& plan) {
    auto meta_rel = rel;
    meta_rel += ".meta";
    sink.path(meta_rel);
    write_scattering_field(sink.path(rel), f, seed_meta(plan));
}

void write_steps_csv(const std::filesystem::path& path, const Trajectory& traj) {
    CsvWriter w(path, {"t", "l2_zplus", "l2_zminus", "max_gradp", "cfl"});
    for (const auto& r : traj.log) w.row({r.t, r.l2_zplus, r.l2_zminus, r.max_gradp, r.cfl});
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
}

ElsasserState scaled(const ElsasserState& s, double c) {
    ElsasserState out = s;
    out.z_plus = c * s.z_plus;
    out.z_minus = c * s.z_minus;
    return out;
}

ElsasserState difference(const ElsasserState& a, const ElsasserState& b) {
    ElsasserState out = a;
    out.z_plus = a.z_plus - b.z_plus;
    out.z_minus = a.z_minus - b.z_minus;
    return out;
}

double relative_to(double value, double reference) { return reference > 0.0 ? value / reference : value; }

constexpr ScatterCase kCases[] = {ScatterCase::a, ScatterCase::b, ScatterCase::c, ScatterCase::d};

void simulate(const ExperimentPlan& plan, ArtifactSink& sink, std::ostream& log) {
    log << "simulate: running " << plan.config.step_count() << " steps\n";
    const auto traj = run(plan.config);
    write_steps_csv(sink.path("steps.csv"), traj);
    const std::size_t last = traj.size() - 1;
    for (std::size_t s = 0; s <= last; ++s) {
        const bool keep = s == last || (plan.snapshot_every > 0 ? s % plan.snapshot_every == 0 : s == 0);
        if (!keep) continue;
        char name[64];
        std::snprintf(name, sizeof name, "snapshots/state_%04zu.alfv", s);
        write_state_artifact(sink, name, traj.states[s], plan);
    }
    log << "simulate: energy report\n";
    EnergyOptions opts;
    opts.max_order = plan.energy.max_order;
    opts.flux_order = plan.energy.flux_order;
    const auto report = energy_report(traj, opts);
    write_energy_csv(sink.path("energy.csv"), report);
    write_separation_csv(sink.path("separation.csv"), report.separation);
    write_pressure_decay_csv(sink.path("pressure_decay.csv"), report.pressure_decay);
    write_linear_energy_csv(sink.path("linear_energy.csv"), report.linear);
    write_text(sink.path("fitted_constants.txt"), fitted_constants_text(report));
}

void write_deviations_csv(const std::filesystem::path& path, const ScatterSet& set, const ElsasserState& x,
                          const ExperimentPlan& plan) {
    const int order = plan.scatter.sobolev_order;
    const double ref = state_norm(x, plan.config.weight, order);
    CsvWriter w(path, {"case", "deviation", "relative", "tail_bound_plus", "tail_bound_minus"});
    for (ScatterCase c : kCases) {
        const auto pair = set.pair(c);
        const double dev = pair_deviation(pair, x, order);
        w.row({to_string(c)}, {dev, relative_to(dev, ref), pair.plus.tail_bound, pair.minus.tail_bound});
    }
}

void scatter(const ExperimentPlan& plan, ArtifactSink& sink, std::ostream& log) {
    const SimConfig& c = plan.config;
    const auto x = make_initial_state(c.grid, c.recipe, c.epsilon, c.weight, c.norm_order);
    write_state_artifact(sink, "initial.alfv", x, plan);
    log << "scatter: forward and backward runs to |T| = " << std::abs(c.T) << "\n";
    const auto set = scatter_all(x, c);
    for (const auto* f : {&set.plus_future, &set.minus_future, &set.plus_past, &set.minus_past}) {
        const std::string name = to_string(f->manifold.kind);
        write_field_artifact(sink, "infinity/" + name + ".alfv", *f, plan);
        write_scattering_slice_csv(sink.path("infinity/" + name + ".csv"), *f);
    }
    write_deviations_csv(sink.path("deviations.csv"), set, x, plan);
}

void invert(const ExperimentPlan& plan, ArtifactSink& sink, std::ostream& log) {
    const SimConfig& c = plan.config;
    const int order = plan.scatter.sobolev_order;
    const auto x = make_initial_state(c.grid, c.recipe, c.epsilon, c.weight, c.norm_order);
    log << "invert: forward map of case " << to_string(plan.scatter.scatter_case) << "\n";
    const auto target = forward_map(plan.scatter.scatter_case, x, c);

    ElsasserState target_state = x;
    target_state.z_plus = target.plus.values;
    target_state.z_minus = target.minus.values;
    ElsasserState start = target_state;
    start.z_plus = leray_project(target_state.z_plus);
    start.z_minus = leray_project(target_state.z_minus);
    const double ref = state_norm(x, c.weight, order);

    std::vector<double> errors{relative_to(state_norm(difference(start, x), c.weight, order), ref)};
    std::vector<double> updates{state_norm(difference(start, target_state), c.weight, order)};
    ReconstructOptions opts;
    opts.max_iterations = plan.invert.max_iterations;
    opts.tolerance = plan.invert.tolerance;
    opts.order = order;
    opts.observer = [&](const ReconstructionRow& row, const ElsasserState& s) {
        errors.push_back(relative_to(state_norm(difference(s, x), c.weight, order), ref));
        updates.push_back(row.update_norm);
        log << "invert: iteration " << row.iteration << " update " << format_number(row.update_norm) << "\n";
    };
    const auto rec = reconstruct(target, c, opts);
    write_reconstruction_csv(sink.path("reconstruction.csv"), rec.log);
    CsvWriter w(sink.path("invert_errors.csv"), {"iteration", "relative_error", "update_norm", "contraction"});
    for (std::size_t k = 0; k < errors.size(); ++k) {
        const double contraction = k == 0 ? 0.0 : relative_to(updates[k], updates[k - 1]);
        w.row({static_cast<double>(k), errors[k], updates[k], contraction});
    }
    write_state_artifact(sink, "reconstructed.alfv", rec.state, plan);
    if (!rec.converged) throw Error("reconstruction did not converge within the iteration limit");
}

void sweep(const ExperimentPlan& plan, ArtifactSink& sink, std::ostream& log) {
    const SimConfig& base = plan.config;
    const int order = plan.scatter.sobolev_order;
    const auto unit = make_initial_state(base.grid, base.recipe, 1.0, base.weight, base.norm_order);
    const std::vector<double> horizons = plan.sweep.T.empty() ? std::vector<double>{base.T} : plan.sweep.T;
    CsvWriter points(sink.path("deviation_sweep.csv"), {"case", "T", "eps", "deviation", "relative", "c_fit"});
    CsvWriter slopes(sink.path("slopes.csv"), {"case", "T", "slope", "c_fit_mean", "c_fit_spread", "exact_linear"});
    for (double T : horizons) {
        std::vector<ScatterSet> sets;
        for (double e : plan.sweep.eps) {
            log << "sweep: T = " << T << " eps = " << e << "\n";
            SimConfig c = base;
            c.T = T;
            c.epsilon = e;
            const auto x = scaled(unit, e);
            sets.push_back(scatter_all(x, c));
            const auto dir = std::filesystem::path("points") / ("T_" + tag(T)) / ("eps_" + tag(e));
            write_deviations_csv(sink.path(dir / "deviations.csv"), sets.back(), x, plan);
        }
        for (ScatterCase k : kCases) {
            std::vector<ScatterPair> pairs;
            for (const auto& s : sets) pairs.push_back(s.pair(k));
            const auto lin = linearization_from(unit, plan.sweep.eps, pairs, base.weight, order);
            double mean = 0.0, lo = lin.c_fit.front(), hi = lin.c_fit.front();
            for (double v : lin.c_fit) {
                mean += v / lin.c_fit.size();
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            for (std::size_t i = 0; i < lin.eps.size(); ++i)
                points.row({to_string(k)}, {T, lin.eps[i], lin.deviation[i], lin.relative[i], lin.c_fit[i]});
            slopes.row({to_string(k)}, {T, lin.slope, mean, relative_to(hi - lo, mean), lin.exact_linear ? 1.0 : 0.0});
        }
    }
}

/// Evaluates one check; exceptions turn it into a failure carrying the message.
CheckResult evaluate(const std::string& name, double tolerance, const std::string& relation,
                     const std::function<double()>& measure) {
    CheckResult r;
    r.name = name;
    r.tolerance = tolerance;
    r.relation = relation;
    try {
        r.value = measure();
        r.pass = relation == "<=" ? r.value <= tolerance : r.value >= tolerance;
        if (!std::isfinite(r.value)) r.pass = false;
    } catch (const std::exception& e) {
        r.value = std::nan("");
        r.pass = false;
        r.note = e.what();
    }
    return r;
}

int refined(int n) {
    const int m = n + n / 2;
    return m + (m % 2);
}

}  // namespace

VerifyReport verify_suite(const ExperimentPlan& plan, std::ostream& log) {
    const SimConfig& c = plan.config;
    const double eps = c.epsilon;
    VerifyReport report;
    auto add = [&](CheckResult r) {
        log << format_check(r) << "\n";
        report.checks.push_back(std::move(r));
    };

    log << "verify: main run\n";
    std::optional<Trajectory> traj;
    std::string run_error;
    try {
        traj = run(c);
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    auto need_run = [&]() -> const Trajectory& {
        if (!traj) throw Error("run failed: " + run_error);
        return *traj;
    };

    for (Family f : {Family::plus, Family::minus}) {
        add(evaluate(std::string("conservation_") + name_of(f), 1e-6, "<=", [&] {
            const auto& log_rows = need_run().log;
            auto l2 = [&](const StepRow& r) { return f == Family::plus ? r.l2_zplus : r.l2_zminus; };
            const double e0 = l2(log_rows.front());
            double drift = 0.0;
            for (const auto& r : log_rows) drift = std::max(drift, std::abs(l2(r) - e0));
            return relative_to(drift, e0);
        }));
    }

    log << "verify: travelling wave\n";
    {
        SimConfig one = c;
        one.recipe.kind = InitialRecipe::Kind::one_family;
        one.output_stride = std::max(1, one.step_count());
        std::optional<Trajectory> wave;
        std::string wave_error;
        try {
            wave = run(one);
        } catch (const std::exception& e) {
            wave_error = e.what();
        }
        auto need_wave = [&]() -> const Trajectory& {
            if (!wave) throw Error("run failed: " + wave_error);
            return *wave;
        };
        add(evaluate("travelling_wave_error", 2e-7 * eps, "<=", [&] {
            const auto& w = need_wave();
            const Family f = one.recipe.one_family;
            const double shift = f == Family::plus ? w.t_end() : -w.t_end();
            return max_norm(w.states.back().field(f) - translate_x3(w.states.front().field(f), shift));
        }));
        add(evaluate("travelling_wave_pressure", 1e-15, "<=", [&] {
            double m = 0.0;
            for (const auto& p : need_wave().pressures) m = std::max(m, max_abs(p));
            return m;
        }));
    }

    log << "verify: div-curl corpus\n";
    add(evaluate("divcurl_refinement", 0.25, "<=", [&] {
        const int count = plan.verify.corpus_count;
        const auto coarse = divcurl_corpus(c.grid, count, c.recipe.seed, c.weight);
        const Grid3 fine(refined(c.grid.n[0]), refined(c.grid.n[1]), refined(c.grid.n[2]), c.grid.L[0], c.grid.L[1],
                         c.grid.L[2]);
        const auto finer = divcurl_corpus(fine, count, c.recipe.seed, c.weight);
        return std::abs(finer.max_ratio() / coarse.max_ratio() - 1.0);
    }));

    log << "verify: energy diagnostics\n";
    std::optional<EnergyReport> energy;
    std::string energy_error;
    try {
        EnergyOptions opts;
        opts.max_order = 0;
        opts.flux_order = plan.energy.flux_order;
        energy = energy_report(need_run(), opts);
    } catch (const std::exception& e) {
        energy_error = e.what();
    }
    auto constant = [&](const std::string& key) {
        if (!energy) throw Error("energy report failed: " + energy_error);
        return energy->fitted_constants.at(key);
    };
    add(evaluate("energy_ratio", 4.0, "<=", [&] { return constant("energy_ratio"); }));
    add(evaluate("separation_min_weight_ratio", 0.5 * c.weight.R, ">=",
                 [&] { return constant("separation_min_weight_ratio"); }));
    add(evaluate("separation_max_cross_ratio", 1.0, "<=", [&] { return constant("separation_max_cross_ratio"); }));
    for (int l = 1; l <= 3; ++l) {
        const std::string key = "pressure_decay_end_ratio_l" + std::to_string(l);
        add(evaluate(key, 3.0, "<=", [&] { return constant(key); }));
    }
    add(evaluate("linear_energy_slack_relative", -1e-4, ">=", [&] { return constant("linear_energy_slack_relative"); }));

    log << "verify: transport identity\n";
    for (Family f : {Family::plus, Family::minus}) {
        add(evaluate(std::string("transport_identity_") + name_of(f), 1e-4 * eps, "<=", [&] {
            const auto& t = need_run();
            return transport_identity_check(t, f, t.t_end()).max_discrepancy;
        }));
    }
    return report;
}

int run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out, std::ostream& log) {
    ArtifactSink sink(out);
    write_text(sink.path("plan.json"), plan_json(plan));
    int status = 0;
    switch (plan.mode) {
        case Mode::simulate: simulate(plan, sink, log); break;
        case Mode::scatter: scatter(plan, sink, log); break;
        case Mode::invert: invert(plan, sink, log); break;
        case Mode::sweep: sweep(plan, sink, log); break;
        case Mode::verify: {
            const auto report = verify_suite(plan, log);
            CsvWriter w(sink.path("verify.csv"), {"check", "relation", "value", "tolerance", "pass"});
            for (const auto& chk : report.checks)
                w.row({chk.name, chk.relation}, {chk.value, chk.tolerance, chk.pass ? 1.0 : 0.0});
            status = report.all_pass() ? 0 : 1;
            break;
        }
    }
    sink.write_manifest(plan.name, plan.config.recipe.seed);
    return status;
}

}  // namespace alfven
