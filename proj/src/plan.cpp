#include "alfven/plan.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "alfven/initial_data.hpp"

namespace alfven {

using nlohmann::json;

Mode mode_from(const std::string& name) {
    if (name == "simulate") return Mode::simulate;
    if (name == "scatter") return Mode::scatter;
    if (name == "invert") return Mode::invert;
    if (name == "verify") return Mode::verify;
    if (name == "sweep") return Mode::sweep;
    throw Error("unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::simulate: return "simulate";
        case Mode::scatter: return "scatter";
        case Mode::invert: return "invert";
        case Mode::verify: return "verify";
        case Mode::sweep: return "sweep";
    }
    return "?";
}

PlanError::PlanError(std::string key, const std::string& message)
    : Error("plan key '" + key + "': " + message), key_(std::move(key)) {}

namespace {

/// One JSON object of the plan. Keys read through it are marked, and
/// finish() rejects anything left over.
class Section {
public:
    Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw PlanError(path_of(""), "must be an object");
    }

    [[nodiscard]] std::string path_of(const std::string& key) const {
        if (prefix_.empty()) return key;
        return key.empty() ? prefix_ : prefix_ + "." + key;
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const json& require(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw PlanError(path_of(key), "missing required key");
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        return convert<T>(key, j_.at(key));
    }

    template <class T>
    T need(const std::string& key) {
        return convert<T>(key, require(key));
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, path_of(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!seen_.count(key)) throw PlanError(path_of(key), "unknown key");
        }
    }

    template <class T>
    T convert(const std::string& key, const json& v) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw PlanError(path_of(key), "must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw PlanError(path_of(key), "must be an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw PlanError(path_of(key), "must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw PlanError(path_of(key), "must be a string");
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) throw PlanError(path_of(key), "must be an array of numbers");
            for (const auto& x : v)
                if (!x.is_number()) throw PlanError(path_of(key), "must be an array of numbers");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

/// A scalar or a three-element array.
template <class T>
std::array<T, 3> triple(Section& s, const std::string& key, const json& v) {
    if (v.is_array()) {
        if (v.size() != 3) throw PlanError(s.path_of(key), "must have three entries");
        return {s.convert<T>(key, v[0]), s.convert<T>(key, v[1]), s.convert<T>(key, v[2])};
    }
    const T x = s.convert<T>(key, v);
    return {x, x, x};
}

template <class F>
auto guarded(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const PlanError&) {
        throw;
    } catch (const Error& e) {
        throw PlanError(key, e.what());
    }
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PlanError("", std::string("not valid JSON: ") + e.what());
    }
    Section top(root, "");
    ExperimentPlan plan;
    plan.name = top.need<std::string>("name");
    if (plan.name.empty() || plan.name.find('/') != std::string::npos)
        throw PlanError("name", "must be a non-empty name without '/'");
    plan.mode = guarded("mode", [&] { return mode_from(top.need<std::string>("mode")); });

    SimConfig& c = plan.config;
    {
        top.require("grid");
        Section g = top.sub("grid");
        const auto n = triple<int>(g, "n", g.require("n"));
        const auto L = g.has("L") ? triple<double>(g, "L", g.require("L")) : std::array<double, 3>{20.0, 20.0, 20.0};
        c.grid = guarded("grid", [&] { return Grid3(n, L); });
        g.finish();
    }
    {
        Section t = top.sub("time");
        c.T = t.get<double>("T", c.T);
        c.dt = t.get<double>("dt", c.dt);
        c.output_stride = t.get<int>("stride", c.output_stride);
        plan.snapshot_every = t.get<int>("snapshot_every", plan.snapshot_every);
        if (plan.snapshot_every < 0) throw PlanError("time.snapshot_every", "must be non-negative");
        t.finish();
    }
    c.epsilon = top.get<double>("epsilon", c.epsilon);
    c.norm_order = top.get<int>("norm_order", c.norm_order);
    c.dealias = top.get<bool>("dealias", c.dealias);
    {
        Section w = top.sub("weight");
        c.weight.R = w.get<double>("R", c.weight.R);
        c.weight.delta = w.get<double>("delta", c.weight.delta);
        w.finish();
    }
    {
        Section r = top.sub("initial");
        auto& rec = c.recipe;
        if (r.has("kind"))
            rec.kind = guarded("initial.kind", [&] { return recipe_kind_from(r.need<std::string>("kind")); });
        else
            (void)r.get<std::string>("kind", "");
        const auto seed = r.get<std::int64_t>("seed", static_cast<std::int64_t>(rec.seed));
        if (seed < 0) throw PlanError("initial.seed", "must be non-negative");
        rec.seed = static_cast<std::uint64_t>(seed);
        rec.sigma = r.get<double>("sigma", rec.sigma);
        rec.band = r.get<int>("band", rec.band);
        if (rec.band < 1) throw PlanError("initial.band", "must be at least 1");
        const auto fam = r.get<std::string>("family", "plus");
        if (fam != "plus" && fam != "minus") throw PlanError("initial.family", "must be 'plus' or 'minus'");
        rec.one_family = fam == "plus" ? Family::plus : Family::minus;
        r.finish();
    }
    {
        Section e = top.sub("energy");
        plan.energy.max_order = e.get<int>("max_order", plan.energy.max_order);
        plan.energy.flux_order = e.get<int>("flux_order", plan.energy.flux_order);
        if (plan.energy.max_order < 0) throw PlanError("energy.max_order", "must be non-negative");
        if (plan.energy.flux_order < 0) throw PlanError("energy.flux_order", "must be non-negative");
        e.finish();
    }
    {
        Section s = top.sub("scatter");
        if (s.has("case"))
            plan.scatter.scatter_case =
                guarded("scatter.case", [&] { return scatter_case_from(s.need<std::string>("case")); });
        else
            (void)s.get<std::string>("case", "");
        plan.scatter.sobolev_order = s.get<int>("sobolev_order", plan.scatter.sobolev_order);
        if (plan.scatter.sobolev_order < 0 || plan.scatter.sobolev_order > kMaxSobolevOrder)
            throw PlanError("scatter.sobolev_order", "must lie in [0, " + std::to_string(kMaxSobolevOrder) + "]");
        s.finish();
    }
    {
        Section s = top.sub("invert");
        plan.invert.max_iterations = s.get<int>("max_iterations", plan.invert.max_iterations);
        plan.invert.tolerance = s.get<double>("tolerance", plan.invert.tolerance);
        if (plan.invert.max_iterations < 1) throw PlanError("invert.max_iterations", "must be at least 1");
        if (!(plan.invert.tolerance > 0.0)) throw PlanError("invert.tolerance", "must be positive");
        s.finish();
    }
    {
        Section s = top.sub("sweep");
        if (plan.mode == Mode::sweep) s.require("eps");
        plan.sweep.eps = s.get<std::vector<double>>("eps", {});
        plan.sweep.T = s.get<std::vector<double>>("T", {});
        if (plan.mode == Mode::sweep) {
            if (plan.sweep.eps.size() < 3) throw PlanError("sweep.eps", "needs at least three amplitudes");
            for (double e : plan.sweep.eps)
                if (!(e > 0.0)) throw PlanError("sweep.eps", "amplitudes must be positive");
        }
        s.finish();
    }
    {
        Section s = top.sub("verify");
        plan.verify.corpus_count = s.get<int>("corpus_count", plan.verify.corpus_count);
        if (plan.verify.corpus_count < 1) throw PlanError("verify.corpus_count", "must be at least 1");
        s.finish();
    }
    plan.output = top.get<std::string>("output", "");
    top.finish();

    guarded("config", [&] {
        c.validate();
        return 0;
    });
    for (double T : plan.sweep.T) {
        SimConfig probe = c;
        probe.T = T;
        guarded("sweep.T", [&] {
            probe.validate();
            return 0;
        });
    }
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("", "cannot read plan file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_plan(text.str());
}

std::string plan_json(const ExperimentPlan& plan) {
    const SimConfig& c = plan.config;
    json j;
    j["name"] = plan.name;
    j["mode"] = to_string(plan.mode);
    j["grid"] = {{"n", {c.grid.n[0], c.grid.n[1], c.grid.n[2]}}, {"L", {c.grid.L[0], c.grid.L[1], c.grid.L[2]}}};
    j["time"] = {{"T", c.T}, {"dt", c.dt}, {"stride", c.output_stride}, {"snapshot_every", plan.snapshot_every}};
    j["epsilon"] = c.epsilon;
    j["norm_order"] = c.norm_order;
    j["dealias"] = c.dealias;
    j["weight"] = {{"R", c.weight.R}, {"delta", c.weight.delta}};
    j["initial"] = {{"kind", to_string(c.recipe.kind)},
                    {"seed", c.recipe.seed},
                    {"sigma", c.recipe.sigma},
                    {"band", c.recipe.band},
                    {"family", name_of(c.recipe.one_family)}};
    j["energy"] = {{"max_order", plan.energy.max_order}, {"flux_order", plan.energy.flux_order}};
    j["scatter"] = {{"case", to_string(plan.scatter.scatter_case)}, {"sobolev_order", plan.scatter.sobolev_order}};
    j["invert"] = {{"max_iterations", plan.invert.max_iterations}, {"tolerance", plan.invert.tolerance}};
    j["sweep"] = {{"eps", plan.sweep.eps}, {"T", plan.sweep.T}};
    j["verify"] = {{"corpus_count", plan.verify.corpus_count}};
    j["output"] = plan.output.string();
    return j.dump(2) + "\n";
}

}  // namespace alfven
