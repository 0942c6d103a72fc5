#include "crb/config.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace crb {

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object() && !j_.is_null()) fail(path_.empty() ? "/" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        const std::string where = path_ + "/" + key;
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(where, "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(where, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
                fail(where, "expected a non-negative integer");
            return v.get<std::uint64_t>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(where, "expected an integer");
            const auto x = v.get<long long>();
            if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) fail(where, "out of range");
            return static_cast<T>(x);
        } else {
            // "inf" is accepted so stopping tolerances can be disabled.
            if (v.is_string() && v == "inf") return std::numeric_limits<double>::infinity();
            if (!v.is_number()) fail(where, "expected a number");
            return v.get<double>();
        }
    }

    /// Raw value, marked as used; null when absent.
    json raw(const std::string& key) {
        used_.insert(key);
        return has(key) ? j_.at(key) : json();
    }

    Section child(const std::string& key) {
        used_.insert(key);
        return Section(has(key) ? j_.at(key) : null_, path_ + "/" + key);
    }

    const std::string& path() const { return path_; }

    void finish() const {
        if (!j_.is_object()) return;
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) fail(path_ + "/" + k, "unknown key");
    }

    [[noreturn]] static void fail(const std::string& where, const std::string& what) {
        throw ConfigError(where + ": " + what);
    }

private:
    static inline const json null_{};
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

json number_or_inf(double x) { return std::isinf(x) ? json("inf") : json(x); }

void parse_dr(Section& s, dr::DrConfig& c) {
    c.num_users = s.get("num_users", c.num_users);
    c.num_contexts = s.get("num_contexts", c.num_contexts);
    c.fatigue_levels = s.get("fatigue_levels", c.fatigue_levels);
    const json ratio = s.raw("selection_ratio");
    if (ratio.is_number()) {
        c.selection_ratio.assign(static_cast<std::size_t>(std::max(0, c.num_contexts)), ratio.get<double>());
    } else if (ratio.is_array()) {
        c.selection_ratio.clear();
        for (const auto& x : ratio) {
            if (!x.is_number()) Section::fail(s.path() + "/selection_ratio", "expected numbers");
            c.selection_ratio.push_back(x.get<double>());
        }
    } else if (!ratio.is_null()) {
        Section::fail(s.path() + "/selection_ratio", "expected a number or an array of numbers");
    }
    c.discount = s.get("discount", c.discount);
    c.load_low = s.get("load_low", c.load_low);
    c.load_high = s.get("load_high", c.load_high);
    c.seed = s.get("seed", c.seed);
    Section f = s.child("fatigue");
    c.fatigue.p_up = f.get("p_up", c.fatigue.p_up);
    c.fatigue.p_down = f.get("p_down", c.fatigue.p_down);
    c.fatigue.s0 = f.get("s0", c.fatigue.s0);
    c.fatigue.s1 = f.get("s1", c.fatigue.s1);
    c.fatigue.s2 = f.get("s2", c.fatigue.s2);
    c.fatigue.sigma_min = f.get("sigma_min", c.fatigue.sigma_min);
    c.fatigue.sigma_max = f.get("sigma_max", c.fatigue.sigma_max);
    f.finish();
    const auto problems = dr::validate_config(c);
    if (!problems.empty()) Section::fail(s.path(), problems.front());
}

void parse_random(Section& s, RandomInstanceSpec& r) {
    r.num_arms = s.get("num_arms", r.num_arms);
    r.num_contexts = s.get("num_contexts", r.num_contexts);
    r.num_states = s.get("num_states", r.num_states);
    r.budget = s.get("budget", r.budget);
    r.discount = s.get("discount", r.discount);
    r.reward_max = s.get("reward_max", r.reward_max);
    r.homogeneous = s.get("homogeneous", r.homogeneous);
    if (r.num_arms < 1 || r.num_contexts < 1 || r.num_states < 1) Section::fail(s.path(), "sizes must be positive");
    if (!(r.discount > 0.0 && r.discount < 1.0)) Section::fail(s.path() + "/discount", "must lie in (0, 1)");
}

json random_to_json(const RandomInstanceSpec& r) {
    return {{"num_arms", r.num_arms},     {"num_contexts", r.num_contexts}, {"num_states", r.num_states},
            {"budget", r.budget},         {"discount", r.discount},         {"reward_max", r.reward_max},
            {"homogeneous", r.homogeneous}};
}

json dr_to_json(const dr::DrConfig& c) {
    std::vector<double> ratio(static_cast<std::size_t>(c.num_contexts));
    for (int g = 0; g < c.num_contexts; ++g) ratio[static_cast<std::size_t>(g)] = c.ratio(g);
    return {{"num_users", c.num_users},
            {"num_contexts", c.num_contexts},
            {"fatigue_levels", c.fatigue_levels},
            {"selection_ratio", ratio},
            {"discount", c.discount},
            {"load_low", c.load_low},
            {"load_high", c.load_high},
            {"seed", c.seed},
            {"fatigue",
             {{"p_up", c.fatigue.p_up},
              {"p_down", c.fatigue.p_down},
              {"s0", c.fatigue.s0},
              {"s1", c.fatigue.s1},
              {"s2", c.fatigue.s2},
              {"sigma_min", c.fatigue.sigma_min},
              {"sigma_max", c.fatigue.sigma_max}}}};
}

template <class E, class F>
E parse_enum(Section& s, const std::string& key, E fallback, F from_string) {
    const std::string name = s.get<std::string>(key, "");
    if (name.empty()) return fallback;
    try {
        return from_string(name);
    } catch (const std::invalid_argument& e) {
        Section::fail(s.path() + "/" + key, e.what());
    }
}

Exec exec_from_string(const std::string& s) {
    if (s == "parallel") return Exec::parallel;
    if (s == "serial") return Exec::serial;
    throw std::invalid_argument("unknown exec '" + s + "' (expected parallel or serial)");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c;
    Section root(doc, "");
    c.seed = root.get("seed", c.seed);
    c.exec = parse_enum(root, "exec", c.exec, exec_from_string);
    root.raw("profiles");

    {
        Section s = root.child("instance");
        auto& ic = c.instance;
        ic.builder = s.get<std::string>("builder", ic.builder);
        ic.initial = s.raw("initial");
        if (ic.builder == "demand_response") {
            parse_dr(s, ic.dr);  // DR keys live directly in the instance section
            s.finish();
        } else if (ic.builder == "inline") {
            ic.inline_instance = s.raw("instance");
            if (ic.inline_instance.is_null()) Section::fail(s.path() + "/instance", "missing");
            try {
                instance_from_json(ic.inline_instance, s.path() + "/instance");
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            s.finish();
        } else if (ic.builder == "random") {
            parse_random(s, ic.random);
            ic.random_seed = s.get("seed", ic.random_seed);
            s.finish();
        } else {
            Section::fail(s.path() + "/builder", "unknown builder '" + ic.builder +
                                                     "' (expected demand_response, inline, random or file)");
        }
    }
    {
        Section s = root.child("dual");
        c.dual.epsilon = s.get("epsilon", c.dual.epsilon);
        c.dual.max_iters = s.get("max_iters", c.dual.max_iters);
        c.dual.arm.tol = s.get("value_tol", c.dual.arm.tol);
        c.dual.arm.max_iters = s.get("value_max_iters", c.dual.arm.max_iters);
        c.dual.warm_start = s.get("warm_start", c.dual.warm_start);
        Section st = s.child("step");
        c.dual.step.kind = parse_enum(st, "kind", c.dual.step.kind, step_kind_from_string);
        c.dual.step.delta0 = st.get("delta0", c.dual.step.delta0);
        c.dual.step.kappa = st.get("kappa", c.dual.step.kappa);
        c.dual.step.shrink = st.get("shrink", c.dual.step.shrink);
        c.dual.step.grow = st.get("grow", c.dual.step.grow);
        st.finish();
        s.finish();
        if (!(c.dual.epsilon > 0.0)) Section::fail("/dual/epsilon", "must be positive");
        if (c.dual.max_iters < 1) Section::fail("/dual/max_iters", "must be at least 1");
        if (!(c.dual.arm.tol > 0.0)) Section::fail("/dual/value_tol", "must be positive");
        if (!(c.dual.step.delta0 > 0.0)) Section::fail("/dual/step/delta0", "must be positive");
    }
    c.dual.exec = c.exec;
    {
        Section s = root.child("selection");
        c.selection.mode = parse_enum(s, "mode", c.selection.mode, selection_mode_from_string);
        c.selection.tie_break = parse_enum(s, "tie_break", c.selection.tie_break, tie_break_from_string);
        s.finish();
    }
    {
        Section s = root.child("simulation");
        c.simulation.horizon = s.get("horizon", c.simulation.horizon);
        c.simulation.runs = s.get("runs", c.simulation.runs);
        s.finish();
        if (c.simulation.horizon < 0) Section::fail("/simulation/horizon", "must be non-negative");
        if (c.simulation.runs < 1) Section::fail("/simulation/runs", "must be at least 1");
    }
    {
        Section s = root.child("sweep");
        const json n = s.raw("num_users");
        if (!n.is_null()) {
            if (!n.is_array() || n.empty()) Section::fail("/sweep/num_users", "expected a non-empty array");
            c.sweep.num_users.clear();
            for (const auto& x : n) {
                if (!x.is_number_integer() || x.get<int>() < 1)
                    Section::fail("/sweep/num_users", "expected positive integers");
                c.sweep.num_users.push_back(x.get<int>());
            }
        }
        c.sweep.runs = s.get("runs", c.sweep.runs);
        s.finish();
        if (c.sweep.runs < 2) Section::fail("/sweep/runs", "must be at least 2");
    }
    {
        Section s = root.child("baseline");
        c.baseline.min_win_rate = s.get("min_win_rate", c.baseline.min_win_rate);
        c.baseline.write_trajectory = s.get("write_trajectory", c.baseline.write_trajectory);
        s.finish();
    }
    {
        Section s = root.child("online");
        auto& o = c.online;
        o.epochs = s.get("epochs", o.epochs);
        o.epoch_length = s.get("epoch_length", o.epoch_length);
        o.epsilon0 = s.get("epsilon0", o.epsilon0);
        o.estimator = parse_enum(s, "estimator", o.estimator, estimator_from_string);
        o.pool_arms = s.get("pool_arms", o.pool_arms);
        o.warm_start_lambda = s.get("warm_start_lambda", o.warm_start_lambda);
        o.burn_in_epochs = s.get("burn_in_epochs", o.burn_in_epochs);
        o.final_epochs = s.get("final_epochs", o.final_epochs);
        o.tv_min_visits = s.get("tv_min_visits", o.tv_min_visits);
        o.tv_threshold = s.get("tv_threshold", o.tv_threshold);
        o.reward_tolerance = s.get("reward_tolerance", o.reward_tolerance);
        o.write_trace = s.get("write_trace", o.write_trace);
        s.finish();
        if (o.epochs < 1) Section::fail("/online/epochs", "must be at least 1");
        if (o.epoch_length < 1) Section::fail("/online/epoch_length", "must be at least 1");
        if (o.final_epochs < 1 || o.final_epochs > o.epochs)
            Section::fail("/online/final_epochs", "must lie in [1, epochs]");
        if (o.burn_in_epochs < 0 || o.burn_in_epochs >= o.epochs)
            Section::fail("/online/burn_in_epochs", "must lie in [0, epochs)");
    }
    {
        Section s = root.child("sandwich");
        auto& w = c.sandwich;
        w.source = s.get<std::string>("source", w.source);
        if (w.source != "random" && w.source != "instance")
            Section::fail("/sandwich/source", "expected random or instance");
        w.instances = s.get("instances", w.instances);
        Section r = s.child("random");
        parse_random(r, w.random);
        r.finish();
        w.horizon = s.get("horizon", w.horizon);
        w.runs = s.get("runs", w.runs);
        s.finish();
        if (w.instances < 1) Section::fail("/sandwich/instances", "must be at least 1");
        if (w.runs < 2) Section::fail("/sandwich/runs", "must be at least 2");
    }
    {
        Section s = root.child("activation");
        auto& l = c.activation;
        l.samples = s.get("samples", l.samples);
        l.steady_burn_in = s.get("steady_burn_in", l.steady_burn_in);
        l.steady_samples = s.get("steady_samples", l.steady_samples);
        l.steady_tv_tolerance = s.get("steady_tv_tolerance", l.steady_tv_tolerance);
        s.finish();
        if (l.samples < 2) Section::fail("/activation/samples", "must be at least 2");
    }
    root.finish();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["exec"] = std::string(to_string(c.exec));
    json inst;
    const auto& ic = c.instance;
    if (ic.builder == "demand_response") {
        inst = dr_to_json(ic.dr);
    } else if (ic.builder == "inline") {
        inst["instance"] = ic.inline_instance;
    } else {
        inst = random_to_json(ic.random);
        inst["seed"] = ic.random_seed;
    }
    inst["builder"] = ic.builder;
    if (!ic.initial.is_null()) inst["initial"] = ic.initial;
    j["instance"] = std::move(inst);
    j["dual"] = {{"epsilon", number_or_inf(c.dual.epsilon)},
                 {"max_iters", c.dual.max_iters},
                 {"value_tol", c.dual.arm.tol},
                 {"value_max_iters", c.dual.arm.max_iters},
                 {"warm_start", c.dual.warm_start},
                 {"step",
                  {{"kind", to_string(c.dual.step.kind)},
                   {"delta0", c.dual.step.delta0},
                   {"kappa", c.dual.step.kappa},
                   {"shrink", c.dual.step.shrink},
                   {"grow", c.dual.step.grow}}}};
    j["selection"] = {{"mode", to_string(c.selection.mode)}, {"tie_break", to_string(c.selection.tie_break)}};
    j["simulation"] = {{"horizon", c.simulation.horizon}, {"runs", c.simulation.runs}};
    j["sweep"] = {{"num_users", c.sweep.num_users}, {"runs", c.sweep.runs}};
    j["baseline"] = {{"min_win_rate", c.baseline.min_win_rate}, {"write_trajectory", c.baseline.write_trajectory}};
    const auto& o = c.online;
    j["online"] = {{"epochs", o.epochs},
                   {"epoch_length", o.epoch_length},
                   {"epsilon0", o.epsilon0},
                   {"estimator", to_string(o.estimator)},
                   {"pool_arms", o.pool_arms},
                   {"warm_start_lambda", o.warm_start_lambda},
                   {"burn_in_epochs", o.burn_in_epochs},
                   {"final_epochs", o.final_epochs},
                   {"tv_min_visits", o.tv_min_visits},
                   {"tv_threshold", o.tv_threshold},
                   {"reward_tolerance", o.reward_tolerance},
                   {"write_trace", o.write_trace}};
    j["sandwich"] = {{"source", c.sandwich.source},
                     {"instances", c.sandwich.instances},
                     {"random", random_to_json(c.sandwich.random)},
                     {"horizon", c.sandwich.horizon},
                     {"runs", c.sandwich.runs}};
    j["activation"] = {{"samples", c.activation.samples},
                   {"steady_burn_in", c.activation.steady_burn_in},
                   {"steady_samples", c.activation.steady_samples},
                   {"steady_tv_tolerance", c.activation.steady_tv_tolerance}};
    return j;
}

CrbInstance ExperimentConfig::build_instance() const {
    if (instance.builder == "demand_response") return build_instance(instance.dr.num_users);
    if (instance.builder == "random") return build_instance(instance.random.num_arms);
    CrbInstance inst = instance_from_json(instance.inline_instance, "/instance/instance");
    if (!instance.initial.is_null())
        inst.initial = initial_from_json(instance.initial, inst.num_contexts(), inst.num_states(), "/instance/initial");
    require_valid(inst);
    return inst;
}

CrbInstance ExperimentConfig::build_instance(int num_arms) const {
    CrbInstance inst;
    if (instance.builder == "demand_response") {
        dr::DrConfig d = instance.dr;
        d.num_users = num_arms;
        inst = dr::build_dr_instance(d);
    } else if (instance.builder == "random") {
        RandomInstanceSpec r = instance.random;
        r.num_arms = num_arms;
        inst = random_instance(r, instance.random_seed);
    } else {
        throw ConfigError("/instance/builder: the inline builder has a fixed number of arms");
    }
    if (!instance.initial.is_null())
        inst.initial = initial_from_json(instance.initial, inst.num_contexts(), inst.num_states(), "/instance/initial");
    require_valid(inst);
    return inst;
}

LearnerOptions ExperimentConfig::learner_options() const {
    LearnerOptions lo;
    lo.epoch_length = online.epoch_length;
    lo.epsilon0 = online.epsilon0;
    lo.estimator = online.estimator;
    lo.pool_arms = online.pool_arms;
    lo.dual = dual;
    lo.selection = selection;
    lo.warm_start_lambda = online.warm_start_lambda;
    lo.seed = seed;
    return lo;
}

ExperimentConfig load_config_json(json doc, const std::string& profile, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("/: expected an object");
    if (profile != "desk") {
        if (doc.contains("profiles") && doc["profiles"].contains(profile)) {
            doc.merge_patch(doc["profiles"][profile]);
        } else if (profile == "paper") {
            json patch = {{"simulation", {{"runs", 500}}}, {"sweep", {{"runs", 500}}}};
            const bool dr = !doc.contains("instance") || !doc["instance"].contains("builder") ||
                            doc["instance"]["builder"] == "demand_response";
            if (dr) patch["instance"] = {{"num_users", 500}};
            doc.merge_patch(patch);
        } else {
            throw ConfigError("/profiles/" + profile + ": no such profile");
        }
    }
    if (doc.contains("instance") && doc["instance"].is_object() && doc["instance"].value("builder", "") == "file") {
        auto& inst = doc["instance"];
        if (!inst.contains("path") || !inst["path"].is_string()) throw ConfigError("/instance/path: expected a string");
        std::filesystem::path p = inst["path"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        json loaded;
        try {
            loaded = read_json(p);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("/instance/path: ") + e.what());
        }
        json replaced = {{"builder", "inline"}, {"instance", std::move(loaded)}};
        if (inst.contains("initial")) replaced["initial"] = inst["initial"];
        inst = std::move(replaced);
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& profile) {
    json doc;
    try {
        doc = read_json(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return load_config_json(std::move(doc), profile, path.parent_path());
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a(to_json(cfg).dump())); }

}  // namespace crb
