#include "crb/io.hpp"

#include <charconv>
#include <stdexcept>

namespace crb {

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_number(long long x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) out_ << ',';
        out_ << header[k];
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (in_row_++) out_ << ',';
}

CsvWriter& CsvWriter::field(double x) {
    separator();
    out_ << format_number(x);
    return *this;
}

CsvWriter& CsvWriter::field(long long x) {
    separator();
    out_ << format_number(x);
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view s) {
    separator();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_)
        throw std::logic_error("CsvWriter: row has " + std::to_string(in_row_) + " fields, header has " +
                               std::to_string(columns_));
    out_ << '\n';
    in_row_ = 0;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

json instance_to_json(const CrbInstance& inst) {
    const int G = inst.num_contexts(), S = inst.num_states();
    json j;
    j["discount"] = inst.discount;
    j["homogeneous"] = inst.homogeneous;
    json rows = json::array();
    for (int g = 0; g < G; ++g) {
        const auto r = inst.chain.row(g);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["contexts"] = {{"transition", rows}, {"budgets", inst.chain.budgets}};
    json arms = json::array();
    for (const auto& arm : inst.arms) {
        json P = json::array(), R = json::array();
        for (int g = 0; g < G; ++g) {
            json Pg = json::array(), Rg = json::array();
            for (int s = 0; s < S; ++s) {
                json Ps = json::array(), Rs = json::array();
                for (int a = 0; a < kNumActions; ++a) {
                    const auto act = static_cast<Action>(a);
                    const auto row = arm.row(g, s, act);
                    Ps.push_back(std::vector<double>(row.begin(), row.end()));
                    Rs.push_back(arm.reward(g, s, act));
                }
                Pg.push_back(std::move(Ps));
                Rg.push_back(std::move(Rs));
            }
            P.push_back(std::move(Pg));
            R.push_back(std::move(Rg));
        }
        arms.push_back({{"transition", std::move(P)}, {"reward", std::move(R)}});
    }
    j["num_states"] = S;
    j["arms"] = std::move(arms);
    j["initial"] = {{"context", inst.initial.context}, {"state", inst.initial.state}};
    return j;
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

const json& member(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) bad(where + "/" + key, "missing");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::vector<double> number_array(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n) bad(where, "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(number(j[k], where + "/" + std::to_string(k)));
    return out;
}

const json& sized_array(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n) bad(where, "expected an array of length " + std::to_string(n));
    return j;
}

ArmModel arm_from_json(const json& j, int G, int S, const std::string& where) {
    ArmModel arm(G, S);
    const auto& P = sized_array(member(j, "transition", where), static_cast<std::size_t>(G), where + "/transition");
    const auto& R = sized_array(member(j, "reward", where), static_cast<std::size_t>(G), where + "/reward");
    for (int g = 0; g < G; ++g) {
        const std::string pg = where + "/transition/" + std::to_string(g), rg = where + "/reward/" + std::to_string(g);
        const auto& Pg = sized_array(P[static_cast<std::size_t>(g)], static_cast<std::size_t>(S), pg);
        const auto& Rg = sized_array(R[static_cast<std::size_t>(g)], static_cast<std::size_t>(S), rg);
        for (int s = 0; s < S; ++s) {
            const std::string ps = pg + "/" + std::to_string(s), rs = rg + "/" + std::to_string(s);
            const auto& Ps = sized_array(Pg[static_cast<std::size_t>(s)], kNumActions, ps);
            const auto rewards = number_array(Rg[static_cast<std::size_t>(s)], kNumActions, rs);
            for (int a = 0; a < kNumActions; ++a) {
                const auto act = static_cast<Action>(a);
                const auto row = number_array(Ps[static_cast<std::size_t>(a)], static_cast<std::size_t>(S),
                                              ps + "/" + std::to_string(a));
                std::copy(row.begin(), row.end(), arm.row(g, s, act).begin());
                arm.reward(g, s, act) = rewards[static_cast<std::size_t>(a)];
            }
        }
    }
    return arm;
}

}  // namespace

CrbInstance instance_from_json(const json& j, const std::string& where) {
    CrbInstance inst;
    inst.discount = number(member(j, "discount", where), where + "/discount");
    const auto& ctx = member(j, "contexts", where);
    const auto& rows = member(ctx, "transition", where + "/contexts");
    if (!rows.is_array() || rows.empty()) bad(where + "/contexts/transition", "expected a non-empty array of rows");
    const int G = static_cast<int>(rows.size());
    inst.chain.num_contexts = G;
    for (int g = 0; g < G; ++g) {
        const auto row = number_array(rows[static_cast<std::size_t>(g)], static_cast<std::size_t>(G),
                                      where + "/contexts/transition/" + std::to_string(g));
        inst.chain.transition.insert(inst.chain.transition.end(), row.begin(), row.end());
    }
    const auto& budgets = member(ctx, "budgets", where + "/contexts");
    if (!budgets.is_array() || budgets.size() != static_cast<std::size_t>(G))
        bad(where + "/contexts/budgets", "expected one integer per context");
    for (std::size_t g = 0; g < budgets.size(); ++g) {
        if (!budgets[g].is_number_integer()) bad(where + "/contexts/budgets/" + std::to_string(g), "expected an integer");
        inst.chain.budgets.push_back(budgets[g].get<int>());
    }
    const auto& ns = member(j, "num_states", where);
    if (!ns.is_number_integer() || ns.get<int>() < 1) bad(where + "/num_states", "expected a positive integer");
    const int S = ns.get<int>();

    if (j.contains("arm")) {
        const auto& n = member(j, "num_arms", where);
        if (!n.is_number_integer() || n.get<int>() < 1) bad(where + "/num_arms", "expected a positive integer");
        inst.arms.assign(static_cast<std::size_t>(n.get<int>()), arm_from_json(j["arm"], G, S, where + "/arm"));
        inst.homogeneous = true;
    } else {
        const auto& arms = member(j, "arms", where);
        if (!arms.is_array() || arms.empty()) bad(where + "/arms", "expected a non-empty array");
        for (std::size_t i = 0; i < arms.size(); ++i)
            inst.arms.push_back(arm_from_json(arms[i], G, S, where + "/arms/" + std::to_string(i)));
        if (j.contains("homogeneous")) {
            if (!j["homogeneous"].is_boolean()) bad(where + "/homogeneous", "expected a boolean");
            inst.homogeneous = j["homogeneous"].get<bool>();
        }
        if (inst.homogeneous)
            for (std::size_t i = 1; i < inst.arms.size(); ++i)
                if (!(inst.arms[i] == inst.arms[0]))
                    bad(where + "/homogeneous", "arms " + std::to_string(i) + " and 0 differ");
    }

    inst.initial = j.contains("initial") ? initial_from_json(j["initial"], G, S, where + "/initial")
                                         : InitialDistribution::uniform(G, S);
    return inst;
}

InitialDistribution initial_from_json(const json& j, int G, int S, const std::string& where) {
    if (j.is_string()) {
        if (j != "uniform") bad(where, "expected \"uniform\" or an object");
        return InitialDistribution::uniform(G, S);
    }
    InitialDistribution init;
    init.context = number_array(member(j, "context", where), static_cast<std::size_t>(G), where + "/context");
    const auto& st = sized_array(member(j, "state", where), static_cast<std::size_t>(G), where + "/state");
    for (int g = 0; g < G; ++g)
        init.state.push_back(number_array(st[static_cast<std::size_t>(g)], static_cast<std::size_t>(S),
                                          where + "/state/" + std::to_string(g)));
    return init;
}

void write_q_tables_csv(const std::filesystem::path& path, std::span<const ArmSolution> solutions) {
    CsvWriter csv(path, {"arm", "g", "s", "a", "value"});
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        const auto& q = solutions[i].q;
        for (int g = 0; g < q.num_contexts; ++g)
            for (int s = 0; s < q.num_states; ++s)
                for (int a = 0; a < kNumActions; ++a) {
                    csv.field(static_cast<long long>(i)).field(g).field(s).field(a).field(q(g, s, static_cast<Action>(a)));
                    csv.end_row();
                }
    }
}

void write_value_tables_csv(const std::filesystem::path& path, std::span<const ArmSolution> solutions) {
    CsvWriter csv(path, {"arm", "g", "s", "value"});
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        const auto& v = solutions[i].values;
        for (int g = 0; g < v.num_contexts; ++g)
            for (int s = 0; s < v.num_states; ++s) {
                csv.field(static_cast<long long>(i)).field(g).field(s).field(v(g, s));
                csv.end_row();
            }
    }
}

void write_dual_history_csv(const std::filesystem::path& path, const DualSolveReport& report) {
    const std::size_t G = report.lambda_star.size();
    std::vector<std::string> header{"iteration"};
    for (const char* prefix : {"lambda_", "slack_", "step_"})
        for (std::size_t g = 0; g < G; ++g) header.push_back(prefix + std::to_string(g));
    header.push_back("delta_norm");
    header.push_back("dual_objective");
    CsvWriter csv(path, header);
    for (const auto& it : report.history) {
        csv.field(it.iteration);
        for (std::size_t g = 0; g < G; ++g) csv.field(it.lambda[g]);
        for (std::size_t g = 0; g < G; ++g) csv.field(it.slack[g]);
        for (std::size_t g = 0; g < G; ++g) csv.field(it.step[g]);
        csv.field(it.delta_norm).field(it.dual_objective);
        csv.end_row();
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
    if (log.steps.size() != static_cast<std::size_t>(log.horizon))
        throw std::invalid_argument("write_trajectory_csv: the log was recorded without steps");
    CsvWriter csv(path, {"t", "g", "arm", "s", "a", "r"});
    for (const auto& st : log.steps)
        for (std::size_t i = 0; i < st.states.size(); ++i) {
            csv.field(st.t).field(st.g).field(static_cast<long long>(i)).field(st.states[i]).field(int{st.actions[i]});
            csv.field(st.rewards[i]);
            csv.end_row();
        }
}

}  // namespace crb
