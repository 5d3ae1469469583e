/*
 Copyright 2026 The ENE Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ene/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ene::io {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Json vec_json(const Vec& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json vecs_json(const std::vector<Vec>& vs) {
    Json a = Json::array();
    for (const Vec& v : vs) a.push_back(vec_json(v));
    return a;
}

Json mat_json(const Mat& a) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j));
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

Json mats_json(const std::vector<Mat>& ms) {
    Json a = Json::array();
    for (const Mat& m : ms) a.push_back(mat_json(m));
    return a;
}

const Json& member(const Json& j, const std::string& path, const char* key) {
    if (!j.is_object()) throw IoError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw IoError(path + "/" + key, "missing");
    return *it;
}

double read_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw IoError(path, "expected a number");
    return j.get<double>();
}

long long read_integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw IoError(path, "expected an integer");
    return j.get<long long>();
}

int read_int(const Json& j, const std::string& path) {
    const long long v = read_integer(j, path);
    if (v < -1000000000LL || v > 1000000000LL) throw IoError(path, "integer out of range");
    return static_cast<int>(v);
}

bool read_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw IoError(path, "expected true or false");
    return j.get<bool>();
}

std::string read_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw IoError(path, "expected a string");
    return j.get<std::string>();
}

Vec read_vec(const Json& j, const std::string& path, int size = -1) {
    if (!j.is_array()) throw IoError(path, "expected an array of numbers");
    if (size >= 0 && static_cast<int>(j.size()) != size)
        throw IoError(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "/" + std::to_string(i));
    return v;
}

std::vector<Vec> read_vecs(const Json& j, const std::string& path, int count, int size) {
    if (!j.is_array()) throw IoError(path, "expected an array");
    if (static_cast<int>(j.size()) != count)
        throw IoError(path, "expected " + std::to_string(count) + " entries, got " + std::to_string(j.size()));
    std::vector<Vec> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_vec(j[i], path + "/" + std::to_string(i), size));
    return out;
}

Mat read_mat(const Json& j, const std::string& path, int rows, int cols) {
    const int r = read_int(member(j, path, "rows"), path + "/rows");
    const int c = read_int(member(j, path, "cols"), path + "/cols");
    if (r != rows || c != cols)
        throw IoError(path, "expected shape " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                                std::to_string(r) + "x" + std::to_string(c));
    const Vec data = read_vec(member(j, path, "data"), path + "/data", r * c);
    Mat a(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) a(i, k) = data(i * c + k);
    return a;
}

std::vector<Mat> read_mats(const Json& j, const std::string& path, int count, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != count)
        throw IoError(path, "expected an array of " + std::to_string(count) + " matrices");
    std::vector<Mat> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_mat(j[i], path + "/" + std::to_string(i), rows, cols));
    return out;
}

ActiveSet read_active(const Json& j, const std::string& path, int l) {
    if (!j.is_array()) throw IoError(path, "expected an array of constraint indices");
    ActiveSet a;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const int idx = read_int(j[i], path + "/" + std::to_string(i));
        if (idx < 0 || (l >= 0 && idx >= l) || (!a.empty() && idx <= a.back()))
            throw IoError(path + "/" + std::to_string(i), "constraint indices must be ascending and in range");
        a.push_back(idx);
    }
    return a;
}

void require_format(const Json& doc, const char* expected) {
    const std::string f = read_string(member(doc, "", "format"), "/format");
    if (f != expected) throw IoError("/format", "expected \"" + std::string(expected) + "\", got \"" + f + "\"");
    const int version = read_int(member(doc, "", "version"), "/version");
    if (version != 1) throw IoError("/version", "unsupported version " + std::to_string(version));
}

int read_dim(const Json& doc, const char* key, int min) {
    const int v = read_int(member(doc, "", key), std::string("/") + key);
    if (v < min) throw IoError(std::string("/") + key, "must be at least " + std::to_string(min));
    return v;
}

/// Reads the members of one JSON object and rejects the ones nobody asked for.
class Fields {
public:
    Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw IoError(path_.empty() ? "/" : path_, "expected an object");
    }

    const Json* find(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }
    std::string at(const char* key) const { return path_ + "/" + key; }

    void number(const char* key, double& out) {
        if (const Json* v = find(key)) out = read_number(*v, at(key));
    }
    void integer(const char* key, int& out) {
        if (const Json* v = find(key)) out = read_int(*v, at(key));
    }
    void boolean(const char* key, bool& out) {
        if (const Json* v = find(key)) out = read_bool(*v, at(key));
    }
    void text(const char* key, std::string& out) {
        if (const Json* v = find(key)) out = read_string(*v, at(key));
    }
    void vec(const char* key, Vec& out, int size) {
        if (const Json* v = find(key)) out = read_vec(*v, at(key), size);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw IoError(path_ + "/" + it.key(), "unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string method_name(Discretization d) { return d == Discretization::Euler ? "euler" : "rk4"; }

std::string model_name(const PreviewRecursion& p) {
    if (p == PreviewRecursion::hold_constant()) return "w(k+1) = w(k)";
    return "w(k+1) = " + format_double(p.a_x) + " x(k) + " + format_double(p.a_w) + " w(k)";
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

void RunConfig::finalize() {
    scenario.generator.seed = seed;
    if (controllers.empty()) throw IoError("/controllers", "at least one controller is required");
    if (format != "csv" && format != "json") throw IoError("/format", "expected \"csv\" or \"json\", got \"" + format + "\"");
    if (threads < 0) throw IoError("/threads", "must be nonnegative");
    if (scenario.horizon < 1) throw IoError("/scenario/horizon", "must be at least 1");
    try {
        scenario.validate();
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw IoError("/scenario", e.what());
    }
}

RunConfig preset_config(const std::string& scenario) {
    RunConfig c;
    const std::string s = lower(scenario);
    if (s == "small")
        c.scenario = ScenarioSpec::small();
    else if (s == "large")
        c.scenario = ScenarioSpec::large();
    else if (s == "sweep")
        c.scenario = ScenarioSpec::sweep();
    else if (s == "custom")
        c.scenario = ScenarioSpec();
    else
        throw IoError("--scenario", "unknown scenario \"" + scenario + "\" (small, large, sweep, custom)");
    c.seed = c.scenario.generator.seed;
    return c;
}

std::vector<ControllerKind> parse_controller_list(const std::string& list) {
    std::vector<ControllerKind> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        if (lower(item) == "all") {
            for (ControllerKind k : all_controllers())
                if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
            continue;
        }
        const auto k = parse_controller(item);
        if (!k) throw IoError("--controllers", "unknown controller \"" + item + "\"");
        if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
    }
    if (out.empty()) throw IoError("--controllers", "empty controller list");
    return out;
}

RunConfig parse_config(const Json& doc, RunConfig base) {
    RunConfig c = std::move(base);
    Fields top(doc, "");
    if (const Json* sj = top.find("scenario")) {
        ScenarioSpec& s = c.scenario;
        Fields f(*sj, "/scenario");
        f.text("name", s.name);
        f.integer("horizon", s.horizon);
        if (s.horizon < 1) throw IoError("/scenario/horizon", "must be at least 1");
        f.vec("x0_nominal", s.x0_nominal, 4);
        f.vec("w0_nominal", s.w0_nominal, 4);
        f.vec("dx0", s.dx0, 4);
        f.boolean("actual_is_nominal", s.actual_is_nominal);
        f.boolean("saturate_input", s.saturate_input);
        if (const Json* m = f.find("method")) {
            const std::string name = lower(read_string(*m, f.at("method")));
            if (name == "euler")
                s.method = Discretization::Euler;
            else if (name == "rk4")
                s.method = Discretization::Rk4;
            else
                throw IoError(f.at("method"), "expected \"euler\" or \"rk4\"");
        }
        if (const Json* pj = f.find("preview")) {
            Fields p(*pj, f.at("preview"));
            p.number("a_x", s.preview.a_x);
            p.number("a_w", s.preview.a_w);
            p.finish();
        }
        if (const Json* gj = f.find("generator")) {
            Fields g(*gj, f.at("generator"));
            g.number("a", s.generator.a);
            g.number("b", s.generator.b);
            g.number("c", s.generator.c);
            g.finish();
        }
        if (const Json* wj = f.find("weights")) {
            Fields w(*wj, f.at("weights"));
            w.number("q_z", s.weights.q_z);
            w.number("q_theta", s.weights.q_theta);
            w.number("r_force", s.weights.r_force);
            w.number("terminal_scale", s.weights.terminal_scale);
            w.number("ref_z", s.weights.ref_z);
            w.number("ref_theta", s.weights.ref_theta);
            w.finish();
        }
        if (const Json* pj = f.find("params")) {
            Fields p(*pj, f.at("params"));
            p.number("m", s.params.m);
            p.number("M", s.params.M);
            p.number("L", s.params.L);
            p.number("g", s.params.g);
            p.number("Kd", s.params.Kd);
            p.number("Ts", s.params.Ts);
            p.number("force_bound", s.params.force_bound);
            p.finish();
        }
        f.finish();
    }
    if (const Json* cj = top.find("controllers")) {
        if (cj->is_string()) {
            c.controllers = parse_controller_list(cj->get<std::string>());
        } else if (cj->is_array()) {
            std::string joined;
            for (std::size_t i = 0; i < cj->size(); ++i)
                joined += read_string((*cj)[i], "/controllers/" + std::to_string(i)) + ",";
            try {
                c.controllers = parse_controller_list(joined);
            } catch (const IoError& e) {
                throw IoError("/controllers", e.what());
            }
        } else {
            throw IoError("/controllers", "expected a list of controller names");
        }
    }
    top.text("out", c.out_dir);
    if (const Json* sj = top.find("seed")) {
        if (!sj->is_number_unsigned() && !(sj->is_number_integer() && sj->get<long long>() >= 0))
            throw IoError("/seed", "expected a nonnegative integer");
        c.seed = sj->get<std::uint64_t>();
    }
    top.text("format", c.format);
    top.boolean("preview_sweep", c.preview_sweep);
    top.integer("threads", c.threads);
    top.finish();
    return c;
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
    return parse_config(parse_json(text, "config"), base);
}

Json config_to_json(const RunConfig& c) {
    const ScenarioSpec& s = c.scenario;
    Json controllers = Json::array();
    for (ControllerKind k : c.controllers) controllers.push_back(to_string(k));
    return {
        {"scenario",
         {{"name", s.name},
          {"horizon", s.horizon},
          {"x0_nominal", vec_json(s.x0_nominal)},
          {"w0_nominal", vec_json(s.w0_nominal)},
          {"dx0", vec_json(s.dx0)},
          {"preview", {{"a_x", s.preview.a_x}, {"a_w", s.preview.a_w}}},
          {"generator", {{"a", s.generator.a}, {"b", s.generator.b}, {"c", s.generator.c}}},
          {"actual_is_nominal", s.actual_is_nominal},
          {"saturate_input", s.saturate_input},
          {"method", method_name(s.method)},
          {"weights",
           {{"q_z", s.weights.q_z},
            {"q_theta", s.weights.q_theta},
            {"r_force", s.weights.r_force},
            {"terminal_scale", s.weights.terminal_scale},
            {"ref_z", s.weights.ref_z},
            {"ref_theta", s.weights.ref_theta}}},
          {"params",
           {{"m", s.params.m},
            {"M", s.params.M},
            {"L", s.params.L},
            {"g", s.params.g},
            {"Kd", s.params.Kd},
            {"Ts", s.params.Ts},
            {"force_bound", s.params.force_bound}}}}},
        {"controllers", controllers},
        {"out", c.out_dir},
        {"seed", c.seed},
        {"format", c.format},
        {"preview_sweep", c.preview_sweep},
        {"threads", c.threads},
    };
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << contents;
    if (!out) throw IoError(path, "write failed");
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // Translate the byte offset into line:column for humans.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw IoError(source + ":" + std::to_string(line) + ":" + std::to_string(col), e.what());
    }
}

Json solution_to_json(const NominalSolution& s) {
    const Trajectory& t = s.trajectory;
    Json active = Json::array();
    for (const ActiveSet& a : t.active) active.push_back(a);
    return {
        {"format", "ene-nominal-solution"},
        {"version", 1},
        {"horizon", t.horizon()},
        {"n", t.x.empty() ? 0 : t.x[0].size()},
        {"m", t.u.empty() ? 0 : t.u[0].size()},
        {"nw", t.w.empty() ? 0 : t.w[0].size()},
        {"is_optimal", s.is_optimal},
        {"kkt_norm", s.kkt_norm},
        {"iterations", s.iterations},
        {"cost", s.cost},
        {"cost_history", s.cost_history},
        {"x", vecs_json(t.x)},
        {"u", vecs_json(t.u)},
        {"w", vecs_json(t.w)},
        {"active", active},
        {"lambda", vecs_json(s.costates.lambda)},
        {"lambda_bar", vecs_json(s.costates.lambda_bar)},
        {"mu", vecs_json(s.costates.mu)},
    };
}

NominalSolution solution_from_json(const Json& doc) {
    require_format(doc, "ene-nominal-solution");
    const int N = read_dim(doc, "horizon", 1);
    const int n = read_dim(doc, "n", 1), m = read_dim(doc, "m", 1), nw = read_dim(doc, "nw", 0);
    NominalSolution s;
    s.is_optimal = read_bool(member(doc, "", "is_optimal"), "/is_optimal");
    s.kkt_norm = read_number(member(doc, "", "kkt_norm"), "/kkt_norm");
    s.iterations = read_int(member(doc, "", "iterations"), "/iterations");
    s.cost = read_number(member(doc, "", "cost"), "/cost");
    if (doc.contains("cost_history")) {
        const Vec h = read_vec(doc["cost_history"], "/cost_history");
        s.cost_history.assign(h.data(), h.data() + h.size());
    }
    Trajectory& t = s.trajectory;
    t.x = read_vecs(member(doc, "", "x"), "/x", N + 1, n);
    t.u = read_vecs(member(doc, "", "u"), "/u", N, m);
    t.w = read_vecs(member(doc, "", "w"), "/w", N + 1, nw);
    const Json& active = member(doc, "", "active");
    if (!active.is_array() || static_cast<int>(active.size()) != N)
        throw IoError("/active", "expected " + std::to_string(N) + " active sets");
    for (int k = 0; k < N; ++k) t.active.push_back(read_active(active[k], "/active/" + std::to_string(k), -1));
    t.rolled_out = true;
    s.costates.lambda = read_vecs(member(doc, "", "lambda"), "/lambda", N + 1, n);
    s.costates.lambda_bar = read_vecs(member(doc, "", "lambda_bar"), "/lambda_bar", N + 1, nw);
    const Json& mu = member(doc, "", "mu");
    if (!mu.is_array() || static_cast<int>(mu.size()) != N) throw IoError("/mu", "expected " + std::to_string(N) + " entries");
    for (int k = 0; k < N; ++k)
        s.costates.mu.push_back(read_vec(mu[k], "/mu/" + std::to_string(k), static_cast<int>(t.active[k].size())));
    return s;
}

Json gains_to_json(const GainSchedule& g) {
    Json stages = Json::array();
    for (int k = 0; k < g.horizon(); ++k) {
        const StageGains& s = g.stage[k];
        stages.push_back({{"k", k},
                          {"active", s.active},
                          {"K1", mat_json(s.K1)},
                          {"K2", mat_json(s.K2)},
                          {"K3", mat_json(s.K3)},
                          {"K4", mat_json(s.K4)},
                          {"K5", mat_json(s.K5)},
                          {"hu", vec_json(s.hu)},
                          {"u_ff", vec_json(s.u_ff)},
                          {"mu_ff", vec_json(s.mu_ff)}});
    }
    return {
        {"format", "ene-gain-schedule"},
        {"version", 1},
        {"mode", g.mode == GainMode::Optimal ? "optimal" : "non-optimal"},
        {"preview_stripped", g.preview_stripped},
        {"horizon", g.horizon()},
        {"n", g.n},
        {"m", g.m},
        {"nw", g.nw},
        {"stages", stages},
        {"S", mats_json(g.S)},
        {"W", mats_json(g.W)},
        {"Sbar", mats_json(g.Sbar)},
        {"Wbar", mats_json(g.Wbar)},
        {"T", vecs_json(g.T)},
        {"Tbar", vecs_json(g.Tbar)},
    };
}

GainSchedule gains_from_json(const Json& doc) {
    require_format(doc, "ene-gain-schedule");
    GainSchedule g;
    const std::string mode = read_string(member(doc, "", "mode"), "/mode");
    if (mode == "optimal")
        g.mode = GainMode::Optimal;
    else if (mode == "non-optimal")
        g.mode = GainMode::NonOptimal;
    else
        throw IoError("/mode", "expected \"optimal\" or \"non-optimal\"");
    g.preview_stripped = read_bool(member(doc, "", "preview_stripped"), "/preview_stripped");
    const int N = read_dim(doc, "horizon", 1);
    g.n = read_dim(doc, "n", 1);
    g.m = read_dim(doc, "m", 1);
    g.nw = read_dim(doc, "nw", 0);
    const Json& stages = member(doc, "", "stages");
    if (!stages.is_array() || static_cast<int>(stages.size()) != N)
        throw IoError("/stages", "expected " + std::to_string(N) + " stage records");
    for (int k = 0; k < N; ++k) {
        const std::string p = "/stages/" + std::to_string(k);
        const Json& j = stages[k];
        StageGains s;
        s.active = read_active(member(j, p, "active"), p + "/active", -1);
        const int la = static_cast<int>(s.active.size());
        if (la > g.m) throw IoError(p + "/active", "more active rows than controls");
        s.K1 = read_mat(member(j, p, "K1"), p + "/K1", g.m, g.n);
        s.K2 = read_mat(member(j, p, "K2"), p + "/K2", g.m, g.nw);
        s.K3 = read_mat(member(j, p, "K3"), p + "/K3", g.m, g.m + la);
        s.K4 = read_mat(member(j, p, "K4"), p + "/K4", la, g.n);
        s.K5 = read_mat(member(j, p, "K5"), p + "/K5", la, g.nw);
        s.hu = read_vec(member(j, p, "hu"), p + "/hu", g.m);
        s.u_ff = read_vec(member(j, p, "u_ff"), p + "/u_ff", g.m);
        s.mu_ff = read_vec(member(j, p, "mu_ff"), p + "/mu_ff", la);
        g.stage.push_back(std::move(s));
    }
    g.S = read_mats(member(doc, "", "S"), "/S", N + 1, g.n, g.n);
    g.W = read_mats(member(doc, "", "W"), "/W", N + 1, g.n, g.nw);
    g.Sbar = read_mats(member(doc, "", "Sbar"), "/Sbar", N + 1, g.nw, g.n);
    g.Wbar = read_mats(member(doc, "", "Wbar"), "/Wbar", N + 1, g.nw, g.nw);
    g.T = read_vecs(member(doc, "", "T"), "/T", N + 1, g.n);
    g.Tbar = read_vecs(member(doc, "", "Tbar"), "/Tbar", N + 1, g.nw);
    return g;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sim_csv(const SimResult& r) {
    const int n = r.x.empty() ? 0 : static_cast<int>(r.x[0].size());
    const int m = r.u.empty() ? 1 : static_cast<int>(r.u[0].size());
    const int nw = r.w.empty() ? 0 : static_cast<int>(r.w[0].size());
    const int l = r.c.empty() ? 0 : static_cast<int>(r.c[0].size());
    std::string out = "k";
    for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i);
    for (int i = 0; i < m; ++i) out += ",u" + std::to_string(i);
    for (int i = 0; i < nw; ++i) out += ",w" + std::to_string(i);
    for (int i = 0; i < l; ++i) out += ",c" + std::to_string(i);
    out += '\n';
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        out += std::to_string(k);
        for (int i = 0; i < n; ++i) out += "," + format_double(r.x[k](i));
        const bool has_u = k < r.u.size();
        for (int i = 0; i < m; ++i) out += has_u ? "," + format_double(r.u[k](i)) : std::string(",");
        for (int i = 0; i < nw; ++i) out += k < r.w.size() ? "," + format_double(r.w[k](i)) : std::string(",");
        const bool has_c = k < r.c.size();
        for (int i = 0; i < l; ++i) out += has_c ? "," + format_double(r.c[k](i)) : std::string(",");
        out += '\n';
    }
    return out;
}

Json sim_json(const SimResult& r, bool with_trajectories) {
    Json violations = Json::array();
    for (const ViolationEntry& v : r.violations)
        violations.push_back({{"step", v.step}, {"constraint", v.constraint}, {"magnitude", v.magnitude}});
    Json trace = Json::array();
    for (const SegmentTraceEntry& s : r.segment_trace) {
        Json flip = nullptr;
        if (s.flip)
            flip = {{"step", s.flip->step}, {"constraint", s.flip->constraint}, {"activated", s.flip->activated}};
        trace.push_back({{"step", s.step},
                         {"segment", s.segment},
                         {"lambda", s.lambda},
                         {"flip", flip},
                         {"cumulative_du_norm", s.cumulative_du_norm}});
    }
    Json j = {
        {"scenario", r.scenario},
        {"controller", to_string(r.kind)},
        {"completed", r.completed},
        {"error", r.error},
        {"performance", r.performance},
        {"timing", {{"median_ms", r.timing.median_ms}, {"mean_ms", r.timing.mean_ms}, {"samples", r.timing.samples}}},
        {"precompute_ms", r.precompute_ms},
        {"violations", violations},
        {"solve_failures", r.solve_failures},
        {"adaptations", r.adaptations},
        {"segments", r.segments},
        {"flips", r.flips},
        {"segment_trace", trace},
    };
    if (with_trajectories) {
        j["x"] = vecs_json(r.x);
        j["u"] = vecs_json(r.u);
        j["w"] = vecs_json(r.w);
        j["c"] = vecs_json(r.c);
    }
    return j;
}

std::string comparison_markdown(const Comparison& cmp) {
    std::string out = "## Scenario `" + cmp.scenario + "`\n\n";
    out += "| Controller | Performance | Median per-loop (ms) | Mean per-loop (ms) | Speedup vs CLNMPC | Violations | Flips |\n";
    out += "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const ComparisonRow& row : cmp.rows) {
        out += "| " + to_string(row.kind) + " | " + (row.completed ? fixed(row.performance, 6) : std::string("failed")) +
               " | " + fixed(row.median_ms, 4) + " | " + fixed(row.mean_ms, 4) + " | " +
               (row.speedup_vs_clnmpc > 0.0 ? fixed(row.speedup_vs_clnmpc, 1) + "x" : std::string("-")) + " | " +
               std::to_string(row.violations) + " | " + std::to_string(row.flips) + " |\n";
    }
    return out;
}

Json comparison_json(const Comparison& cmp) {
    Json rows = Json::array();
    for (const ComparisonRow& row : cmp.rows)
        rows.push_back({{"controller", to_string(row.kind)},
                        {"completed", row.completed},
                        {"performance", row.performance},
                        {"median_ms", row.median_ms},
                        {"mean_ms", row.mean_ms},
                        {"speedup_vs_clnmpc", row.speedup_vs_clnmpc},
                        {"violations", row.violations},
                        {"flips", row.flips}});
    return {{"scenario", cmp.scenario}, {"rows", rows}};
}

std::string sweep_markdown(const SweepReport& report) {
    std::string out = "## Nominal preview model sweep\n\n";
    out += "| Nominal preview model | ENE performance | MENE performance | ENE violations | MENE violations |\n";
    out += "|---|---:|---:|---:|---:|\n";
    for (const SweepEntry& e : report.entries) {
        if (!e.completed) {
            out += "| " + model_name(e.model) + " | failed | failed | - | - |\n";
            continue;
        }
        out += "| " + model_name(e.model) + " | " + fixed(e.ene_performance, 6) + " | " + fixed(e.mene_performance, 6) +
               " | " + std::to_string(e.ene_violations) + " | " + std::to_string(e.mene_violations) + " |\n";
    }
    if (report.best >= 0) out += "\nBest (MENE): " + model_name(report.entries[report.best].model) + "\n";
    return out;
}

Json sweep_json(const SweepReport& report) {
    Json entries = Json::array();
    for (const SweepEntry& e : report.entries)
        entries.push_back({{"model", model_name(e.model)},
                           {"a_x", e.model.a_x},
                           {"a_w", e.model.a_w},
                           {"completed", e.completed},
                           {"error", e.error},
                           {"ene_performance", e.ene_performance},
                           {"mene_performance", e.mene_performance},
                           {"ene_violations", e.ene_violations},
                           {"mene_violations", e.mene_violations}});
    return {{"entries", entries}, {"best", report.best}};
}

}  // namespace ene::io
