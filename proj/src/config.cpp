#include "sabrfem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "sabrfem/errors.hpp"

namespace sabrfem {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"model", {"beta", "rho", "nu", "x0", "y0"}},
        {"payoff", {"type", "strike", "eps"}},
        {"discretization",
         {"R_x", "R_y", "y_center", "L_x", "L_y", "base_cells_x", "base_cells_y", "mu", "origin", "lower_vol", "upper_vol"}},
        {"time", {"T", "theta", "steps", "startup_steps"}},
        {"oracle", {"mc_paths", "mc_steps", "seed", "threads"}},
        {"study", {"kind", "levels", "steps", "eps", "barrier"}},
        {"output", {"dir", "prefix"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ValidationError(key, "expected a number, got '" + v + "'");
    }
    return out;
}

double to_double_or_auto(const std::string& key, const std::string& raw) {
    if (trim(raw) == "auto") return std::numeric_limits<double>::quiet_NaN();
    return to_double(key, raw);
}

long long to_int(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ValidationError(key, "expected an integer, got '" + v + "'");
    }
    return out;
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& raw, F conv) {
    std::vector<T> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<T>(conv(key, item)));
    if (out.empty()) throw ValidationError(key, "expected a comma-separated list");
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "auto";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_floating_point_v<T>) {
            s += fmt(v[i]);
        } else {
            s += std::to_string(v[i]);
        }
    }
    return s;
}

void check_schema(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) throw ValidationError(section, "unknown section [" + section + "]");
        if (!body.data().empty() && body.empty()) throw ValidationError(section, "key outside of a section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ValidationError(section + "." + key, "unknown key");
            (void)value;
        }
    }
}

RunConfig from_tree(const pt::ptree& tree) {
    check_schema(tree);
    RunConfig c;
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
        return std::nullopt;
    };
    auto num = [&](const std::string& path, double& dst) {
        if (auto v = get(path)) dst = to_double(path, *v);
    };
    auto num_auto = [&](const std::string& path, double& dst) {
        if (auto v = get(path)) dst = to_double_or_auto(path, *v);
    };
    auto integer = [&](const std::string& path, auto& dst) {
        if (auto v = get(path)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_int(path, *v));
    };

    num("model.beta", c.model.beta);
    num("model.rho", c.model.rho);
    num("model.nu", c.model.nu);
    num("model.x0", c.model.x0);
    num("model.y0", c.model.y0);

    if (auto v = get("payoff.type")) c.payoff.type = *v;
    num("payoff.strike", c.payoff.strike);
    num("payoff.eps", c.payoff.eps);

    num_auto("discretization.R_x", c.disc.R_x);
    num_auto("discretization.R_y", c.disc.R_y);
    num_auto("discretization.y_center", c.disc.y_center);
    num_auto("discretization.mu", c.disc.mu);
    integer("discretization.L_x", c.disc.L_x);
    integer("discretization.L_y", c.disc.L_y);
    integer("discretization.base_cells_x", c.disc.base_cells_x);
    integer("discretization.base_cells_y", c.disc.base_cells_y);
    if (auto v = get("discretization.origin")) {
        if (*v == "absorbing") c.disc.origin = OriginBC::absorbing;
        else if (*v == "free") c.disc.origin = OriginBC::free;
        else throw ValidationError("discretization.origin", "expected absorbing or free");
    }
    for (auto [key, field] : {std::pair{"discretization.lower_vol", &c.disc.lower_vol},
                              std::pair{"discretization.upper_vol", &c.disc.upper_vol}}) {
        if (auto v = get(key)) {
            if (*v == "intrinsic") *field = VolEdgeBC::intrinsic;
            else if (*v == "zero") *field = VolEdgeBC::zero;
            else throw ValidationError(key, "expected intrinsic or zero");
        }
    }

    num("time.T", c.time.T);
    num("time.theta", c.time.theta);
    if (auto v = get("time.steps")) c.time.steps = *v == "auto" ? 0 : static_cast<int>(to_int("time.steps", *v));
    if (auto v = get("time.startup_steps")) {
        c.time.startup_steps = *v == "auto" ? -1 : static_cast<int>(to_int("time.startup_steps", *v));
    }

    integer("oracle.mc_paths", c.mc.n_paths);
    integer("oracle.mc_steps", c.mc.n_steps);
    if (auto v = get("oracle.seed")) {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), seed);
        if (ec != std::errc() || ptr != v->data() + v->size()) throw ValidationError("oracle.seed", "expected an unsigned integer");
        c.mc.seed = seed;
    }
    integer("oracle.threads", c.mc.threads);

    if (auto v = get("study.kind")) c.study.kind = *v;
    if (auto v = get("study.levels")) c.study.levels = to_list<int>("study.levels", *v, to_int);
    if (auto v = get("study.steps")) c.study.steps = to_list<int>("study.steps", *v, to_int);
    if (auto v = get("study.eps")) c.study.eps = to_list<double>("study.eps", *v, to_double);
    num_auto("study.barrier", c.study.barrier);

    if (auto v = get("output.dir")) c.output.dir = *v == "auto" ? std::string() : *v;
    if (auto v = get("output.prefix")) c.output.prefix = *v;
    return c;
}

pt::ptree read_tree(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.line(), e.message());
    }
    return tree;
}

RunConfig build(pt::ptree tree, const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, value] : overrides) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) throw ValidationError(key, "override keys have the form section.key");
        tree.put(pt::ptree::path_type(key, '.'), value);
    }
    RunConfig cfg = from_tree(tree);
    validate_config(cfg);
    return cfg;
}

}  // namespace

Payoff RunConfig::make_payoff() const {
    if (payoff.type == "put") return Payoff::put(payoff.strike);
    if (payoff.type == "call") return Payoff::call(payoff.strike);
    if (payoff.type == "mass_zero_put") return Payoff::mass_zero_put(payoff.eps);
    if (payoff.type == "identity") return Payoff::identity();
    throw ValidationError("payoff.type", "expected put, call, mass_zero_put or identity, got '" + payoff.type + "'");
}

ThetaConfig RunConfig::theta_config() const {
    ThetaConfig t;
    t.theta = time.theta;
    t.T = time.T;
    t.steps = time.steps > 0 ? time.steps : std::max(100, static_cast<int>(std::ceil(50.0 * time.T)));
    t.startup_steps = time.startup_steps >= 0 ? time.startup_steps : (time.theta < 1.0 ? 2 : 0);
    t.startup_steps = std::min(t.startup_steps, t.steps);
    return t;
}

std::string RunConfig::output_dir() const {
    if (!output.dir.empty()) return output.dir;
    if (const char* env = std::getenv("SABRFEM_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return ".";
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_ini(a) == to_ini(b); }

std::vector<std::string> preset_names() { return {"paper-exp1", "paper-exp2", "paper-exp3"}; }

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.disc.R_x = 16.0;
    c.disc.base_cells_x = 4;
    if (name == "paper-exp1") {
        return c;
    }
    if (name == "paper-exp2") {
        c.model = {0.5, -0.3, 1.0, 1.0, 0.2};
        c.time.T = 10.0;
        return c;
    }
    if (name == "paper-exp3") {
        c.model = {0.2, 0.0, 1.0, 1.0, 0.2};
        c.time.T = 10.0;
        c.payoff.type = "mass_zero_put";
        c.payoff.eps = 0.01;
        return c;
    }
    throw ValidationError("preset", "unknown preset '" + name + "'");
}

void validate_config(const RunConfig& c) {
    require_valid(c.model);
    (void)c.make_payoff();
    if (!(c.payoff.strike > 0.0)) throw ValidationError("payoff.strike", "must be > 0");
    if (!(c.payoff.eps > 0.0)) throw ValidationError("payoff.eps", "must be > 0");
    try {
        (void)resolve_mu(c.model.beta, c.disc.mu);
    } catch (const ValidationError& e) {
        throw ValidationError("discretization.mu", e.what());
    }
    if (c.disc.L_x < 0 || c.disc.L_x > 7) throw ValidationError("discretization.L_x", "must lie in [0, 7]");
    if (c.disc.L_y < 0 || c.disc.L_y > 7) throw ValidationError("discretization.L_y", "must lie in [0, 7]");
    if (c.disc.base_cells_x < 1 || c.disc.base_cells_x > 16) {
        throw ValidationError("discretization.base_cells_x", "must lie in [1, 16]");
    }
    if (c.disc.base_cells_y < 1 || c.disc.base_cells_y > 16) {
        throw ValidationError("discretization.base_cells_y", "must lie in [1, 16]");
    }
    if (!std::isnan(c.disc.R_x) && !(c.disc.R_x > c.model.x0)) throw ValidationError("discretization.R_x", "must exceed x0");
    if (!std::isnan(c.disc.R_y) && !(c.disc.R_y > 0.0)) throw ValidationError("discretization.R_y", "must be > 0");
    if (!(c.time.T > 0.0) || !std::isfinite(c.time.T)) throw ValidationError("time.T", "must be > 0");
    if (!(c.time.theta >= 0.0 && c.time.theta <= 1.0)) throw ValidationError("time.theta", "must lie in [0, 1]");
    if (c.time.steps < 0) throw ValidationError("time.steps", "must be >= 1 or auto");
    if (c.time.startup_steps < -1) throw ValidationError("time.startup_steps", "must be >= 0 or auto");
    if (c.mc.n_paths < 1) throw ValidationError("oracle.mc_paths", "must be >= 1");
    if (c.mc.n_steps < 1) throw ValidationError("oracle.mc_steps", "must be >= 1");
    if (c.mc.threads < 0) throw ValidationError("oracle.threads", "must be >= 0");
    static const std::set<std::string> kinds{"spatial", "temporal", "projection", "manufactured"};
    if (!kinds.count(c.study.kind)) {
        throw ValidationError("study.kind", "expected spatial, temporal, projection or manufactured");
    }
    for (int L : c.study.levels) {
        if (L < 0 || L > 7) throw ValidationError("study.levels", "levels must lie in [0, 7]");
    }
    for (int s : c.study.steps) {
        if (s < 1) throw ValidationError("study.steps", "step counts must be >= 1");
    }
    for (double e : c.study.eps) {
        if (!(e > 0.0)) throw ValidationError("study.eps", "values must be > 0");
    }
    if (!std::isnan(c.study.barrier) && !(c.study.barrier > c.model.x0)) {
        throw ValidationError("study.barrier", "must exceed x0");
    }
    if (c.output.prefix.empty()) throw ValidationError("output.prefix", "must not be empty");
}

RunConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides) {
    return build(read_tree(text), overrides);
}

RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string to_ini(const RunConfig& c) {
    std::ostringstream os;
    os << "[model]\n"
       << "beta = " << fmt(c.model.beta) << "\n"
       << "rho = " << fmt(c.model.rho) << "\n"
       << "nu = " << fmt(c.model.nu) << "\n"
       << "x0 = " << fmt(c.model.x0) << "\n"
       << "y0 = " << fmt(c.model.y0) << "\n\n";
    os << "[payoff]\n"
       << "type = " << c.payoff.type << "\n"
       << "strike = " << fmt(c.payoff.strike) << "\n"
       << "eps = " << fmt(c.payoff.eps) << "\n\n";
    os << "[discretization]\n"
       << "R_x = " << fmt(c.disc.R_x) << "\n"
       << "R_y = " << fmt(c.disc.R_y) << "\n"
       << "y_center = " << fmt(c.disc.y_center) << "\n"
       << "L_x = " << c.disc.L_x << "\n"
       << "L_y = " << c.disc.L_y << "\n"
       << "base_cells_x = " << c.disc.base_cells_x << "\n"
       << "base_cells_y = " << c.disc.base_cells_y << "\n"
       << "mu = " << fmt(c.disc.mu) << "\n"
       << "origin = " << (c.disc.origin == OriginBC::absorbing ? "absorbing" : "free") << "\n"
       << "lower_vol = " << (c.disc.lower_vol == VolEdgeBC::intrinsic ? "intrinsic" : "zero") << "\n"
       << "upper_vol = " << (c.disc.upper_vol == VolEdgeBC::intrinsic ? "intrinsic" : "zero") << "\n\n";
    os << "[time]\n"
       << "T = " << fmt(c.time.T) << "\n"
       << "theta = " << fmt(c.time.theta) << "\n"
       << "steps = " << (c.time.steps > 0 ? std::to_string(c.time.steps) : "auto") << "\n"
       << "startup_steps = " << (c.time.startup_steps >= 0 ? std::to_string(c.time.startup_steps) : "auto")
       << "\n\n";
    os << "[oracle]\n"
       << "mc_paths = " << c.mc.n_paths << "\n"
       << "mc_steps = " << c.mc.n_steps << "\n"
       << "seed = " << c.mc.seed << "\n"
       << "threads = " << c.mc.threads << "\n\n";
    os << "[study]\n"
       << "kind = " << c.study.kind << "\n"
       << "levels = " << join(c.study.levels) << "\n"
       << "steps = " << join(c.study.steps) << "\n"
       << "eps = " << join(c.study.eps) << "\n"
       << "barrier = " << fmt(c.study.barrier) << "\n\n";
    os << "[output]\n"
       << "dir = " << (c.output.dir.empty() ? "auto" : c.output.dir) << "\n"
       << "prefix = " << c.output.prefix << "\n";
    return os.str();
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file " + path);
    out << to_ini(cfg);
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace sabrfem
