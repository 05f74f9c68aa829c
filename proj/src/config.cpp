#include "birkhoff/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace birkhoff {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(to_double(key, item));
    return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& text) {
    std::vector<int> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(to_int<int>(key, item));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
}

const std::set<std::string> kTargets{"origin", "nearest", "plus_infinity", "minus_infinity"};

void validate(const RunConfig& c) {
    const auto& p = c.pipeline;
    require(c.scenario.domain_lo.size() == c.scenario.domain_hi.size(), "domain_lo and domain_hi differ in length");
    require(c.cone.eta >= 0.0, "cone eta must be nonnegative");
    require(!p.depths.empty(), "depths must not be empty");
    for (std::size_t i = 0; i < p.depths.size(); ++i) {
        require(p.depths[i] >= 1 && p.depths[i] <= 20, "depths must lie in [1, 20]");
        require(i == 0 || p.depths[i] > p.depths[i - 1], "depths must be increasing");
    }
    require(p.map_time > 0.0, "map_time must be positive");
    require(p.samples_per_box >= 1, "samples_per_box must be at least 1");
    require(p.padding_mode == "lipschitz" || p.padding_mode == "fixed", "padding_mode must be lipschitz or fixed");
    require(p.padding >= 0.0, "padding must be nonnegative");
    require(p.padding_factor > 0.0, "padding_factor must be positive");
    require(p.window > 1.0, "window must exceed 1");
    require(p.horizon > 0.0, "horizon must be positive");
    require(p.ip_generators >= 1 && p.ip_generators <= 12, "ip_generators must lie in [1, 12]");
    require(p.backward_time > 0.0, "backward_time must be positive");
    require(kTargets.count(p.cell_target) == 1, "unknown cell_target '" + p.cell_target + "'");
    require(p.compare_target == "none" || kTargets.count(p.compare_target) == 1,
            "unknown compare_target '" + p.compare_target + "'");
    require(p.cell_side == "upper" || p.cell_side == "lower", "cell_side must be upper or lower");
    require(p.compare_side == "upper" || p.compare_side == "lower", "compare_side must be upper or lower");
    require(p.cell_nodes.size() == p.cell_half_width.size() && p.cell_nodes.size() == p.cell_center.size(),
            "cell_nodes, cell_half_width and cell_center must have equal length");
    for (int k : p.cell_nodes) require(k >= 1, "cell_nodes entries must be at least 1");
    for (double h : p.cell_half_width) require(h >= 0.0, "cell_half_width entries must be nonnegative");
    require(p.cell_tol > 0.0, "cell_tol must be positive");
    require(p.cell_flow_time > 0.0, "cell_flow_time must be positive");
    require(p.entropy_horizons.size() >= 3, "entropy_horizons needs at least 3 entries");
    require(p.entropy_epsilons.size() >= 2, "entropy_epsilons needs at least 2 entries");
    for (double t : p.entropy_horizons) require(t > 0.0, "entropy_horizons must be positive");
    for (double e : p.entropy_epsilons) require(e > 0.0, "entropy_epsilons must be positive");
    require(p.entropy_threshold > 0.0, "entropy_threshold must be positive");
    require(p.margin > 0.0 && p.shell > 0.0, "margin and shell must be positive");
    require(p.rel_tol > 0.0 && p.abs_tol > 0.0, "integrator tolerances must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    auto& sc = c.scenario;
    auto& p = c.pipeline;
    for (const auto& [section, body] : tree) {
        require(!body.empty() || body.data().empty(), "key '" + section + "' outside a block");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string where = section + "." + key;
            if (section == "scenario") {
                if (key == "name") {
                    sc.name = trim(v);
                } else if (key == "params") {
                    sc.params.clear();
                    if (trim(v).empty()) continue;
                    for (const auto& kv : split(v, ',')) {
                        const auto pos = kv.find(':');
                        require(pos != std::string::npos, "params entries must be name:value, got '" + kv + "'");
                        const std::string name = trim(kv.substr(0, pos));
                        require(!name.empty() && sc.params.count(name) == 0, "bad or repeated param '" + name + "'");
                        sc.params[name] = to_double(where, kv.substr(pos + 1));
                    }
                } else if (key == "domain_lo") {
                    sc.domain_lo = to_doubles(where, v);
                } else if (key == "domain_hi") {
                    sc.domain_hi = to_doubles(where, v);
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            } else if (section == "cone") {
                if (key == "matrix") {
                    c.cone.matrix = trim(v);
                } else if (key == "eta") {
                    c.cone.eta = to_double(where, v);
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            } else if (section == "pipeline") {
                if (key == "depths") p.depths = to_ints(where, v);
                else if (key == "map_time") p.map_time = to_double(where, v);
                else if (key == "samples_per_box") p.samples_per_box = to_int<int>(where, v);
                else if (key == "padding_mode") p.padding_mode = trim(v);
                else if (key == "padding") p.padding = to_double(where, v);
                else if (key == "padding_factor") p.padding_factor = to_double(where, v);
                else if (key == "theta") p.theta = to_double(where, v);
                else if (key == "window") p.window = to_double(where, v);
                else if (key == "horizon") p.horizon = to_double(where, v);
                else if (key == "ip_generators") p.ip_generators = to_int<int>(where, v);
                else if (key == "backward_time") p.backward_time = to_double(where, v);
                else if (key == "cell_target") p.cell_target = trim(v);
                else if (key == "cell_point") p.cell_point = to_doubles(where, v);
                else if (key == "cell_side") p.cell_side = trim(v);
                else if (key == "compare_target") p.compare_target = trim(v);
                else if (key == "compare_side") p.compare_side = trim(v);
                else if (key == "cell_nodes") p.cell_nodes = to_ints(where, v);
                else if (key == "cell_half_width") p.cell_half_width = to_doubles(where, v);
                else if (key == "cell_center") p.cell_center = to_doubles(where, v);
                else if (key == "cell_tol") p.cell_tol = to_double(where, v);
                else if (key == "cell_flow_time") p.cell_flow_time = to_double(where, v);
                else if (key == "entropy_horizons") p.entropy_horizons = to_doubles(where, v);
                else if (key == "entropy_epsilons") p.entropy_epsilons = to_doubles(where, v);
                else if (key == "entropy_threshold") p.entropy_threshold = to_double(where, v);
                else if (key == "margin") p.margin = to_double(where, v);
                else if (key == "shell") p.shell = to_double(where, v);
                else if (key == "rel_tol") p.rel_tol = to_double(where, v);
                else if (key == "abs_tol") p.abs_tol = to_double(where, v);
                else throw ConfigError("config: unknown key '" + where + "'");
            } else if (section == "run") {
                if (key == "seed") {
                    c.run.seed = to_int<std::uint64_t>(where, v);
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            } else {
                throw ConfigError("config: unknown block '" + section + "'");
            }
        }
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    const auto& p = c.pipeline;
    os << "[scenario]\n";
    os << "name = " << c.scenario.name << '\n';
    os << "params = ";
    bool first = true;
    for (const auto& [k, v] : c.scenario.params) {
        os << (first ? "" : ",") << k << ':' << fmt(v);
        first = false;
    }
    os << '\n';
    os << "domain_lo = " << join(c.scenario.domain_lo) << '\n';
    os << "domain_hi = " << join(c.scenario.domain_hi) << '\n';
    os << "\n[cone]\n";
    os << "matrix = " << c.cone.matrix << '\n';
    os << "eta = " << fmt(c.cone.eta) << '\n';
    os << "\n[pipeline]\n";
    os << "depths = " << join(p.depths) << '\n';
    os << "map_time = " << fmt(p.map_time) << '\n';
    os << "samples_per_box = " << p.samples_per_box << '\n';
    os << "padding_mode = " << p.padding_mode << '\n';
    os << "padding = " << fmt(p.padding) << '\n';
    os << "padding_factor = " << fmt(p.padding_factor) << '\n';
    os << "theta = " << fmt(p.theta) << '\n';
    os << "window = " << fmt(p.window) << '\n';
    os << "horizon = " << fmt(p.horizon) << '\n';
    os << "ip_generators = " << p.ip_generators << '\n';
    os << "backward_time = " << fmt(p.backward_time) << '\n';
    os << "cell_target = " << p.cell_target << '\n';
    os << "cell_point = " << join(p.cell_point) << '\n';
    os << "cell_side = " << p.cell_side << '\n';
    os << "compare_target = " << p.compare_target << '\n';
    os << "compare_side = " << p.compare_side << '\n';
    os << "cell_nodes = " << join(p.cell_nodes) << '\n';
    os << "cell_half_width = " << join(p.cell_half_width) << '\n';
    os << "cell_center = " << join(p.cell_center) << '\n';
    os << "cell_tol = " << fmt(p.cell_tol) << '\n';
    os << "cell_flow_time = " << fmt(p.cell_flow_time) << '\n';
    os << "entropy_horizons = " << join(p.entropy_horizons) << '\n';
    os << "entropy_epsilons = " << join(p.entropy_epsilons) << '\n';
    os << "entropy_threshold = " << fmt(p.entropy_threshold) << '\n';
    os << "margin = " << fmt(p.margin) << '\n';
    os << "shell = " << fmt(p.shell) << '\n';
    os << "rel_tol = " << fmt(p.rel_tol) << '\n';
    os << "abs_tol = " << fmt(p.abs_tol) << '\n';
    os << "\n[run]\n";
    os << "seed = " << c.run.seed << '\n';
    return os.str();
}

bool RunConfig::operator==(const RunConfig& other) const {
    return serialize_config(*this) == serialize_config(other);
}

Scenario build_scenario(const RunConfig& cfg) {
    try {
        if (cfg.scenario.domain_lo.empty()) return make_scenario(cfg.scenario.name, cfg.scenario.params);
        const Vec lo = Eigen::Map<const Vec>(cfg.scenario.domain_lo.data(), cfg.scenario.domain_lo.size());
        const Vec hi = Eigen::Map<const Vec>(cfg.scenario.domain_hi.data(), cfg.scenario.domain_hi.size());
        const Box domain(lo, hi);
        return make_scenario(cfg.scenario.name, cfg.scenario.params, &domain);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: scenario: ") + e.what());
    }
}

ConeSpec build_cone(const RunConfig& cfg, int dimension) {
    try {
        if (cfg.cone.matrix == "identity") return ConeSpec::orthant(dimension, cfg.cone.eta);
        const auto rows = split(cfg.cone.matrix, ';');
        require(static_cast<int>(rows.size()) == dimension, "cone matrix must have one row per dimension");
        Mat g(dimension, dimension);
        for (int i = 0; i < dimension; ++i) {
            const auto vals = to_doubles("cone.matrix", rows[i]);
            require(static_cast<int>(vals.size()) == dimension, "cone matrix must be square");
            for (int j = 0; j < dimension; ++j) g(i, j) = vals[j];
        }
        return ConeSpec(g, cfg.cone.eta);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: cone: ") + e.what());
    }
}

}  // namespace birkhoff
