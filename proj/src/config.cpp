#include "spinlab/config.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace spinlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct RawEntry {
    int line;
    std::string value;
};

struct Parser {
    std::map<std::string, RawEntry> entries;
    std::vector<ConfigIssue> issues;

    void fail(int line, std::string msg) { issues.push_back({line, std::move(msg)}); }

    bool take(const std::string& key, RawEntry* out) {
        auto it = entries.find(key);
        if (it == entries.end()) return false;
        *out = it->second;
        entries.erase(it);
        return true;
    }

    void parse_double(const std::string& key, double* out) {
        RawEntry e;
        if (!take(key, &e)) return;
        std::size_t pos = 0;
        try {
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            *out = v;
        } catch (...) {
            fail(e.line, key + ": expected a real number, got '" + e.value + "'");
        }
    }

    void parse_int(const std::string& key, int* out) {
        RawEntry e;
        if (!take(key, &e)) return;
        std::size_t pos = 0;
        try {
            const long v = std::stol(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            *out = static_cast<int>(v);
        } catch (...) {
            fail(e.line, key + ": expected an integer, got '" + e.value + "'");
        }
    }

    void parse_u64(const std::string& key, std::uint64_t* out) {
        RawEntry e;
        if (!take(key, &e)) return;
        std::size_t pos = 0;
        try {
            const unsigned long long v = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            *out = v;
        } catch (...) {
            fail(e.line, key + ": expected an unsigned integer, got '" + e.value + "'");
        }
    }

    void parse_string(const std::string& key, std::string* out) {
        RawEntry e;
        if (take(key, &e)) *out = e.value;
    }

    template <typename T, typename Convert>
    void parse_triple(const std::string& key, std::array<T, 3>* out, Convert conv,
                      const char* what) {
        RawEntry e;
        if (!take(key, &e)) return;
        std::array<T, 3> vals{};
        std::stringstream ss(e.value);
        std::string item;
        int count = 0;
        bool ok = true;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (count >= 3 || item.empty()) {
                ok = false;
                break;
            }
            try {
                vals[count] = conv(item);
            } catch (...) {
                ok = false;
                break;
            }
            ++count;
        }
        if (!ok || count != 3) {
            fail(e.line, key + ": expected three comma-separated " + what + ", got '" + e.value +
                             "'");
            return;
        }
        *out = vals;
    }

    void parse_vec3(const std::string& key, Vec3* out) {
        std::array<double, 3> vals = {out->x, out->y, out->z};
        parse_triple<double>(key, &vals, [](const std::string& s) {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        }, "reals");
        *out = {vals[0], vals[1], vals[2]};
    }
};

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> issues_in)
    : Error([&issues_in] {
          std::string what = "configuration invalid:";
          for (const auto& i : issues_in) {
              what += "\n  ";
              if (i.line > 0) what += "line " + std::to_string(i.line) + ": ";
              what += i.message;
          }
          return what;
      }()),
      issues(std::move(issues_in)) {}

RunConfig parse_config(const std::string& text) {
    Parser p;

    // collect section.key entries with duplicate detection
    {
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    p.fail(lineno, "malformed section header '" + line + "'");
                    continue;
                }
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) p.fail(lineno, "empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                p.fail(lineno, "expected 'key = value', got '" + line + "'");
                continue;
            }
            const std::string key =
                (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            auto [it, inserted] = p.entries.insert({key, {lineno, value}});
            if (!inserted) {
                p.fail(lineno, "duplicate key '" + key + "' (first set on line " +
                                   std::to_string(it->second.line) + ")");
            }
        }
    }

    RunConfig cfg;
    bool have_kind = false, have_aspect = false, have_res = false, have_eta = false;

    {
        RawEntry e;
        if (p.take("shape.kind", &e)) {
            have_kind = true;
            if (e.value == "cuboid") {
                cfg.shape.kind = ShapeKind::cuboid;
            } else if (e.value == "ellipsoid") {
                cfg.shape.kind = ShapeKind::ellipsoid;
            } else {
                p.fail(e.line, "shape.kind must be 'cuboid' or 'ellipsoid', got '" + e.value + "'");
            }
        }
    }
    if (p.entries.count("shape.aspect")) have_aspect = true;
    p.parse_triple<double>("shape.aspect", &cfg.shape.aspect, [](const std::string& s) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    }, "reals");
    if (p.entries.count("shape.resolution")) have_res = true;
    p.parse_triple<int>("shape.resolution", &cfg.resolution, [](const std::string& s) {
        std::size_t pos = 0;
        const int v = static_cast<int>(std::stol(s, &pos));
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    }, "integers");

    if (p.entries.count("params.eta")) have_eta = true;
    p.parse_double("params.eta", &cfg.params.eta);
    p.parse_double("params.alpha", &cfg.params.alpha);
    p.parse_double("params.lambda", &cfg.params.lambda);
    p.parse_double("params.period", &cfg.params.period);

    {
        RawEntry e;
        if (p.take("field.kind", &e)) {
            if (e.value == "none") {
                cfg.params.field.kind = FieldKind::none;
            } else if (e.value == "uniform_oscillating") {
                cfg.params.field.kind = FieldKind::uniform_oscillating;
            } else if (e.value == "uniform_rotating") {
                cfg.params.field.kind = FieldKind::uniform_rotating;
            } else {
                p.fail(e.line, "field.kind must be none | uniform_oscillating | uniform_rotating");
            }
        }
    }
    p.parse_vec3("field.axis_u", &cfg.params.field.u);
    p.parse_vec3("field.axis_v", &cfg.params.field.v);
    p.parse_double("field.amplitude", &cfg.params.field.amplitude);

    p.parse_double("solver.min_tol", &cfg.solver.min_tol);
    p.parse_int("solver.min_max_iters", &cfg.solver.min_max_iters);
    p.parse_double("solver.shoot_tol", &cfg.solver.shoot_tol);
    p.parse_int("solver.shoot_max_newton", &cfg.solver.shoot_max_newton);
    p.parse_double("solver.gmres_tol", &cfg.solver.gmres_tol);
    p.parse_int("solver.gmres_max_iters", &cfg.solver.gmres_max_iters);
    p.parse_double("solver.dt", &cfg.solver.dt);
    p.parse_double("solver.gap_tol", &cfg.solver.gap_tol);
    p.parse_double("solver.clearance_tol", &cfg.solver.clearance_tol);

    p.parse_u64("run.seed", &cfg.run.seed);
    p.parse_int("run.threads", &cfg.run.threads);
    p.parse_string("run.output_dir", &cfg.run.output_dir);

    for (const auto& [key, entry] : p.entries) {
        p.fail(entry.line, "unknown key '" + key + "'");
    }

    // requireds
    if (!have_kind) p.fail(0, "missing required key shape.kind");
    if (!have_aspect) p.fail(0, "missing required key shape.aspect");
    if (!have_res) p.fail(0, "missing required key shape.resolution");
    if (!have_eta) p.fail(0, "missing required key params.eta");

    // constraints
    for (double a : cfg.shape.aspect) {
        if (!(a > 0.0)) {
            p.fail(0, "shape.aspect entries must be strictly positive");
            break;
        }
    }
    for (int r : cfg.resolution) {
        if (r < 2) {
            p.fail(0, "shape.resolution must be at least 2 per axis");
            break;
        }
    }
    if (have_eta && !(cfg.params.eta > 0.0)) p.fail(0, "params.eta must be positive");
    if (!(cfg.params.period > 0.0)) p.fail(0, "params.period must be positive");
    if (!(cfg.solver.min_tol > 0.0)) p.fail(0, "solver.min_tol must be positive");
    if (!(cfg.solver.shoot_tol > 0.0)) p.fail(0, "solver.shoot_tol must be positive");
    if (!(cfg.solver.gmres_tol > 0.0)) p.fail(0, "solver.gmres_tol must be positive");
    if (!(cfg.solver.gap_tol > 0.0)) p.fail(0, "solver.gap_tol must be positive");
    if (!(cfg.solver.clearance_tol > 0.0)) p.fail(0, "solver.clearance_tol must be positive");
    if (cfg.solver.dt < 0.0) p.fail(0, "solver.dt must be >= 0 (0 selects the default)");
    if (cfg.solver.min_max_iters < 1) p.fail(0, "solver.min_max_iters must be >= 1");
    if (cfg.solver.shoot_max_newton < 1) p.fail(0, "solver.shoot_max_newton must be >= 1");
    if (cfg.solver.gmres_max_iters < 1) p.fail(0, "solver.gmres_max_iters must be >= 1");
    if (cfg.run.threads < 1) p.fail(0, "run.threads must be >= 1");

    cfg.params.field.period = cfg.params.period;  // one forcing period for the run
    if (cfg.params.field.kind != FieldKind::none) {
        try {
            validate_field_spec(cfg.params.field);
        } catch (const Error& e) {
            p.fail(0, e.what());
        }
    }

    if (!p.issues.empty()) throw ConfigParseError(std::move(p.issues));
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::string s;
    s += "[shape]\n";
    s += std::string("kind = ") + (cfg.shape.kind == ShapeKind::cuboid ? "cuboid" : "ellipsoid") +
         "\n";
    s += "aspect = " + fmt_double(cfg.shape.aspect[0]) + ", " + fmt_double(cfg.shape.aspect[1]) +
         ", " + fmt_double(cfg.shape.aspect[2]) + "\n";
    s += "resolution = " + std::to_string(cfg.resolution[0]) + ", " +
         std::to_string(cfg.resolution[1]) + ", " + std::to_string(cfg.resolution[2]) + "\n";
    s += "\n[params]\n";
    s += "eta = " + fmt_double(cfg.params.eta) + "\n";
    s += "alpha = " + fmt_double(cfg.params.alpha) + "\n";
    s += "lambda = " + fmt_double(cfg.params.lambda) + "\n";
    s += "period = " + fmt_double(cfg.params.period) + "\n";
    s += "\n[field]\n";
    const char* kind = cfg.params.field.kind == FieldKind::none
                           ? "none"
                           : (cfg.params.field.kind == FieldKind::uniform_oscillating
                                  ? "uniform_oscillating"
                                  : "uniform_rotating");
    s += std::string("kind = ") + kind + "\n";
    s += "axis_u = " + fmt_double(cfg.params.field.u.x) + ", " + fmt_double(cfg.params.field.u.y) +
         ", " + fmt_double(cfg.params.field.u.z) + "\n";
    s += "axis_v = " + fmt_double(cfg.params.field.v.x) + ", " + fmt_double(cfg.params.field.v.y) +
         ", " + fmt_double(cfg.params.field.v.z) + "\n";
    s += "amplitude = " + fmt_double(cfg.params.field.amplitude) + "\n";
    s += "\n[solver]\n";
    s += "min_tol = " + fmt_double(cfg.solver.min_tol) + "\n";
    s += "min_max_iters = " + std::to_string(cfg.solver.min_max_iters) + "\n";
    s += "shoot_tol = " + fmt_double(cfg.solver.shoot_tol) + "\n";
    s += "shoot_max_newton = " + std::to_string(cfg.solver.shoot_max_newton) + "\n";
    s += "gmres_tol = " + fmt_double(cfg.solver.gmres_tol) + "\n";
    s += "gmres_max_iters = " + std::to_string(cfg.solver.gmres_max_iters) + "\n";
    s += "dt = " + fmt_double(cfg.solver.dt) + "\n";
    s += "gap_tol = " + fmt_double(cfg.solver.gap_tol) + "\n";
    s += "clearance_tol = " + fmt_double(cfg.solver.clearance_tol) + "\n";
    s += "\n[run]\n";
    s += "seed = " + std::to_string(cfg.run.seed) + "\n";
    s += "threads = " + std::to_string(cfg.run.threads) + "\n";
    s += "output_dir = " + cfg.run.output_dir + "\n";
    return s;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace spinlab
