#include "fsp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fsp {

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "geodesic",         "deviation",        "lorentz",
        "papapetrou",       "dixon",            "fractal-ensemble",
        "fractal-deviation", "nelson",          "residual-schrodinger",
        "residual-kg",      "scale-derivative"};
    return names;
}

std::string ConfigError::str() const {
    std::ostringstream os;
    os << (kind == Kind::parse ? "parse error" : "validation error");
    if (line > 0) {
        os << " (line " << line;
        if (other_line > 0) os << " and line " << other_line;
        os << ")";
    }
    if (!field.empty()) os << " [" << field << "]";
    os << ": " << message;
    return os.str();
}

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Tokenizer + typed getters working against one section map.
class Reader {
  public:
    Reader(Sections& sections, std::vector<ConfigError>& errors)
        : sections_(sections), errors_(errors) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    Entry* entry(const std::string& section, const std::string& key) {
        auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    }

    void fail(const std::string& section, const std::string& key, const std::string& msg,
              int line = 0) {
        errors_.push_back(
            {ConfigError::Kind::validation, line, 0, section + "." + key, msg});
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        Entry* e = entry(section, key);
        if (!e) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(e->value, &pos);
            if (trim(e->value.substr(pos)).empty()) return v;
        } catch (...) {
        }
        fail(section, key, "expected a number, got '" + e->value + "'", e->line);
        return fallback;
    }

    std::uint64_t integer(const std::string& section, const std::string& key,
                          std::uint64_t fallback) {
        Entry* e = entry(section, key);
        if (!e) return fallback;
        try {
            return std::stoull(trim(e->value));
        } catch (...) {
            fail(section, key, "expected an integer, got '" + e->value + "'", e->line);
            return fallback;
        }
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) {
        Entry* e = entry(section, key);
        if (!e) return fallback;
        const std::string v = trim(e->value);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        fail(section, key, "expected true/false, got '" + v + "'", e->line);
        return fallback;
    }

    std::string text(const std::string& section, const std::string& key,
                     const std::string& fallback) {
        Entry* e = entry(section, key);
        return e ? trim(e->value) : fallback;
    }

    std::vector<double> numbers(const std::string& section, const std::string& key,
                                std::size_t count) {
        Entry* e = entry(section, key);
        std::vector<double> out;
        if (!e) return out;
        std::istringstream is(e->value);
        double v;
        while (is >> v) out.push_back(v);
        if (count != 0 && out.size() != count) {
            fail(section, key,
                 "expected " + std::to_string(count) + " numbers, got " +
                     std::to_string(out.size()),
                 e->line);
            out.assign(count, 0.0);
        }
        return out;
    }

    void require(const std::string& section, const std::string& key, const std::string& msg) {
        if (!has(section, key))
            errors_.push_back({ConfigError::Kind::validation, 0, 0, section + "." + key, msg});
    }

    void flag_unused() {
        for (auto& [sec, keys] : sections_)
            for (auto& [key, e] : keys)
                if (!e.used)
                    errors_.push_back({ConfigError::Kind::validation, e.line, 0,
                                       sec + "." + key, "unknown or unused key"});
    }

  private:
    Sections& sections_;
    std::vector<ConfigError>& errors_;
};

Vec4 to_vec4(const std::vector<double>& v, const Vec4& fallback) {
    if (v.size() != 4) return fallback;
    return Vec4{v[0], v[1], v[2], v[3]};
}

Vec3 to_vec3(const std::vector<double>& v, const Vec3& fallback) {
    if (v.size() != 3) return fallback;
    return Vec3{v[0], v[1], v[2]};
}

}  // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    Sections sections;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                result.errors.push_back(
                    {ConfigError::Kind::parse, lineno, 0, "", "unterminated section header"});
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                result.errors.push_back(
                    {ConfigError::Kind::parse, lineno, 0, "", "empty section name"});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back(
                {ConfigError::Kind::parse, lineno, 0, "", "expected 'key = value': '" + t + "'"});
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            result.errors.push_back({ConfigError::Kind::parse, lineno, 0, "", "empty key"});
            continue;
        }
        if (section.empty()) {
            result.errors.push_back({ConfigError::Kind::parse, lineno, 0, key,
                                     "key outside of any [section]"});
            continue;
        }
        auto [it, inserted] = sections[section].insert({key, Entry{value, lineno}});
        if (!inserted) {
            result.errors.push_back({ConfigError::Kind::parse, it->second.line, lineno,
                                     section + "." + key, "duplicate key"});
        }
    }

    Reader r(sections, result.errors);
    ScenarioConfig cfg;
    cfg.raw_text = text;

    cfg.scenario = r.text("scenario", "name", "");
    if (cfg.scenario.empty()) {
        r.require("scenario", "name", "scenario name required");
    } else {
        const auto& names = scenario_names();
        if (std::find(names.begin(), names.end(), cfg.scenario) == names.end())
            r.fail("scenario", "name", "unknown scenario '" + cfg.scenario + "'");
    }
    cfg.seed = r.integer("scenario", "seed", 0);
    cfg.out_dir = r.text("scenario", "out", cfg.out_dir);

    cfg.metric_name = r.text("metric", "name", cfg.metric_name);
    if (cfg.metric_name != "minkowski" && cfg.metric_name != "schwarzschild" &&
        cfg.metric_name != "weak-field")
        r.fail("metric", "name", "unknown metric '" + cfg.metric_name + "'");
    if (r.has("metric", "M")) cfg.metric_params["M"] = r.number("metric", "M", 1.0);
    if (r.has("metric", "margin"))
        cfg.metric_params["margin"] = r.number("metric", "margin", 1e-3);
    if (r.has("metric", "A")) cfg.metric_params["A"] = r.number("metric", "A", 0.1);

    cfg.x0 = to_vec4(r.numbers("initial", "x", r.has("initial", "x") ? 4 : 0), cfg.x0);
    if (r.has("initial", "U")) {
        // "circular" or four numbers
        Entry* e = r.entry("initial", "U");
        const std::string v = trim(e->value);
        if (v == "circular") {
            cfg.u_circular = true;
        } else {
            std::istringstream is(v);
            std::vector<double> nums;
            double d;
            while (is >> d) nums.push_back(d);
            if (nums.size() != 4)
                r.fail("initial", "U", "expected 'circular' or 4 numbers", e->line);
            else
                cfg.u0 = Vec4{nums[0], nums[1], nums[2], nums[3]};
        }
    }
    cfg.psi0 = to_vec4(r.numbers("initial", "psi", r.has("initial", "psi") ? 4 : 0), cfg.psi0);
    cfg.w0 = to_vec4(r.numbers("initial", "w", r.has("initial", "w") ? 4 : 0), cfg.w0);
    cfg.oracle = r.boolean("initial", "oracle", cfg.oracle);
    cfg.oracle_epsilon = r.number("initial", "oracle_epsilon", cfg.oracle_epsilon);

    cfg.step = r.number("integrator", "step", cfg.step);
    cfg.s_end = r.number("integrator", "s_end", cfg.s_end);
    if (!(cfg.step > 0.0)) r.fail("integrator", "step", "step must be > 0");

    cfg.mass = r.number("particle", "m", cfg.mass);
    cfg.charge = r.number("particle", "e", cfg.charge);
    {
        auto sp = r.numbers("particle", "spin", r.has("particle", "spin") ? 6 : 0);
        if (sp.size() == 6) std::copy(sp.begin(), sp.end(), cfg.spin.begin());
    }
    cfg.apply_ssc = r.boolean("particle", "ssc", cfg.apply_ssc);
    if (r.has("particle", "m") && !(cfg.mass > 0.0))
        r.fail("particle", "m", "mass must be > 0");

    cfg.e_field = to_vec3(r.numbers("em", "E", r.has("em", "E") ? 3 : 0), cfg.e_field);
    cfg.b_field = to_vec3(r.numbers("em", "B", r.has("em", "B") ? 3 : 0), cfg.b_field);

    cfg.fractal.lambda_c = r.number("fractal", "lambda_c", cfg.fractal.lambda_c);
    cfg.fractal.amplitude = r.number("fractal", "amplitude", cfg.fractal.amplitude);
    cfg.fractal.seed = cfg.seed;
    {
        const std::string law = r.text("fractal", "distribution", "gaussian");
        if (law == "gaussian") cfg.fractal.distribution = NoiseLaw::gaussian;
        else if (law == "uniform-symmetric") cfg.fractal.distribution = NoiseLaw::uniform_symmetric;
        else r.fail("fractal", "distribution", "expected gaussian or uniform-symmetric");
    }
    if (!(cfg.fractal.lambda_c > 0.0)) r.fail("fractal", "lambda_c", "lambda_c must be > 0");
    if (cfg.fractal.amplitude < 0.0) r.fail("fractal", "amplitude", "amplitude must be >= 0");

    cfg.ensemble_n = r.integer("ensemble", "n", cfg.ensemble_n);
    {
        auto sizes = r.numbers("ensemble", "fit_sizes", 0);
        for (double v : sizes) cfg.fit_sizes.push_back(static_cast<std::size_t>(v));
    }
    cfg.threads = static_cast<int>(r.integer("ensemble", "threads", 1));
    cfg.store_stride = r.integer("ensemble", "stride", 1);

    cfg.quantum.diffusion = r.number("quantum", "D", cfg.quantum.diffusion);
    cfg.quantum.lambda_c = r.number("quantum", "lambda_c", cfg.quantum.lambda_c);
    cfg.quantum.lambda = r.number("quantum", "lambda", cfg.quantum.lambda);
    cfg.quantum.xi = r.number("quantum", "xi", cfg.quantum.xi);
    cfg.quantum.mu = r.number("quantum", "mu", cfg.quantum.mu);
    if (!(cfg.quantum.diffusion > 0.0)) r.fail("quantum", "D", "D must be > 0");
    if (!(cfg.quantum.lambda_c > 0.0)) r.fail("quantum", "lambda_c", "lambda_c must be > 0");

    cfg.wave_k = to_vec3(r.numbers("quantum", "k", r.has("quantum", "k") ? 3 : 0), cfg.wave_k);
    cfg.omega = r.number("quantum", "omega", cfg.omega);
    cfg.sigma = r.number("quantum", "sigma", cfg.sigma);
    cfg.dt = r.number("quantum", "dt", cfg.dt);
    cfg.burn_in = r.number("quantum", "burn_in", cfg.burn_in);
    cfg.walkers = r.integer("quantum", "walkers", cfg.walkers);
    cfg.bins = static_cast<int>(r.integer("quantum", "bins", cfg.bins));
    cfg.mode = r.text("quantum", "mode", cfg.mode);
    if (cfg.mode != "analytic" && cfg.mode != "grid")
        r.fail("quantum", "mode", "expected analytic or grid");
    cfg.grid_n = static_cast<int>(r.integer("quantum", "grid_n", cfg.grid_n));
    cfg.grid_h = r.number("quantum", "grid_h", cfg.grid_h);
    cfg.field_kind = r.text("quantum", "field", cfg.field_kind);
    if (cfg.field_kind != "plane-wave" && cfg.field_kind != "quadratic-phase" &&
        cfg.field_kind != "modulated-wave")
        r.fail("quantum", "field", "expected plane-wave, quadratic-phase or modulated-wave");
    cfg.k4 = to_vec4(r.numbers("quantum", "k4", r.has("quantum", "k4") ? 4 : 0), cfg.k4);
    {
        auto qd = r.numbers("quantum", "quad_diag", r.has("quantum", "quad_diag") ? 4 : 0);
        if (qd.size() == 4) std::copy(qd.begin(), qd.end(), cfg.quad_diag.begin());
    }
    cfg.quad_mix = r.number("quantum", "quad_mix", cfg.quad_mix);
    cfg.quad_b = to_vec4(r.numbers("quantum", "quad_b", r.has("quantum", "quad_b") ? 4 : 0),
                         cfg.quad_b);
    cfg.fd_h = r.number("quantum", "fd_h", cfg.fd_h);
    cfg.eval_point = to_vec4(r.numbers("quantum", "point", r.has("quantum", "point") ? 4 : 0),
                             cfg.eval_point);
    cfg.f_const = r.number("quantum", "f_const", cfg.f_const);
    cfg.f_coeff = to_vec3(r.numbers("quantum", "f_coeff", r.has("quantum", "f_coeff") ? 3 : 0),
                          cfg.f_coeff);
    cfg.f_tcoeff = r.number("quantum", "f_tcoeff", cfg.f_tcoeff);
    cfg.v_re = to_vec3(r.numbers("quantum", "v_re", r.has("quantum", "v_re") ? 3 : 0), cfg.v_re);
    cfg.v_im = to_vec3(r.numbers("quantum", "v_im", r.has("quantum", "v_im") ? 3 : 0), cfg.v_im);
    cfg.extended = r.boolean("quantum", "extended", cfg.extended);
    cfg.n_points = static_cast<int>(r.integer("quantum", "n_points", cfg.n_points));
    cfg.x_lo = r.number("quantum", "x_lo", cfg.x_lo);
    cfg.x_hi = r.number("quantum", "x_hi", cfg.x_hi);

    // Scenario-specific requirements.
    const std::string& sc = cfg.scenario;
    if (sc == "lorentz" || sc == "papapetrou" || sc == "dixon")
        r.require("particle", "m", "m required");
    if (sc == "lorentz" || sc == "dixon") r.require("particle", "e", "e required");
    if (sc == "papapetrou" || sc == "dixon") r.require("particle", "spin", "spin required");
    if (sc == "geodesic" || sc == "deviation" || sc == "lorentz" || sc == "papapetrou" ||
        sc == "dixon" || sc == "fractal-ensemble" || sc == "fractal-deviation") {
        r.require("initial", "U", "U required");
        r.require("integrator", "s_end", "s_end required");
    }
    if (sc == "deviation" || sc == "fractal-deviation") r.require("initial", "psi", "psi required");
    if (sc == "fractal-ensemble" || sc == "fractal-deviation") {
        r.require("fractal", "amplitude", "amplitude required");
        r.require("ensemble", "n", "n required");
    }
    if (sc == "nelson") {
        r.require("quantum", "sigma", "sigma required");
        r.require("quantum", "walkers", "walkers required");
    }
    if (sc == "residual-schrodinger") {
        r.require("quantum", "k", "k required");
        r.require("quantum", "omega", "omega required");
    }
    if (sc == "residual-kg") r.require("quantum", "k4", "k4 required");
    if (cfg.u_circular && cfg.metric_name != "schwarzschild")
        r.fail("initial", "U", "U = circular needs the schwarzschild metric");

    r.flag_unused();

    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

ParseResult parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        ParseResult r;
        r.errors.push_back({ConfigError::Kind::parse, 0, 0, "", "cannot open '" + path + "'"});
        return r;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

ScenarioConfig load_config_file(const std::string& path) {
    ParseResult r = parse_config_file(path);
    if (!r.ok()) {
        std::string msg = "invalid config '" + path + "':";
        for (const auto& e : r.errors) msg += "\n  " + e.str();
        throw Error(msg);
    }
    return *r.config;
}

}  // namespace fsp
