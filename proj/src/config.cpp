#include "wavefdi/config.hpp"

#include "csv.hpp"
#include "wavefdi/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace wavefdi {

std::string to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::sensor_fault: return "sensor-fault";
    case ScenarioKind::param_change: return "param-change";
    case ScenarioKind::custom: return "custom";
    }
    return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& s) {
    for (auto k : {ScenarioKind::sensor_fault, ScenarioKind::param_change, ScenarioKind::custom})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::vector<std::size_t> odd_grid_points(std::size_t N) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i <= N; i += 2) out.push_back(i);
    return out;
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) {
    ScenarioConfig c;
    c.scenario = kind;
    c.model = WaveModel::sine_gordon(SineGordonParams{}, 50, 0.2);
    c.sensors = odd_grid_points(c.model.N);
    switch (kind) {
    case ScenarioKind::sensor_fault:
        c.sim.steps = 2000;
        c.faults.push_back({FaultKind::sensor_bias, 22, 0.05, 500, std::nullopt});
        break;
    case ScenarioKind::param_change:
        c.sim.steps = 5500;
        c.faults.push_back({FaultKind::param_drift_K, 0, 0.01, 3000, std::nullopt});
        break;
    case ScenarioKind::custom:
        c.sim.steps = 2000;
        break;
    }
    return c;
}

std::size_t ScenarioConfig::monitored_grid_point() const {
    if (fdi.subsystem != 0) return fdi.subsystem;
    return sensors.empty() ? 0 : *std::max_element(sensors.begin(), sensors.end());
}

std::size_t ScenarioConfig::monitored_sensor_row() const {
    const std::size_t g = monitored_grid_point();
    const auto it = std::find(sensors.begin(), sensors.end(), g);
    if (it == sensors.end())
        throw ConfigError("fdi.subsystem", "grid point " + std::to_string(g) + " carries no sensor");
    return static_cast<std::size_t>(it - sensors.begin());
}

double ScenarioConfig::q_value() const {
    return filter.q.value_or(sim.process_noise_std * sim.process_noise_std);
}

double ScenarioConfig::r_value() const {
    return filter.r.value_or(std::max(sim.measurement_noise_std * sim.measurement_noise_std, 1e-12));
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
    return scenario == o.scenario && model == o.model && sim == o.sim && sensors == o.sensors &&
           faults == o.faults && filter == o.filter && fdi == o.fdi && output_dir == o.output_dir;
}

void ScenarioConfig::validate() const {
    try {
        model.validate();
    } catch (const Error& e) {
        throw ConfigError("model", e.what());
    }
    try {
        sim.validate();
    } catch (const Error& e) {
        throw ConfigError("sim", e.what());
    }
    if (sim.initial.shape == InitialProfile::Shape::custom && sim.initial.values.size() != model.N)
        throw ConfigError("sim.initial.values", "custom profile needs exactly N = " + std::to_string(model.N) +
                                                    " values");
    if (sim.initial.shape == InitialProfile::Shape::gaussian_pulse && !(sim.initial.width > 0.0))
        throw ConfigError("sim.initial.width", "must be positive");

    if (sensors.empty()) throw ConfigError("sensors", "at least one sensor is required");
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const std::string key = "sensors[" + std::to_string(i) + "]";
        if (sensors[i] < 1 || sensors[i] > model.N)
            throw ConfigError(key, "grid point " + std::to_string(sensors[i]) + " outside 1.." +
                                       std::to_string(model.N));
        if (!seen.insert(sensors[i]).second) throw ConfigError(key, "duplicate sensor");
    }

    for (std::size_t i = 0; i < faults.size(); ++i) {
        const auto& f = faults[i];
        const std::string key = "faults[" + std::to_string(i) + "]";
        if (f.is_sensor_fault() && (f.target < 1 || f.target > sensors.size()))
            throw ConfigError(key + ".target", "sensor output " + std::to_string(f.target) + " outside 1.." +
                                                   std::to_string(sensors.size()));
        if (!std::isfinite(f.magnitude)) throw ConfigError(key + ".magnitude", "must be finite");
        if (f.kind == FaultKind::param_drift_K && !(1.0 + f.magnitude > 0.0))
            throw ConfigError(key + ".magnitude", "drift would make K non-positive");
        if (f.kind == FaultKind::sensor_noise_inflation && f.magnitude < 0.0)
            throw ConfigError(key + ".magnitude", "noise multiplier must be >= 0");
    }

    if (filter.q && !(*filter.q >= 0.0)) throw ConfigError("filter.q", "must be >= 0");
    if (filter.r && !(*filter.r > 0.0)) throw ConfigError("filter.r", "must be > 0");
    if (!(filter.p0 > 0.0)) throw ConfigError("filter.p0", "must be > 0");

    if (!(fdi.alpha > 0.0 && fdi.alpha < 1.0)) throw ConfigError("fdi.alpha", "must lie in (0, 1)");
    if (fdi.plan.window < 5) throw ConfigError("fdi.window", "must be at least the number of weights (5)");
    if (!(fdi.plan.overlap >= 0.0 && fdi.plan.overlap < 1.0)) throw ConfigError("fdi.overlap", "must lie in [0, 1)");
    if (fdi.lags < 0 || static_cast<std::size_t>(fdi.lags) >= fdi.plan.window)
        throw ConfigError("fdi.lags", "must lie in 0..window-1");
    if (!(fdi.sensor_ratio > 0.0)) throw ConfigError("fdi.sensor_ratio", "must be > 0");
    for (std::size_t i = 0; i < fdi.subsets.size(); ++i) {
        const std::string key = "fdi.subsets[" + std::to_string(i) + "]";
        if (fdi.subsets[i].empty()) throw ConfigError(key, "empty subset");
        std::set<std::size_t> s;
        for (auto w : fdi.subsets[i]) {
            if (w >= 5) throw ConfigError(key, "weight number " + std::to_string(w + 1) + " outside 1..5");
            if (!s.insert(w).second) throw ConfigError(key, "duplicate weight number");
        }
    }
    if (fdi.subsystem > model.N) throw ConfigError("fdi.subsystem", "outside 0..N");
    monitored_sensor_row();
}

// =============================================================================
// YAML reading
// =============================================================================

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

/// One mapping of the file; remembers which keys were consumed so that
/// unknown (typically misspelt) keys can be reported.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping", line_of(node_));
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    /// Null node when the key is absent; use has() to tell "absent" from "null".
    YAML::Node child(const std::string& k) {
        used_.insert(k);
        if (!has(k)) return YAML::Node();
        const YAML::Node& cn = node_;
        return cn[k];
    }

    bool has(const std::string& k) const {
        if (!node_ || !node_.IsMap()) return false;
        const YAML::Node& cn = node_;
        return static_cast<bool>(cn[k]);
    }

    template <class T>
    void get(const std::string& k, T& out) {
        const YAML::Node n = child(k);
        if (!n || n.IsNull()) return;
        out = convert<T>(n, key(k));
    }

    template <class T>
    static T convert(const YAML::Node& n, const std::string& key) {
        if (!n.IsScalar()) throw ConfigError(key, "expected a scalar value", line_of(n));
        try {
            if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
                const auto v = n.as<long long>();
                if (v < 0) throw ConfigError(key, "must be >= 0", line_of(n));
                return static_cast<T>(v);
            } else {
                return n.as<T>();
            }
        } catch (const YAML::BadConversion&) {
            throw ConfigError(key, "cannot read '" + n.Scalar() + "' as the expected type", line_of(n));
        }
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto name = kv.first.as<std::string>();
            if (!used_.count(name)) throw ConfigError(key(name), "unknown key", line_of(kv.first));
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

template <class Parse>
auto parse_enum(Section& sec, const std::string& k, Parse parse, const char* allowed) {
    std::string s;
    sec.get(k, s);
    auto v = parse(s);
    if (!v) throw ConfigError(sec.key(k), "unknown value '" + s + "', expected " + allowed);
    return *v;
}

void read_model(Section& root, ScenarioConfig& c) {
    Section sec(root.child("model"), "model");
    sec.get("K", c.model.K);
    sec.get("N", c.model.N);
    sec.get("dx", c.model.dx);
    sec.get("phi_left", c.model.phi_left);
    sec.get("phi_right", c.model.phi_right);
    if (sec.has("nonlinearity")) {
        Section nl(sec.child("nonlinearity"), "model.nonlinearity");
        std::string type = source_name(c.model.source);
        nl.get("type", type);
        if (type == "zero") {
            c.model.source = NoSource{};
        } else if (type == "sine-gordon") {
            SineGordonSource sg;
            if (const auto* cur = std::get_if<SineGordonSource>(&c.model.source)) sg = *cur;
            nl.get("c", sg.c);
            nl.get("eps", sg.eps);
            nl.get("l", sg.l);
            c.model.source = sg;
        } else {
            throw ConfigError("model.nonlinearity.type", "unknown value '" + type + "', expected zero|sine-gordon");
        }
        nl.finish();
    } else {
        sec.child("nonlinearity");
    }
    sec.finish();
}

void read_sim(Section& root, ScenarioConfig& c) {
    Section sec(root.child("sim"), "sim");
    sec.get("Ts", c.sim.Ts);
    sec.get("steps", c.sim.steps);
    sec.get("substeps", c.sim.substeps);
    sec.get("process_noise_std", c.sim.process_noise_std);
    sec.get("measurement_noise_std", c.sim.measurement_noise_std);
    if (sec.has("initial")) {
        Section ini(sec.child("initial"), "sim.initial");
        std::string shape = c.sim.initial.shape == InitialProfile::Shape::zero             ? "zero"
                            : c.sim.initial.shape == InitialProfile::Shape::gaussian_pulse ? "gaussian-pulse"
                                                                                           : "custom";
        ini.get("shape", shape);
        if (shape == "zero") c.sim.initial.shape = InitialProfile::Shape::zero;
        else if (shape == "gaussian-pulse") c.sim.initial.shape = InitialProfile::Shape::gaussian_pulse;
        else if (shape == "custom") c.sim.initial.shape = InitialProfile::Shape::custom;
        else throw ConfigError("sim.initial.shape", "unknown value '" + shape + "', expected zero|gaussian-pulse|custom");
        ini.get("center", c.sim.initial.center);
        ini.get("width", c.sim.initial.width);
        ini.get("amplitude", c.sim.initial.amplitude);
        const YAML::Node vals = ini.child("values");
        if (vals && !vals.IsNull()) {
            if (!vals.IsSequence()) throw ConfigError("sim.initial.values", "expected a list", line_of(vals));
            c.sim.initial.values.clear();
            for (std::size_t i = 0; i < vals.size(); ++i)
                c.sim.initial.values.push_back(
                    Section::convert<double>(vals[i], "sim.initial.values[" + std::to_string(i) + "]"));
        }
        ini.finish();
    } else {
        sec.child("initial");
    }
    sec.finish();
}

void read_sensors(Section& root, ScenarioConfig& c) {
    const YAML::Node n = root.child("sensors");
    if (!n || n.IsNull()) {
        c.sensors = odd_grid_points(c.model.N);
        return;
    }
    if (!n.IsSequence()) throw ConfigError("sensors", "expected a list of grid points", line_of(n));
    c.sensors.clear();
    for (std::size_t i = 0; i < n.size(); ++i)
        c.sensors.push_back(Section::convert<std::size_t>(n[i], "sensors[" + std::to_string(i) + "]"));
}

void read_faults(Section& root, ScenarioConfig& c) {
    if (!root.has("faults")) return;
    const YAML::Node n = root.child("faults");
    c.faults.clear();
    if (n.IsNull()) return;
    if (!n.IsSequence()) throw ConfigError("faults", "expected a list", line_of(n));
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string path = "faults[" + std::to_string(i) + "]";
        Section sec(n[i], path);
        FaultSpec f;
        std::string kind;
        sec.get("kind", kind);
        const auto k = parse_fault_kind(kind);
        if (!k)
            throw ConfigError(path + ".kind", "unknown fault kind '" + kind +
                                                  "', expected sensor-bias|sensor-stuck|sensor-noise-inflation|param-drift-K");
        f.kind = *k;
        const YAML::Node target = sec.child("target");
        if (target && !target.IsNull()) {
            if (f.kind == FaultKind::param_drift_K) {
                if (target.Scalar() != "K")
                    throw ConfigError(path + ".target", "param-drift-K only targets K", line_of(target));
            } else {
                f.target = Section::convert<std::size_t>(target, path + ".target");
            }
        }
        sec.get("magnitude", f.magnitude);
        sec.get("onset", f.onset);
        std::size_t duration = 0;
        if (sec.has("duration") && !sec.child("duration").IsNull()) {
            sec.get("duration", duration);
            f.duration = duration;
        } else {
            sec.child("duration");
        }
        sec.finish();
        c.faults.push_back(f);
    }
}

void read_filter(Section& root, ScenarioConfig& c) {
    Section sec(root.child("filter"), "filter");
    double v = 0.0;
    if (sec.has("q")) {
        sec.get("q", v);
        c.filter.q = v;
    } else {
        sec.child("q");
    }
    if (sec.has("r")) {
        sec.get("r", v);
        c.filter.r = v;
    } else {
        sec.child("r");
    }
    sec.get("p0", c.filter.p0);
    if (sec.has("discretization"))
        c.filter.discretization = parse_enum(sec, "discretization", parse_discretization, "euler|exact");
    sec.finish();
}

void read_fdi(Section& root, ScenarioConfig& c) {
    Section sec(root.child("fdi"), "fdi");
    sec.get("alpha", c.fdi.alpha);
    if (sec.has("threshold")) c.fdi.threshold = parse_enum(sec, "threshold", parse_threshold_mode, "quantile|dof-mean");
    if (sec.has("isolation"))
        c.fdi.isolation = parse_enum(sec, "isolation", parse_isolation_mode, "none|sensitivity|minmax");
    sec.get("window", c.fdi.plan.window);
    sec.get("overlap", c.fdi.plan.overlap);
    sec.get("burn_in", c.fdi.plan.burn_in);
    sec.get("lags", c.fdi.lags);
    sec.get("subsystem", c.fdi.subsystem);
    sec.get("sensor_ratio", c.fdi.sensor_ratio);
    sec.get("dump_matrices", c.fdi.dump_matrices);
    const YAML::Node subs = sec.child("subsets");
    if (subs && !subs.IsNull()) {
        if (!subs.IsSequence()) throw ConfigError("fdi.subsets", "expected a list of lists", line_of(subs));
        c.fdi.subsets.clear();
        for (std::size_t i = 0; i < subs.size(); ++i) {
            const std::string key = "fdi.subsets[" + std::to_string(i) + "]";
            if (!subs[i].IsSequence()) throw ConfigError(key, "expected a list of weight numbers", line_of(subs[i]));
            Subset s;
            for (std::size_t j = 0; j < subs[i].size(); ++j) {
                const auto w = Section::convert<std::size_t>(subs[i][j], key);
                if (w < 1) throw ConfigError(key, "weight numbers start at 1", line_of(subs[i][j]));
                s.push_back(w - 1);
            }
            c.fdi.subsets.push_back(s);
        }
    }
    sec.finish();
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.msg, e.mark.line + 1);
    }

    Section root(doc, "");
    std::string kind_name = to_string(ScenarioKind::sensor_fault);
    root.get("scenario", kind_name);
    const auto kind = parse_scenario_kind(kind_name);
    if (!kind) throw ConfigError("scenario", "unknown scenario '" + kind_name + "', expected sensor-fault|param-change|custom");

    ScenarioConfig c = ScenarioConfig::defaults(*kind);
    root.get("seed", c.sim.seed);
    root.get("output_dir", c.output_dir);
    read_model(root, c);
    read_sensors(root, c);
    read_sim(root, c);
    read_faults(root, c);
    read_filter(root, c);
    read_fdi(root, c);
    root.finish();

    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// =============================================================================
// YAML writing
// =============================================================================

namespace {

// shortest round-trip text keeps load(dump(c)) == c exact
struct Num {
    double v;
};
YAML::Emitter& operator<<(YAML::Emitter& out, Num n) { return out << detail::num(n.v); }

}  // namespace

std::string dump_config(const ScenarioConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "scenario" << YAML::Value << to_string(c.scenario);
    out << YAML::Key << "seed" << YAML::Value << c.sim.seed;
    if (!c.output_dir.empty()) out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "K" << YAML::Value << Num{c.model.K};
    out << YAML::Key << "N" << YAML::Value << c.model.N;
    out << YAML::Key << "dx" << YAML::Value << Num{c.model.dx};
    out << YAML::Key << "phi_left" << YAML::Value << Num{c.model.phi_left};
    out << YAML::Key << "phi_right" << YAML::Value << Num{c.model.phi_right};
    out << YAML::Key << "nonlinearity" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value << source_name(c.model.source);
    if (const auto* sg = std::get_if<SineGordonSource>(&c.model.source)) {
        out << YAML::Key << "c" << YAML::Value << Num{sg->c};
        out << YAML::Key << "eps" << YAML::Value << Num{sg->eps};
        out << YAML::Key << "l" << YAML::Value << Num{sg->l};
    }
    out << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "sensors" << YAML::Value << YAML::Flow << c.sensors;

    out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "Ts" << YAML::Value << Num{c.sim.Ts};
    out << YAML::Key << "steps" << YAML::Value << c.sim.steps;
    out << YAML::Key << "substeps" << YAML::Value << c.sim.substeps;
    out << YAML::Key << "process_noise_std" << YAML::Value << Num{c.sim.process_noise_std};
    out << YAML::Key << "measurement_noise_std" << YAML::Value << Num{c.sim.measurement_noise_std};
    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    const auto& ini = c.sim.initial;
    out << YAML::Key << "shape" << YAML::Value
        << (ini.shape == InitialProfile::Shape::zero             ? "zero"
            : ini.shape == InitialProfile::Shape::gaussian_pulse ? "gaussian-pulse"
                                                                 : "custom");
    out << YAML::Key << "center" << YAML::Value << Num{ini.center};
    out << YAML::Key << "width" << YAML::Value << Num{ini.width};
    out << YAML::Key << "amplitude" << YAML::Value << Num{ini.amplitude};
    if (!ini.values.empty()) {
        out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double v : ini.values) out << Num{v};
        out << YAML::EndSeq;
    }
    out << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "faults" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : c.faults) {
        out << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << to_string(f.kind);
        if (f.kind == FaultKind::param_drift_K) out << YAML::Key << "target" << YAML::Value << "K";
        else out << YAML::Key << "target" << YAML::Value << f.target;
        out << YAML::Key << "magnitude" << YAML::Value << Num{f.magnitude};
        out << YAML::Key << "onset" << YAML::Value << f.onset;
        if (f.duration) out << YAML::Key << "duration" << YAML::Value << *f.duration;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "filter" << YAML::Value << YAML::BeginMap;
    if (c.filter.q) out << YAML::Key << "q" << YAML::Value << Num{*c.filter.q};
    if (c.filter.r) out << YAML::Key << "r" << YAML::Value << Num{*c.filter.r};
    out << YAML::Key << "p0" << YAML::Value << Num{c.filter.p0};
    out << YAML::Key << "discretization" << YAML::Value << to_string(c.filter.discretization);
    out << YAML::EndMap;

    out << YAML::Key << "fdi" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "alpha" << YAML::Value << Num{c.fdi.alpha};
    out << YAML::Key << "threshold" << YAML::Value << to_string(c.fdi.threshold);
    out << YAML::Key << "isolation" << YAML::Value << to_string(c.fdi.isolation);
    out << YAML::Key << "window" << YAML::Value << c.fdi.plan.window;
    out << YAML::Key << "overlap" << YAML::Value << Num{c.fdi.plan.overlap};
    out << YAML::Key << "burn_in" << YAML::Value << c.fdi.plan.burn_in;
    out << YAML::Key << "lags" << YAML::Value << c.fdi.lags;
    out << YAML::Key << "subsystem" << YAML::Value << c.fdi.subsystem;
    out << YAML::Key << "sensor_ratio" << YAML::Value << Num{c.fdi.sensor_ratio};
    out << YAML::Key << "dump_matrices" << YAML::Value << c.fdi.dump_matrices;
    if (!c.fdi.subsets.empty()) {
        out << YAML::Key << "subsets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& s : c.fdi.subsets) {
            out << YAML::BeginSeq;
            for (auto w : s) out << w + 1;
            out << YAML::EndSeq;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("", "cannot write config file " + path.string());
    os << dump_config(cfg);
}

}  // namespace wavefdi
