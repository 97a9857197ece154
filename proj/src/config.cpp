#include "ldaction/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace ldaction {

using nlohmann::json;

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::field, "field"},
    {Command::stochastic_field, "stochastic-field"},
    {Command::poincare, "poincare"},
    {Command::time_average, "time-average"},
    {Command::frequency, "frequency"},
    {Command::extract, "extract"},
    {Command::bench, "bench"},
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be reported as unknown.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) fail(key_path(key), "missing required key");
        return *it;
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key_path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key_path(key), "must be finite");
        return d;
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

    std::uint64_t unsigned_integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail(key_path(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        return has(key) ? unsigned_integer(key) : mark(key, fallback);
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key_path(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : mark(key, fallback);
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(key_path(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>()))
                fail(key_path(key), "expected an array of finite numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Block child(const std::string& key) { return Block(raw(key), key_path(key)); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(key_path(it.key()), "unknown key");
    }

private:
    template <class T>
    T mark(const std::string& key, T value) {
        seen_.insert(key);
        return value;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum choose(const std::string& path, const std::string& value,
            const std::array<std::pair<Enum, std::string_view>, N>& names) {
    for (const auto& [e, name] : names)
        if (value == name) return e;
    std::string allowed;
    for (const auto& [e, name] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    fail(path, "unknown value \"" + value + "\" (expected one of " + allowed + ")");
}

template <class Enum, std::size_t N>
std::string_view name_of(Enum e, const std::array<std::pair<Enum, std::string_view>, N>& names) {
    for (const auto& [v, name] : names)
        if (v == e) return name;
    return "?";
}

constexpr std::array<std::pair<LDMode, std::string_view>, 2> kModes{
    {{LDMode::fixed, "fixed"}, {LDMode::variable, "variable"}}};
constexpr std::array<std::pair<Method, std::string_view>, 2> kMethods{
    {{Method::rk4, "rk4"}, {Method::euler_maruyama, "euler_maruyama"}}};
constexpr std::array<std::pair<BackwardNoise, std::string_view>, 2> kNoise{
    {{BackwardNoise::independent, "independent"}, {BackwardNoise::reflected, "reflected"}}};
constexpr std::array<std::pair<NoiseSharing, std::string_view>, 2> kSharing{
    {{NoiseSharing::grid, "shared"}, {NoiseSharing::per_point, "per_point"}}};
constexpr std::array<std::pair<FeatureMeasure, std::string_view>, 2> kMeasures{
    {{FeatureMeasure::gradient, "gradient"}, {FeatureMeasure::laplacian, "laplacian"}}};
constexpr std::array<std::pair<SectionKind, std::string_view>, 2> kKinds{
    {{SectionKind::full_plane, "full_plane"}, {SectionKind::energy_section, "energy_section"}}};
constexpr std::array<std::pair<CrossingDirection, std::string_view>, 3> kDirections{
    {{CrossingDirection::positive, "positive"},
     {CrossingDirection::negative, "negative"},
     {CrossingDirection::both, "both"}}};
constexpr std::array<std::pair<OutputFormat, std::string_view>, 2> kFormats{
    {{OutputFormat::csv, "csv"}, {OutputFormat::f64bin, "f64bin"}}};

SystemSpec parse_system(Block b) {
    const std::string type = b.string("type");
    SystemSpec sys;
    if (type == "saddle") {
        Saddle s;
        s.lambda = b.number("lambda", s.lambda);
        sys = s;
    } else if (type == "harmonic") {
        Harmonic s;
        s.m = b.number("m", s.m);
        s.omega = b.number("omega", s.omega);
        sys = s;
    } else if (type == "proton_transfer") {
        ProtonTransfer s;
        s.m = b.number("m", s.m);
        s.barrier = b.number("barrier", s.barrier);
        s.y_well = b.number("y_well", s.y_well);
        s.omega = b.number("omega", s.omega);
        s.coupling = b.number("coupling", s.coupling);
        sys = s;
    } else if (type == "duffing") {
        Duffing s;
        s.sigma = b.number("sigma", s.sigma);
        sys = s;
    } else {
        fail(b.key_path("type"), "unknown system \"" + type + "\" (expected saddle, harmonic, proton_transfer, duffing)");
    }
    b.finish();
    try {
        validate(sys);
    } catch (const std::invalid_argument& e) {
        fail(b.path(), e.what());
    }
    return sys;
}

AxisRange parse_axis(Block b) {
    AxisRange a;
    a.min = b.number("min");
    a.max = b.number("max");
    a.count = b.unsigned_integer("count");
    b.finish();
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        fail(b.path(), e.what());
    }
    return a;
}

LDParams parse_ld(Block b) {
    LDParams p;
    p.tau_f = b.number("tau_f");
    p.tau_b = b.number("tau_b", p.tau_f);
    p.t0 = b.number("t0", p.t0);
    p.dt = b.number("dt", p.dt);
    p.mode = choose(b.key_path("mode"), b.string("mode", "fixed"), kModes);
    p.method = choose(b.key_path("method"), b.string("method", "rk4"), kMethods);
    p.backward_noise = choose(b.key_path("backward_noise"), b.string("backward_noise", "independent"), kNoise);
    if (b.has("stop_region")) {
        Block r = b.child("stop_region");
        Box box{r.numbers("lo"), r.numbers("hi")};
        r.finish();
        p.stop_region = std::move(box);
    }
    if (b.has("ensemble")) {
        Block e = b.child("ensemble");
        Ensemble ens;
        ens.n_realizations = e.unsigned_integer("n_realizations");
        ens.sharing = choose(e.key_path("noise"), e.string("noise", "shared"), kSharing);
        e.finish();
        p.ensemble = ens;
    }
    b.finish();
    return p;
}

SectionSpec parse_section(Block b) {
    SectionSpec s;
    s.kind = choose(b.key_path("kind"), b.string("kind", "full_plane"), kKinds);
    s.axis1 = parse_axis(b.child("axis1"));
    s.axis2 = parse_axis(b.child("axis2"));
    s.fixed_dof = b.unsigned_integer("fixed_dof", 0);
    s.fixed_value = b.number("fixed_value", 0.0);
    s.energy = s.kind == SectionKind::energy_section ? b.number("energy") : b.number("energy", 0.0);
    s.direction = choose(b.key_path("direction"), b.string("direction", "positive"), kDirections);
    b.finish();
    return s;
}

PoincareBlock parse_poincare(Block b) {
    PoincareBlock p;
    p.options.t_max = b.number("t_max", p.options.t_max);
    p.options.max_crossings = b.unsigned_integer("max_crossings", p.options.max_crossings);
    p.options.dt = b.number("dt", p.options.dt);
    p.options.tolerance = b.number("tolerance", p.options.tolerance);
    p.orbits = b.unsigned_integer("orbits", p.orbits);
    if (b.has("initial_points")) {
        const json& pts = b.raw("initial_points");
        if (!pts.is_array()) fail(b.key_path("initial_points"), "expected an array of [a1, a2] pairs");
        for (const auto& e : pts) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                fail(b.key_path("initial_points"), "expected an array of [a1, a2] pairs");
            p.initial_points.push_back({e[0].get<double>(), e[1].get<double>()});
        }
    }
    b.finish();
    if (!(p.options.dt > 0.0)) fail(b.key_path("dt"), "must be > 0");
    if (!(p.options.t_max > 0.0)) fail(b.key_path("t_max"), "must be > 0");
    if (!(p.options.tolerance > 0.0)) fail(b.key_path("tolerance"), "must be > 0");
    return p;
}

FrequencyBlock parse_frequency(Block b) {
    FrequencyBlock f;
    f.tau_max = b.number("tau_max", f.tau_max);
    f.samples = b.unsigned_integer("samples", f.samples);
    f.dt = b.number("dt", f.dt);
    f.initial = PhaseState(b.numbers("q0"), b.numbers("p0"));
    if (b.has("s_inf")) f.s_inf = b.number("s_inf");
    b.finish();
    if (!(f.tau_max > 0.0)) fail(b.key_path("tau_max"), "must be > 0");
    if (f.samples < 64) fail(b.key_path("samples"), "must be >= 64");
    if (!(f.dt > 0.0)) fail(b.key_path("dt"), "must be > 0");
    try {
        f.initial.validate();
    } catch (const std::invalid_argument& e) {
        fail(b.path(), e.what());
    }
    return f;
}

ExtractBlock parse_extract(Block b) {
    ExtractBlock x;
    x.percentile = b.number("percentile", x.percentile);
    x.measure = choose(b.key_path("measure"), b.string("measure", "gradient"), kMeasures);
    x.minima_radius = b.unsigned_integer("minima_radius", x.minima_radius);
    b.finish();
    if (!(x.percentile >= 0.0 && x.percentile < 100.0)) fail(b.key_path("percentile"), "must lie in [0, 100)");
    if (x.minima_radius < 1) fail(b.key_path("minima_radius"), "must be >= 1");
    return x;
}

void require(bool present, Command c, const std::string& block) {
    if (!present) fail(block, "required by command " + command_name(c));
}

json axis_json(const AxisRange& a) { return {{"min", a.min}, {"max", a.max}, {"count", a.count}}; }

json system_json(const SystemSpec& sys) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Saddle>) return {{"type", "saddle"}, {"lambda", s.lambda}};
            else if constexpr (std::is_same_v<S, Harmonic>)
                return {{"type", "harmonic"}, {"m", s.m}, {"omega", s.omega}};
            else if constexpr (std::is_same_v<S, ProtonTransfer>)
                return {{"type", "proton_transfer"}, {"m", s.m},           {"barrier", s.barrier},
                        {"y_well", s.y_well},        {"omega", s.omega}, {"coupling", s.coupling}};
            else return {{"type", "duffing"}, {"sigma", s.sigma}};
        },
        sys);
}

}  // namespace

std::string command_name(Command c) {
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return std::string(name);
    return "?";
}

std::optional<Command> parse_command(std::string_view name) {
    for (const auto& [cmd, n] : kCommands)
        if (n == name) return cmd;
    return std::nullopt;
}

std::string library_version() { return LDACTION_VERSION; }

RunConfig parse_config(std::string_view text, std::optional<Command> command_override) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, true, false);
    } catch (const json::parse_error& e) {
        // nlohmann reports "... at line L, column C: ..."
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    Block root(doc, "");
    RunConfig cfg;
    if (command_override) {
        cfg.command = *command_override;
        if (root.has("command")) {
            const std::string name = root.string("command");
            if (parse_command(name) != command_override)
                fail("command", "config is for \"" + name + "\" but command line asks for " +
                                    command_name(*command_override));
        }
    } else {
        const std::string name = root.string("command");
        auto c = parse_command(name);
        if (!c) fail("command", "unknown command \"" + name + "\"");
        cfg.command = *c;
    }
    if (root.has("ldaction_version")) (void)root.string("ldaction_version");
    if (root.has("system")) cfg.system = parse_system(root.child("system"));
    if (root.has("ld")) cfg.ld = parse_ld(root.child("ld"));
    if (root.has("section")) cfg.section = parse_section(root.child("section"));
    if (root.has("poincare")) cfg.poincare = parse_poincare(root.child("poincare"));
    if (root.has("frequency")) cfg.frequency = parse_frequency(root.child("frequency"));
    if (root.has("extract")) cfg.extract = parse_extract(root.child("extract"));
    if (root.has("output")) {
        Block o = root.child("output");
        cfg.output_directory = o.string("directory", cfg.output_directory);
        cfg.format = choose(o.key_path("format"), o.string("format", "csv"), kFormats);
        o.finish();
    }
    cfg.global_seed = root.unsigned_integer("global_seed", 0);
    root.finish();
    finalize_config(cfg);
    return cfg;
}

void finalize_config(RunConfig& cfg) {
    const Command c = cfg.command;
    switch (c) {
        case Command::field:
        case Command::time_average:
        case Command::extract:
        case Command::stochastic_field:
            require(cfg.system.has_value(), c, "system");
            require(cfg.ld.has_value(), c, "ld");
            require(cfg.section.has_value(), c, "section");
            break;
        case Command::poincare:
            require(cfg.system.has_value(), c, "system");
            require(cfg.section.has_value(), c, "section");
            require(cfg.poincare.has_value(), c, "poincare");
            break;
        case Command::frequency:
            require(cfg.system.has_value(), c, "system");
            require(cfg.frequency.has_value(), c, "frequency");
            break;
        case Command::bench: break;
    }
    if (c == Command::extract && !cfg.extract) cfg.extract = ExtractBlock{};

    if (cfg.ld && cfg.system) {
        if (c == Command::stochastic_field) {
            if (!std::holds_alternative<Duffing>(*cfg.system)) fail("system", "stochastic-field needs a duffing system");
            if (!cfg.ld->ensemble) fail("ld.ensemble", "required by command stochastic-field");
        }
        if (cfg.ld->ensemble) {
            if (!std::holds_alternative<Duffing>(*cfg.system)) fail("ld.ensemble", "needs a duffing system");
            // Ensembles always run the Euler-Maruyama kernel.
            cfg.ld->method = Method::euler_maruyama;
            cfg.ld->ensemble->seed = cfg.global_seed;
        }
        if (c == Command::time_average) {
            if (cfg.ld->mode != LDMode::fixed) fail("ld.mode", "time-average needs fixed mode");
            if (!(cfg.ld->tau_f > 0.0)) fail("ld.tau_f", "time-average needs tau_f > 0");
        }
        try {
            cfg.ld->validate(*cfg.system);
        } catch (const std::invalid_argument& e) {
            fail("ld", e.what());
        }
    }
    if (cfg.section && cfg.system) {
        try {
            cfg.section->validate(*cfg.system);
        } catch (const std::invalid_argument& e) {
            fail("section", e.what());
        }
    }
    if (cfg.frequency && cfg.system) {
        if (!std::holds_alternative<Harmonic>(*cfg.system)) fail("system", "frequency needs a harmonic system");
        if (cfg.frequency->initial.dof() != 1) fail("frequency", "q0 and p0 need one component each");
    }
}

RunConfig load_config(const std::filesystem::path& path, std::optional<Command> command_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), command_override);
}

std::string resolved_config_json(const RunConfig& cfg) {
    json j;
    j["ldaction_version"] = library_version();
    j["command"] = command_name(cfg.command);
    j["global_seed"] = cfg.global_seed;
    j["output"] = {{"format", name_of(cfg.format, kFormats)}};
    if (cfg.system) j["system"] = system_json(*cfg.system);
    if (cfg.ld) {
        const LDParams& p = *cfg.ld;
        json ld = {{"tau_f", p.tau_f},
                   {"tau_b", p.tau_b},
                   {"t0", p.t0},
                   {"dt", p.dt},
                   {"mode", name_of(p.mode, kModes)},
                   {"method", name_of(p.method, kMethods)},
                   {"backward_noise", name_of(p.backward_noise, kNoise)}};
        if (p.stop_region) ld["stop_region"] = {{"lo", p.stop_region->lo}, {"hi", p.stop_region->hi}};
        if (p.ensemble)
            ld["ensemble"] = {{"n_realizations", p.ensemble->n_realizations},
                              {"noise", name_of(p.ensemble->sharing, kSharing)}};
        j["ld"] = ld;
    }
    if (cfg.section) {
        const SectionSpec& s = *cfg.section;
        j["section"] = {{"kind", name_of(s.kind, kKinds)},
                        {"axis1", axis_json(s.axis1)},
                        {"axis2", axis_json(s.axis2)},
                        {"fixed_dof", s.fixed_dof},
                        {"fixed_value", s.fixed_value},
                        {"energy", s.energy},
                        {"direction", name_of(s.direction, kDirections)}};
    }
    if (cfg.poincare) {
        const PoincareBlock& p = *cfg.poincare;
        json pj = {{"t_max", p.options.t_max},
                   {"max_crossings", p.options.max_crossings},
                   {"dt", p.options.dt},
                   {"tolerance", p.options.tolerance},
                   {"orbits", p.orbits}};
        if (!p.initial_points.empty()) pj["initial_points"] = p.initial_points;
        j["poincare"] = pj;
    }
    if (cfg.frequency) {
        const FrequencyBlock& f = *cfg.frequency;
        json fj = {{"tau_max", f.tau_max},
                   {"samples", f.samples},
                   {"dt", f.dt},
                   {"q0", f.initial.q},
                   {"p0", f.initial.p}};
        if (f.s_inf) fj["s_inf"] = *f.s_inf;
        j["frequency"] = fj;
    }
    if (cfg.extract)
        j["extract"] = {{"percentile", cfg.extract->percentile},
                        {"measure", name_of(cfg.extract->measure, kMeasures)},
                        {"minima_radius", cfg.extract->minima_radius}};
    return j.dump(2) + "\n";
}

}  // namespace ldaction
