#include "isac/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "isac/error.hpp"
#include "isac/metrics.hpp"

namespace isac {

using nlohmann::json;

std::vector<double> PhiSweep::phis_deg() const {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? phi_start_deg : phi_start_deg + (phi_stop_deg - phi_start_deg) * i / (count - 1);
    return out;
}

namespace {

// Degrees for display; drops the last-bit noise of a radian round trip.
double clean_deg(double rad) { return std::round(rad2deg(rad) * 1e9) / 1e9; }

struct Context {
    std::vector<std::string> defaulted;
    std::vector<std::string> errors;
};

class Reader {
public:
    Reader(const json* src, json* out, std::string path, Context* ctx)
        : src_(src), out_(out), path_(std::move(path)), ctx_(ctx) {
        if (src_ && !src_->is_object()) {
            error("", "must be an object");
            src_ = nullptr;
        }
    }

    double number(const std::string& key, double def, const std::function<bool(double)>& ok = {},
                  const char* rule = "") {
        const json* v = find(key);
        double x = def;
        if (v) {
            if (!v->is_number()) {
                error(key, "must be a number");
            } else {
                x = v->get<double>();
                if (!std::isfinite(x) || (ok && !ok(x))) {
                    error(key, std::string("invalid value, ") + rule);
                    x = def;
                }
            }
        }
        (*out_)[key] = x;
        return x;
    }

    long long integer(const std::string& key, long long def, const std::function<bool(long long)>& ok = {},
                      const char* rule = "") {
        const json* v = find(key);
        long long x = def;
        if (v) {
            if (!v->is_number_integer()) {
                error(key, "must be an integer");
            } else {
                x = v->get<long long>();
                if (ok && !ok(x)) {
                    error(key, std::string("invalid value, ") + rule);
                    x = def;
                }
            }
        }
        (*out_)[key] = x;
        return x;
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        const json* v = find(key);
        std::uint64_t x = def;
        if (v) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
                error(key, "must be a non-negative integer");
            else
                x = v->get<std::uint64_t>();
        }
        (*out_)[key] = x;
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = find(key);
        bool x = def;
        if (v) {
            if (!v->is_boolean())
                error(key, "must be true or false");
            else
                x = v->get<bool>();
        }
        (*out_)[key] = x;
        return x;
    }

    template <class T>
    std::vector<T> list(const std::string& key, const std::vector<T>& def, const std::function<bool(T)>& ok = {},
                        const char* rule = "") {
        const json* v = find(key);
        std::vector<T> x = def;
        if (v) {
            if (!v->is_array() || v->empty()) {
                error(key, "must be a non-empty array");
            } else {
                x.clear();
                for (const auto& e : *v) {
                    const bool type_ok = std::is_integral_v<T> ? e.is_number_integer() : e.is_number();
                    if (!type_ok || (ok && !ok(e.get<T>()))) {
                        error(key, std::string("invalid entry, ") + rule);
                        x = def;
                        break;
                    }
                    x.push_back(e.get<T>());
                }
            }
        }
        (*out_)[key] = x;
        return x;
    }

    Reader object(const std::string& key) {
        const json* v = find(key);
        if (!out_->contains(key))
            (*out_)[key] = json::object();
        return Reader(v, &(*out_)[key], path_ + key + ".", ctx_);
    }

    /// Raw array access for lists of objects; returns nullptr when absent.
    const json* array(const std::string& key) {
        const json* v = find(key, false);
        if (v && !v->is_array()) {
            error(key, "must be an array");
            return nullptr;
        }
        used_.insert(key);
        return v;
    }

    json& out() { return *out_; }
    const std::string& path() const { return path_; }
    Context& ctx() { return *ctx_; }

    void finish() {
        if (!src_)
            return;
        for (auto it = src_->begin(); it != src_->end(); ++it)
            if (!used_.count(it.key()))
                ctx_->errors.push_back(path_ + it.key() + ": unknown key");
    }

    void error(const std::string& key, const std::string& what) { ctx_->errors.push_back(path_ + key + ": " + what); }

private:
    const json* find(const std::string& key, bool mark_default = true) {
        used_.insert(key);
        if (src_ && src_->contains(key))
            return &(*src_)[key];
        if (mark_default)
            ctx_->defaulted.push_back(path_ + key);
        return nullptr;
    }

    const json* src_;
    json* out_;
    std::string path_;
    Context* ctx_;
    std::set<std::string> used_;
};

auto positive = [](double v) { return v > 0.0; };
auto non_negative = [](double v) { return v >= 0.0; };

void read_array(Reader r, ArrayGeometry& g) {
    g.m_x = static_cast<int>(r.integer("m_x", g.m_x, [](long long v) { return v >= 1 && v <= 64; }, "1..64"));
    g.m_z = static_cast<int>(r.integer("m_z", g.m_z, [](long long v) { return v >= 1 && v <= 64; }, "1..64"));
    g.spacing_over_wavelength = r.number("spacing_over_wavelength", g.spacing_over_wavelength, positive, "> 0");
    r.finish();
}

DirectionAngles read_angles(Reader& r, DirectionAngles def) {
    const double theta = r.number("theta_deg", clean_deg(def.theta), [](double v) { return v >= 0 && v <= 180; },
                                  "0..180 degrees");
    const double phi = r.number("phi_deg", clean_deg(def.phi), [](double v) { return v >= 0 && v < 360; },
                                "0..360 degrees");
    return {deg2rad(theta), deg2rad(phi)};
}

UePlacement read_ue(Reader r, const UePlacement& def) {
    UePlacement ue;
    ue.angles = read_angles(r, def.angles);
    ue.range = r.number("range_m", def.range, [](double v) { return v >= 1.0; }, ">= 1 m");
    ue.sinr_threshold = from_db(r.number("sinr_db", to_db(def.sinr_threshold)));
    r.finish();
    return ue;
}

void read_sweep(Reader r, PhiSweep& s) {
    s.theta_deg = r.number("theta_deg", s.theta_deg, [](double v) { return v >= 0 && v <= 180; }, "0..180");
    s.phi_start_deg = r.number("phi_start_deg", s.phi_start_deg);
    s.phi_stop_deg = r.number("phi_stop_deg", s.phi_stop_deg);
    s.count = static_cast<int>(r.integer("count", s.count, [](long long v) { return v >= 1 && v <= 100000; },
                                         "1..100000"));
    r.finish();
}

void read_scenario(Reader r, Scenario& s) {
    s.bs_height = r.number("bs_height_m", s.bs_height, non_negative, ">= 0");
    s.inter_bs_distance = r.number("inter_bs_distance_m", s.inter_bs_distance, positive, "> 0");
    read_array(r.object("tx_array"), s.tx_array);
    read_array(r.object("rx_array"), s.rx_array);
    s.transmit_power = r.number("transmit_power_w", s.transmit_power, positive, "> 0");
    s.ue_noise_power = r.number("ue_noise_power_w", s.ue_noise_power, positive, "> 0");
    s.sensing_noise_power = r.number("sensing_noise_power_w", s.sensing_noise_power, positive, "> 0");
    s.bandwidth = r.number("bandwidth_hz", s.bandwidth, positive, "> 0");
    s.cpi_duration = r.number("cpi_duration_s", s.cpi_duration, positive, "> 0");
    s.beta0 = r.number("beta0", s.beta0, positive, "> 0");
    {
        Reader a = r.object("alpha");
        s.alpha = {a.number("re", s.alpha.real()), a.number("im", s.alpha.imag())};
        a.finish();
    }
    s.rician_factor = r.number("rician_factor", s.rician_factor, non_negative, ">= 0");

    const json* ues = r.array("ues");
    json out_ues = json::array();
    if (ues) {
        std::vector<UePlacement> list;
        for (std::size_t i = 0; i < ues->size(); ++i) {
            json slot = json::object();
            Context& ctx = r.ctx();
            Reader ur(&(*ues)[i], &slot, r.path() + "ues[" + std::to_string(i) + "].", &ctx);
            const UePlacement def = i < s.ues.size() ? s.ues[i] : UePlacement{};
            list.push_back(read_ue(std::move(ur), def));
            out_ues.push_back(slot);
        }
        s.ues = list;
    } else {
        r.ctx().defaulted.push_back(r.path() + "ues");
        for (const auto& ue : s.ues)
            out_ues.push_back({{"theta_deg", clean_deg(ue.angles.theta)},
                               {"phi_deg", clean_deg(ue.angles.phi)},
                               {"range_m", ue.range},
                               {"sinr_db", to_db(ue.sinr_threshold)}});
    }
    r.out()["ues"] = out_ues;

    {
        Reader g = r.object("region");
        s.region.center_x = g.number("center_x_m", s.region.center_x);
        s.region.center_y = g.number("center_y_m", s.region.center_y);
        s.region.extent_x = g.number("extent_x_m", s.region.extent_x, non_negative, ">= 0");
        s.region.extent_y = g.number("extent_y_m", s.region.extent_y, non_negative, ">= 0");
        s.region.height = g.number("height_m", s.region.height);
        g.finish();
    }
    {
        Reader g = r.object("grid");
        s.grid_nx = static_cast<int>(g.integer("n_x", s.grid_nx, [](long long v) { return v >= 1 && v <= 1000; },
                                               "1..1000"));
        s.grid_ny = static_cast<int>(g.integer("n_y", s.grid_ny, [](long long v) { return v >= 1 && v <= 1000; },
                                               "1..1000"));
        g.finish();
    }
    s.seed = r.unsigned_integer("seed", s.seed);
    r.finish();
}

}  // namespace

ExperimentConfig parse_config(const json& doc, bool full, std::optional<std::uint64_t> seed_override) {
    Context ctx;
    ExperimentConfig cfg;
    cfg.scenario = full ? full_scenario() : desk_scenario();
    cfg.resolved = json::object();
    Reader root(&doc, &cfg.resolved, "", &ctx);

    read_scenario(root.object("scenario"), cfg.scenario);
    if (seed_override) {
        cfg.scenario.seed = *seed_override;
        cfg.resolved["scenario"]["seed"] = *seed_override;
        std::erase(ctx.defaulted, std::string("scenario.seed"));
    }

    {
        Reader r = root.object("sca");
        cfg.sca.epsilon = r.number("epsilon", cfg.sca.epsilon, positive, "> 0");
        cfg.sca.max_outer_iterations = static_cast<int>(
            r.integer("max_outer_iterations", cfg.sca.max_outer_iterations, [](long long v) { return v >= 1; }, ">= 1"));
        cfg.sca.extrapolate = r.boolean("extrapolate", cfg.sca.extrapolate);
        r.finish();
    }
    {
        Reader r = root.object("solver");
        cfg.sca.solver.feasibility_tol = r.number("feasibility_tol", cfg.sca.solver.feasibility_tol, positive, "> 0");
        cfg.sca.solver.gap_tol = r.number("gap_tol", cfg.sca.solver.gap_tol, positive, "> 0");
        cfg.sca.solver.max_iterations = static_cast<int>(
            r.integer("max_iterations", cfg.sca.solver.max_iterations, [](long long v) { return v >= 1; }, ">= 1"));
        r.finish();
    }
    {
        Reader r = root.object("single");
        auto& s = cfg.single;
        {
            Reader p = r.object("sensing_point");
            s.sensing_angles = read_angles(p, s.sensing_angles);
            s.sensing_range = p.number("range_m", s.sensing_range, [](double v) { return v >= 1.0; }, ">= 1 m");
            p.finish();
        }
        s.ue = read_ue(r.object("ue"), s.ue);
        s.sinr_db = r.list<double>("sinr_db", s.sinr_db);
        read_sweep(r.object("sweep"), s.sweep);
        s.cross_check_sca = r.boolean("cross_check_sca", s.cross_check_sca);
        r.finish();
    }
    {
        Reader r = root.object("coverage");
        cfg.coverage.sweep.phi_start_deg = 0.0;
        read_sweep(r.object("sweep"), cfg.coverage.sweep);
        r.finish();
    }
    {
        Reader r = root.object("cassini");
        const json* levels = r.array("levels_db");
        if (levels) {
            for (const auto& e : *levels) {
                if (!e.is_number()) {
                    r.error("levels_db", "entries must be numbers");
                    break;
                }
                cfg.cassini.levels_db.push_back(e.get<double>());
            }
        } else {
            ctx.defaulted.push_back("cassini.levels_db");
        }
        r.out()["levels_db"] = cfg.cassini.levels_db;
        r.finish();
    }
    {
        Reader r = root.object("wavesim");
        auto& w = cfg.wavesim;
        w.n_samples = r.list<int>("n_samples", w.n_samples, [](int v) { return v >= 1 && v <= (1 << 22); },
                                  "1..4194304");
        w.trials = static_cast<int>(r.integer("trials", w.trials, [](long long v) { return v >= 1 && v <= 100000; },
                                              "1..100000"));
        {
            Reader p = r.object("point");
            w.point = {p.number("x_m", w.point.x), p.number("y_m", w.point.y), p.number("z_m", w.point.z)};
            p.finish();
        }
        w.noise_seed = r.unsigned_integer("noise_seed", w.noise_seed);
        r.finish();
    }
    {
        Reader r = root.object("oracle");
        auto& o = cfg.oracle;
        const json* pts = r.array("points");
        json out_pts = json::array();
        if (pts) {
            if (pts->empty() || pts->size() > 3)
                r.error("points", "needs 1 to 3 entries");
            o.point_angles.clear();
            o.point_ranges.clear();
            for (std::size_t i = 0; i < pts->size(); ++i) {
                json slot = json::object();
                Reader pr(&(*pts)[i], &slot, r.path() + "points[" + std::to_string(i) + "].", &ctx);
                o.point_angles.push_back(read_angles(pr, {deg2rad(90.0), deg2rad(90.0)}));
                o.point_ranges.push_back(pr.number("range_m", 50.0, [](double v) { return v >= 1.0; }, ">= 1 m"));
                pr.finish();
                out_pts.push_back(slot);
            }
        } else {
            ctx.defaulted.push_back("oracle.points");
            for (std::size_t i = 0; i < o.point_angles.size(); ++i)
                out_pts.push_back({{"theta_deg", clean_deg(o.point_angles[i].theta)},
                                   {"phi_deg", clean_deg(o.point_angles[i].phi)},
                                   {"range_m", o.point_ranges[i]}});
        }
        r.out()["points"] = out_pts;
        o.sinr_db = r.number("sinr_db", o.sinr_db);
        o.step_fraction = r.number("step_fraction", o.step_fraction, [](double v) { return v >= 1e-3 && v <= 0.5; },
                                   "0.001..0.5");
        r.finish();
    }
    root.finish();

    // Cross-field invariants.
    try {
        cfg.scenario.validate();
    } catch (const ValidationError& e) {
        ctx.errors.push_back(e.what());
    }
    if (cfg.scenario.region.extent_x == 0.0 && cfg.scenario.grid_nx > 1)
        ctx.errors.push_back("scenario.grid.n_x: zero-extent axis cannot hold more than one point");
    if (cfg.scenario.region.extent_y == 0.0 && cfg.scenario.grid_ny > 1)
        ctx.errors.push_back("scenario.grid.n_y: zero-extent axis cannot hold more than one point");

    if (!ctx.errors.empty()) {
        std::ostringstream os;
        os << "invalid configuration (" << ctx.errors.size() << " problem" << (ctx.errors.size() > 1 ? "s" : "")
           << "):";
        for (const auto& e : ctx.errors)
            os << "\n  - " << e;
        throw ValidationError(os.str());
    }
    cfg.defaulted = std::move(ctx.defaulted);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path, bool full, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, full, seed_override);
}

json default_config_document(bool full) {
    return parse_config(json::object(), full, std::nullopt).resolved;
}

}  // namespace isac
