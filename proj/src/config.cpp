#include "mstatic/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mstatic/digest.hpp"

namespace mstatic {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::runtime_error("scenario config: " + path +
                             (message.empty() ? "" : ": " + message));
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_known_keys(const json& obj, const std::string& path,
                      std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) fail(join(path, it.key()), "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double read_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int read_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t read_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) fail(path, "expected an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(path, "must be >= 0");
    return v.get<std::uint64_t>();
}

Vec2 read_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(path, "expected [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

ArraySpec read_array_spec(const json& v, const std::string& path, const ArraySpec& defaults) {
    if (!v.is_object()) fail(path, "expected an object");
    check_known_keys(v, path, {"origin", "normal", "elements"});
    ArraySpec spec = defaults;
    if (const json* f = find(v, "origin")) spec.origin = read_vec2(*f, join(path, "origin"));
    if (const json* f = find(v, "normal")) spec.normal = read_vec2(*f, join(path, "normal"));
    if (const json* f = find(v, "elements")) spec.elements = read_int(*f, join(path, "elements"));
    return spec;
}

RadarPairConfig read_pair(const json& v, const std::string& path, int index) {
    if (!v.is_object()) fail(path, "expected an object");
    check_known_keys(v, path,
                     {"pair_id", "tx", "rx", "subcarriers", "subcarrier_spacing_hz",
                      "carrier_freq_hz", "noise_variance"});
    RadarPairConfig pair;
    pair.pair_id = index;
    pair.tx = ArraySpec{{-5.0, 0.0}, {0.0, 1.0}, 4};
    pair.rx = ArraySpec{{0.0, 0.0}, {0.0, 1.0}, 4};
    pair.subcarriers = 512;
    pair.subcarrier_spacing_hz = 312500.0;
    pair.carrier_freq_hz = 5.89e9;
    pair.noise_variance = 3.0;
    if (const json* f = find(v, "pair_id")) pair.pair_id = read_int(*f, join(path, "pair_id"));
    if (const json* f = find(v, "tx")) pair.tx = read_array_spec(*f, join(path, "tx"), pair.tx);
    if (const json* f = find(v, "rx")) pair.rx = read_array_spec(*f, join(path, "rx"), pair.rx);
    if (const json* f = find(v, "subcarriers")) pair.subcarriers = read_int(*f, join(path, "subcarriers"));
    if (const json* f = find(v, "subcarrier_spacing_hz")) {
        pair.subcarrier_spacing_hz = read_double(*f, join(path, "subcarrier_spacing_hz"));
    }
    if (const json* f = find(v, "carrier_freq_hz")) {
        pair.carrier_freq_hz = read_double(*f, join(path, "carrier_freq_hz"));
    }
    if (const json* f = find(v, "noise_variance")) {
        pair.noise_variance = read_double(*f, join(path, "noise_variance"));
    }
    return pair;
}

Rect read_rect(const json& v, const std::string& path, Rect defaults) {
    if (!v.is_object()) fail(path, "expected an object");
    check_known_keys(v, path, {"x_min", "x_max", "y_min", "y_max"});
    Rect r = defaults;
    if (const json* f = find(v, "x_min")) r.x_min = read_double(*f, join(path, "x_min"));
    if (const json* f = find(v, "x_max")) r.x_max = read_double(*f, join(path, "x_max"));
    if (const json* f = find(v, "y_min")) r.y_min = read_double(*f, join(path, "y_min"));
    if (const json* f = find(v, "y_max")) r.y_max = read_double(*f, join(path, "y_max"));
    return r;
}

json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    RadarPairConfig p0;
    p0.pair_id = 0;
    p0.tx = ArraySpec{{-5.0, 0.0}, {0.0, 1.0}, 4};
    p0.rx = ArraySpec{{0.0, 0.0}, {0.0, 1.0}, 4};
    p0.subcarriers = 512;
    p0.subcarrier_spacing_hz = 312500.0;
    p0.carrier_freq_hz = 5.89e9;
    p0.noise_variance = 3.0;
    RadarPairConfig p1 = p0;  // monostatic: STx2 collocated with the shared SRx
    p1.pair_id = 1;
    p1.tx.origin = {0.0, 0.0};
    cfg.pairs = {p0, p1};
    return cfg;
}

void ScenarioConfig::validate() const {
    if (pairs.empty()) fail("pairs", "need at least one radar pair");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string path = "pairs[" + std::to_string(i) + "]";
        try {
            pairs[i].validate();
        } catch (const std::invalid_argument& e) {
            fail(path + "." + e.what(), "");
        }
        if (num_targets >= pairs[i].joint_dim()) {
            fail(path, "num_targets must be < tx.elements * rx.elements");
        }
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if (pairs[j].pair_id == pairs[i].pair_id) fail("pairs", "duplicate pair_id");
        }
    }
    if (num_targets < 1) fail("targets.count", "must be >= 1");
    if (!(target_region.x_max >= target_region.x_min) ||
        !(target_region.y_max >= target_region.y_min)) {
        fail("targets.region", "max bounds must be >= min bounds");
    }
    if (min_target_separation_m < 0.0) fail("targets.min_separation_m", "must be >= 0");
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what(), "");
    }
    if (!(angle_grid_step_deg > 0.0)) fail("angle_grid_step_deg", "must be > 0");
    if (angle_exclusion_cells < 0) fail("angle_exclusion_cells", "must be >= 0");
    if (peak_exclusion_radius_m < 0.0) fail("peak_exclusion_radius_m", "must be >= 0");
    if (methods.empty()) fail("methods", "need at least one method");
    if (trials < 1) fail("trials", "must be >= 1");
    if (oracle_budget < 1) fail("oracle_budget", "must be >= 1");
}

std::string ScenarioConfig::digest() const {
    json j = scenario_to_json(*this);
    j.erase("seed");
    j.erase("trials");
    return fnv1a64_hex(j.dump());
}

ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario config: " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

ScenarioConfig scenario_from_json(const json& j) {
    if (!j.is_object()) fail("", "top level must be an object");
    check_known_keys(j, "",
                     {"seed", "trials", "targets", "grid", "angle_grid_step_deg",
                      "angle_exclusion_cells", "peak_exclusion_radius_m", "amplitude_model",
                      "methods", "oracle_budget", "pairs"});

    ScenarioConfig cfg = default_scenario();
    if (const json* f = find(j, "seed")) cfg.seed = read_u64(*f, "seed");
    if (const json* f = find(j, "trials")) cfg.trials = read_int(*f, "trials");
    if (const json* f = find(j, "targets")) {
        if (!f->is_object()) fail("targets", "expected an object");
        check_known_keys(*f, "targets", {"count", "region", "min_separation_m"});
        if (const json* g = find(*f, "count")) cfg.num_targets = read_int(*g, "targets.count");
        if (const json* g = find(*f, "region")) {
            cfg.target_region = read_rect(*g, "targets.region", cfg.target_region);
        }
        if (const json* g = find(*f, "min_separation_m")) {
            cfg.min_target_separation_m = read_double(*g, "targets.min_separation_m");
        }
    }
    if (const json* f = find(j, "grid")) {
        if (!f->is_object()) fail("grid", "expected an object");
        check_known_keys(*f, "grid", {"x_min", "x_max", "y_min", "y_max", "step"});
        if (const json* g = find(*f, "x_min")) cfg.grid.x_min = read_double(*g, "grid.x_min");
        if (const json* g = find(*f, "x_max")) cfg.grid.x_max = read_double(*g, "grid.x_max");
        if (const json* g = find(*f, "y_min")) cfg.grid.y_min = read_double(*g, "grid.y_min");
        if (const json* g = find(*f, "y_max")) cfg.grid.y_max = read_double(*g, "grid.y_max");
        if (const json* g = find(*f, "step")) cfg.grid.step = read_double(*g, "grid.step");
    }
    if (const json* f = find(j, "angle_grid_step_deg")) {
        cfg.angle_grid_step_deg = read_double(*f, "angle_grid_step_deg");
    }
    if (const json* f = find(j, "angle_exclusion_cells")) {
        cfg.angle_exclusion_cells = read_int(*f, "angle_exclusion_cells");
    }
    if (const json* f = find(j, "peak_exclusion_radius_m")) {
        cfg.peak_exclusion_radius_m = read_double(*f, "peak_exclusion_radius_m");
    }
    if (const json* f = find(j, "amplitude_model")) {
        if (!f->is_string()) fail("amplitude_model", "expected a string");
        try {
            cfg.amplitude_model = amplitude_model_from_name(f->get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail(e.what(), "");
        }
    }
    if (const json* f = find(j, "methods")) {
        if (!f->is_array() || f->empty()) fail("methods", "expected a non-empty array");
        cfg.methods.clear();
        for (const json& entry : *f) {
            if (!entry.is_string()) fail("methods", "expected strings");
            try {
                cfg.methods.push_back(method_from_name(entry.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                fail(e.what(), "");
            }
        }
    }
    if (const json* f = find(j, "oracle_budget")) cfg.oracle_budget = read_u64(*f, "oracle_budget");
    if (const json* f = find(j, "pairs")) {
        if (!f->is_array() || f->empty()) fail("pairs", "expected a non-empty array");
        cfg.pairs.clear();
        for (std::size_t i = 0; i < f->size(); ++i) {
            cfg.pairs.push_back(
                read_pair((*f)[i], "pairs[" + std::to_string(i) + "]", static_cast<int>(i)));
        }
    }

    cfg.validate();
    return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    json pairs = json::array();
    for (const RadarPairConfig& p : cfg.pairs) {
        pairs.push_back({
            {"pair_id", p.pair_id},
            {"tx",
             {{"origin", vec2_to_json(p.tx.origin)},
              {"normal", vec2_to_json(p.tx.normal)},
              {"elements", p.tx.elements}}},
            {"rx",
             {{"origin", vec2_to_json(p.rx.origin)},
              {"normal", vec2_to_json(p.rx.normal)},
              {"elements", p.rx.elements}}},
            {"subcarriers", p.subcarriers},
            {"subcarrier_spacing_hz", p.subcarrier_spacing_hz},
            {"carrier_freq_hz", p.carrier_freq_hz},
            {"noise_variance", p.noise_variance},
        });
    }
    json methods = json::array();
    for (FusionMethod m : cfg.methods) methods.push_back(method_name(m));
    return json{
        {"seed", cfg.seed},
        {"trials", cfg.trials},
        {"targets",
         {{"count", cfg.num_targets},
          {"region",
           {{"x_min", cfg.target_region.x_min},
            {"x_max", cfg.target_region.x_max},
            {"y_min", cfg.target_region.y_min},
            {"y_max", cfg.target_region.y_max}}},
          {"min_separation_m", cfg.min_target_separation_m}}},
        {"grid",
         {{"x_min", cfg.grid.x_min},
          {"x_max", cfg.grid.x_max},
          {"y_min", cfg.grid.y_min},
          {"y_max", cfg.grid.y_max},
          {"step", cfg.grid.step}}},
        {"angle_grid_step_deg", cfg.angle_grid_step_deg},
        {"angle_exclusion_cells", cfg.angle_exclusion_cells},
        {"peak_exclusion_radius_m", cfg.peak_exclusion_radius_m},
        {"amplitude_model", amplitude_model_name(cfg.amplitude_model)},
        {"methods", methods},
        {"oracle_budget", cfg.oracle_budget},
        {"pairs", pairs},
    };
}

}  // namespace mstatic
