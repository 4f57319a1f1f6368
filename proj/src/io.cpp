#include "mstatic/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mstatic {

namespace {

using nlohmann::json;

// Shortest round-trip representation, independent of the global locale.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& path) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error(path + ": malformed number '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    return in;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

void export_map(const LikelihoodMap& map, const std::string& path, const FileMeta& meta,
                MapScale scale) {
    if (map.values.size() != static_cast<std::size_t>(map.grid.size())) {
        throw std::invalid_argument("export_map: values do not match grid");
    }
    double peak = 0.0;
    if (scale == MapScale::db) {
        for (const double v : map.values) {
            if (std::isfinite(v)) peak = std::max(peak, v);
        }
    }

    std::ofstream out = open_out(path);
    out << "# scenario_digest=" << meta.scenario_digest << "\n";
    out << "# seed=" << meta.seed << "\n";
    out << "# method=" << method_name(map.method) << "\n";
    out << "# pair=" << (map.pair_id < 0 ? std::string("combined") : std::to_string(map.pair_id))
        << "\n";
    out << "# scale=" << (scale == MapScale::db ? "db" : "linear") << "\n";
    out << "x,y,value\n";
    for (int iy = 0; iy < map.grid.ny(); ++iy) {
        for (int ix = 0; ix < map.grid.nx(); ++ix) {
            const Position2D pt = map.grid.point(ix, iy);
            const double v = map.values[static_cast<std::size_t>(map.grid.index(ix, iy))];
            out << fmt(pt.x) << ',' << fmt(pt.y) << ',';
            if (std::isfinite(v) && (scale == MapScale::linear || (v > 0.0 && peak > 0.0))) {
                out << fmt(scale == MapScale::linear ? v : 10.0 * std::log10(v / peak));
            }
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("export_map: write failed for '" + path + "'");
}

ImportedMap import_map(const std::string& path) {
    std::ifstream in = open_in(path);
    ImportedMap result;
    std::string line;
    bool saw_header = false;
    std::vector<double> xs, ys, values;
    std::vector<bool> empty_value;

    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            const std::string value = line.substr(eq + 1);
            key.erase(0, key.find_first_not_of(' '));
            if (key == "scenario_digest") result.meta.scenario_digest = value;
            if (key == "seed") result.meta.seed = std::stoull(value);
            if (key == "method") result.map.method = method_from_name(value);
            if (key == "pair") result.map.pair_id = value == "combined" ? -1 : std::stoi(value);
            if (key == "scale") result.scale = value == "db" ? MapScale::db : MapScale::linear;
            continue;
        }
        if (!saw_header) {
            if (line != "x,y,value") throw std::runtime_error(path + ": missing x,y,value header");
            saw_header = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 3) throw std::runtime_error(path + ": expected 3 fields per row");
        xs.push_back(parse_double(fields[0], path));
        ys.push_back(parse_double(fields[1], path));
        if (fields[2].empty()) {
            values.push_back(kOutOfField);
            empty_value.push_back(true);
        } else {
            values.push_back(parse_double(fields[2], path));
            empty_value.push_back(false);
        }
    }
    if (!saw_header || xs.empty()) throw std::runtime_error(path + ": no map data");

    std::size_t nx = 1;
    while (nx < ys.size() && ys[nx] == ys[0]) ++nx;
    if (xs.size() % nx != 0) throw std::runtime_error(path + ": ragged lattice");
    const std::size_t ny = xs.size() / nx;

    SearchGrid grid;
    grid.x_min = xs[0];
    grid.y_min = ys[0];
    grid.x_max = xs[nx - 1];
    grid.y_max = ys[(ny - 1) * nx];
    grid.step = nx > 1 ? xs[1] - xs[0] : (ny > 1 ? ys[nx] - ys[0] : 1.0);
    grid.validate();
    if (static_cast<std::size_t>(grid.size()) != xs.size()) {
        throw std::runtime_error(path + ": lattice does not form a regular grid");
    }
    result.map.grid = grid;
    result.map.values = std::move(values);
    return result;
}

void export_covariance(const CovarianceSet& cov, const std::string& path, const FileMeta& meta) {
    const Eigen::Index dim = cov.R.rows();
    if (dim != cov.R.cols()) throw std::invalid_argument("export_covariance: matrix not square");
    std::ofstream out = open_out(path);
    out << "# scenario_digest=" << meta.scenario_digest << "\n";
    out << "# seed=" << meta.seed << "\n";
    out << cov.pair_id << ',' << cov.subcarriers << ',' << fmt(cov.noise_variance) << ',' << dim
        << "\n";
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            out << fmt(cov.R(i, j).real()) << ',' << fmt(cov.R(i, j).imag()) << "\n";
        }
    }
    if (!out) throw std::runtime_error("export_covariance: write failed for '" + path + "'");
}

CovarianceSet import_covariance(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    bool saw_header = false;
    CovarianceSet cov;
    Eigen::Index dim = 0;
    Eigen::Index entry = 0;

    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, ',');
        if (!saw_header) {
            if (fields.size() != 4) throw std::runtime_error(path + ": malformed header line");
            cov.pair_id = static_cast<int>(parse_double(fields[0], path));
            cov.subcarriers = static_cast<int>(parse_double(fields[1], path));
            cov.noise_variance = parse_double(fields[2], path);
            dim = static_cast<Eigen::Index>(parse_double(fields[3], path));
            if (dim < 1 || cov.subcarriers < 1 || !(cov.noise_variance > 0.0)) {
                throw std::runtime_error(path + ": invalid header values");
            }
            cov.R.resize(dim, dim);
            saw_header = true;
            continue;
        }
        if (fields.size() != 2) throw std::runtime_error(path + ": expected re,im per line");
        if (entry >= dim * dim) throw std::runtime_error(path + ": too many entries");
        cov.R(entry / dim, entry % dim) = {parse_double(fields[0], path),
                                           parse_double(fields[1], path)};
        ++entry;
    }
    if (!saw_header || entry != dim * dim) {
        throw std::runtime_error(path + ": truncated covariance payload");
    }

    const double magnitude = std::max(1.0, cov.R.cwiseAbs().maxCoeff());
    const double asymmetry = (cov.R - cov.R.adjoint().eval()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-9 * magnitude) {
        throw std::runtime_error(path + ": payload is not Hermitian");
    }
    return cov;
}

json report_to_json(const ExperimentReport& report) {
    json methods = json::object();
    bool has_soft = false;
    for (const auto& [method, summary] : report.methods) {
        methods[method_name(method)] = {
            {"rmse_m", summary.rmse_m},
            {"ci95_m", summary.ci95_m},
            {"trials", summary.trials},
        };
        has_soft = has_soft || method == FusionMethod::soft;
    }
    json pairs = json::array();
    for (std::size_t p = 0; p < report.pair_mean_diagonality.size(); ++p) {
        json entry = {{"index", p}, {"mean_diagonality", report.pair_mean_diagonality[p]}};
        if (p < report.subcarriers.size()) entry["subcarriers"] = report.subcarriers[p];
        pairs.push_back(entry);
    }
    json j{
        {"scenario_digest", report.scenario_digest},
        {"seed", report.seed},
        {"trials", report.trials},
        {"methods", methods},
        {"pairs", pairs},
        {"mean_diagonality", report.mean_diagonality},
        {"mean_diagonality_ci95", report.diagonality_ci95},
    };
    if (has_soft) j["soft_fusion_association"] = "ground-truth";
    return j;
}

void write_report(const ExperimentReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << report_to_json(report).dump(2) << "\n";
    if (!out) throw std::runtime_error("write_report: write failed for '" + path + "'");
}

void write_sweep_reports(std::span<const ExperimentReport> reports, const FileMeta& meta,
                         const std::string& path) {
    json runs = json::array();
    for (const ExperimentReport& r : reports) runs.push_back(report_to_json(r));
    const json j{
        {"scenario_digest", meta.scenario_digest},
        {"seed", meta.seed},
        {"runs", runs},
    };
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write_sweep_reports: write failed for '" + path + "'");
}

namespace {

json positions_to_json(std::span<const Position2D> positions) {
    json out = json::array();
    for (const Position2D& p : positions) out.push_back(json::array({p.x, p.y}));
    return out;
}

std::vector<Position2D> positions_from_json(const json& j) {
    std::vector<Position2D> out;
    for (const json& entry : j) out.push_back({entry[0].get<double>(), entry[1].get<double>()});
    return out;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace

void write_trial_log(std::span<const TrialResult> results, const std::string& path,
                     const FileMeta& meta) {
    std::ofstream out = open_out(path);
    const json header{
        {"type", "trial_log"},
        {"scenario_digest", meta.scenario_digest},
        {"seed", meta.seed},
    };
    out << header.dump() << "\n";
    for (const TrialResult& r : results) {
        const json line{
            {"trial", r.trial},
            {"method", method_name(r.method)},
            {"truth", positions_to_json(r.truth)},
            {"estimates", positions_to_json(r.estimates)},
            {"squared_errors", r.squared_errors},
            {"pair_diagonality", r.pair_diagonality},
            {"channel_digest", hex64(r.channel_digest)},
        };
        out << line.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write_trial_log: write failed for '" + path + "'");
}

std::vector<TrialResult> read_trial_log(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<TrialResult> results;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (first) {
            first = false;
            if (j.value("type", "") == "trial_log") continue;  // header record
        }
        TrialResult r;
        r.trial = j.at("trial").get<int>();
        r.method = method_from_name(j.at("method").get<std::string>());
        r.truth = positions_from_json(j.at("truth"));
        r.estimates = positions_from_json(j.at("estimates"));
        r.squared_errors = j.at("squared_errors").get<std::vector<double>>();
        r.pair_diagonality = j.at("pair_diagonality").get<std::vector<double>>();
        r.channel_digest = std::stoull(j.at("channel_digest").get<std::string>(), nullptr, 16);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace mstatic
