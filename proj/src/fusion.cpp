#include "mstatic/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mstatic/assignment.hpp"

namespace mstatic {

std::string method_name(FusionMethod method) {
    switch (method) {
        case FusionMethod::proposed: return "proposed";
        case FusionMethod::method_a: return "method_a";
        case FusionMethod::method_b: return "method_b";
        case FusionMethod::fft2d: return "fft2d";
        case FusionMethod::soft: return "soft";
    }
    throw std::invalid_argument("unknown fusion method");
}

FusionMethod method_from_name(const std::string& name) {
    if (name == "proposed") return FusionMethod::proposed;
    if (name == "method_a") return FusionMethod::method_a;
    if (name == "method_b") return FusionMethod::method_b;
    if (name == "fft2d") return FusionMethod::fft2d;
    if (name == "soft") return FusionMethod::soft;
    throw std::invalid_argument("methods: unknown value '" + name + "'");
}

void SearchGrid::validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("grid.step: must be > 0");
    if (!(x_max >= x_min) || !(y_max >= y_min)) {
        throw std::invalid_argument("grid: max bounds must be >= min bounds");
    }
}

namespace {

struct Cell {
    int i = 0;  // row
    int j = 0;  // column
    double value = 0.0;
};

// Strictly-greater-than-all-8-neighbors local maxima of a finite-valued
// lattice; `value(i, j)` may return -inf for excluded cells.
template <typename F>
std::vector<Cell> strict_local_maxima(int n_rows, int n_cols, F&& value) {
    std::vector<Cell> out;
    for (int i = 0; i < n_rows; ++i) {
        for (int j = 0; j < n_cols; ++j) {
            const double v = value(i, j);
            if (!std::isfinite(v)) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di) {
                for (int dj = -1; dj <= 1 && is_max; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ni = i + di;
                    const int nj = j + dj;
                    if (ni < 0 || nj < 0 || ni >= n_rows || nj >= n_cols) continue;
                    if (!(v > value(ni, nj))) is_max = false;
                }
            }
            if (is_max) out.push_back({i, j, v});
        }
    }
    return out;
}

void sort_descending(std::vector<Cell>& cells, int n_cols) {
    std::sort(cells.begin(), cells.end(), [n_cols](const Cell& a, const Cell& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.i * n_cols + a.j < b.i * n_cols + b.j;  // row-major tie-break
    });
}

// Greedy pick with a conflict predicate; fills the remainder from `all`
// (already sorted) without the conflict constraint when maxima run out.
template <typename Conflict>
std::pair<std::vector<Cell>, bool> pick_peaks(const std::vector<Cell>& maxima,
                                              const std::vector<Cell>& all, int want,
                                              Conflict&& conflict) {
    std::vector<Cell> picked;
    picked.reserve(static_cast<std::size_t>(want));
    for (const Cell& c : maxima) {
        if (static_cast<int>(picked.size()) == want) break;
        bool blocked = false;
        for (const Cell& p : picked) {
            if (conflict(p, c)) {
                blocked = true;
                break;
            }
        }
        if (!blocked) picked.push_back(c);
    }
    bool fallback = false;
    if (static_cast<int>(picked.size()) < want) {
        fallback = true;
        for (const Cell& c : all) {
            if (static_cast<int>(picked.size()) == want) break;
            const bool taken = std::any_of(picked.begin(), picked.end(), [&](const Cell& p) {
                return p.i == c.i && p.j == c.j;
            });
            if (!taken) picked.push_back(c);
        }
    }
    return {std::move(picked), fallback};
}

}  // namespace

AngleEstimate preestimate_angles(const SubspaceDecomposition& dec, const RadarPairConfig& pair,
                                 int num_targets, double angle_step_rad, int exclusion_cells) {
    if (!(angle_step_rad > 0.0)) throw std::invalid_argument("angle step must be > 0");
    if (num_targets < 1 || num_targets >= pair.joint_dim()) {
        throw std::invalid_argument("preestimate_angles: need 1 <= K < M*N");
    }
    const int m_tx = pair.tx.elements;
    const int n_rx = pair.rx.elements;
    if (dec.signal_basis.rows() != pair.joint_dim()) {
        throw std::invalid_argument("preestimate_angles: decomposition does not match pair");
    }

    // Symmetric lattice i*step, |i| <= n_side-1; stays inside (-pi/2, pi/2)
    // and always contains boresight.
    const int n_side = static_cast<int>(std::ceil(kPi / 2.0 / angle_step_rad - 1e-9));
    const int n = 2 * n_side - 1;
    const auto lattice_angle = [&](int i) { return (i - (n_side - 1)) * angle_step_rad; };

    Eigen::MatrixXcd v_tx(m_tx, n), v_rx(n_rx, n);
    for (int i = 0; i < n; ++i) {
        v_tx.col(i) = steering_vector(lattice_angle(i), m_tx);
        v_rx.col(i) = steering_vector(lattice_angle(i), n_rx);
    }

    // a^H Gamma a = sum_k |u_k^H (v_tx kron v_rx)|^2 with
    // u_k^H a = v_tx^T conj(reshape(u_k, M, N)) v_rx, so the whole lattice is
    // two small matrix products per signal eigenvector.
    Eigen::MatrixXd music = Eigen::MatrixXd::Zero(n, n);  // (aod index, aoa index)
    for (int k = 0; k < dec.signal_basis.cols(); ++k) {
        Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            u_mat(dec.signal_basis.col(k).data(), m_tx, n_rx);
        const Eigen::MatrixXcd t = v_tx.transpose() * u_mat.conjugate();
        music += (t * v_rx).cwiseAbs2();
    }

    std::vector<Cell> maxima =
        strict_local_maxima(n, n, [&](int i, int j) { return music(i, j); });
    sort_descending(maxima, n);
    std::vector<Cell> all;
    all.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) all.push_back({i, j, music(i, j)});
    }
    sort_descending(all, n);

    auto [picked, fallback] =
        pick_peaks(maxima, all, num_targets, [exclusion_cells](const Cell& a, const Cell& b) {
            return std::abs(a.i - b.i) <= exclusion_cells && std::abs(a.j - b.j) <= exclusion_cells;
        });

    AngleEstimate est;
    est.pair_id = pair.pair_id;
    est.used_fallback = fallback;
    for (const Cell& c : picked) {
        est.angles.push_back({lattice_angle(c.i), lattice_angle(c.j)});
        est.peak_values.push_back(c.value);
    }
    return est;
}

double fusion_weight(const AngleEstimate& est, const CovarianceSet& cov,
                     const RadarPairConfig& pair) {
    const Eigen::MatrixXcd a_hat = steering_matrix(est.angles, pair);
    Eigen::MatrixXcd coeff_cov;
    try {
        coeff_cov = coefficient_covariance(a_hat, cov);
    } catch (const std::runtime_error&) {
        coeff_cov = regularized_coefficient_covariance(a_hat, cov);
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < coeff_cov.rows(); ++k) {
        total += std::max(0.0, coeff_cov(k, k).real());
    }
    return total;
}

PairGridFields evaluate_pair_fields(const SubspaceDecomposition& dec, const CovarianceSet& cov,
                                    const RadarPairConfig& pair, const SearchGrid& grid) {
    grid.validate();
    const int dim = pair.joint_dim();
    if (cov.R.rows() != dim || dec.signal_basis.rows() != dim) {
        throw std::invalid_argument("evaluate_pair_fields: dimension mismatch");
    }
    const int n = grid.size();
    PairGridFields fields;
    fields.music.assign(static_cast<std::size_t>(n), 0.0);
    fields.bartlett.assign(static_cast<std::size_t>(n), 0.0);
    fields.in_field.assign(static_cast<std::size_t>(n), 0);

    std::vector<int> live;
    std::vector<AnglePair> live_angles;
    live.reserve(static_cast<std::size_t>(n));
    live_angles.reserve(static_cast<std::size_t>(n));
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const int idx = grid.index(ix, iy);
            if (auto ang = try_angles_for_target(pair, grid.point(ix, iy))) {
                fields.in_field[static_cast<std::size_t>(idx)] = 1;
                live.push_back(idx);
                live_angles.push_back(*ang);
            }
        }
    }
    if (live.empty()) return fields;

    const int m = static_cast<int>(live.size());
    Eigen::MatrixXcd bank(dim, m);
    const int m_tx = pair.tx.elements;
    const int n_rx = pair.rx.elements;
    for (int c = 0; c < m; ++c) {
        const double st = std::sin(live_angles[static_cast<std::size_t>(c)].aod);
        const double sr = std::sin(live_angles[static_cast<std::size_t>(c)].aoa);
        for (int mm = 0; mm < m_tx; ++mm) {
            const std::complex<double> vt = std::polar(1.0, kPi * mm * st);
            for (int nn = 0; nn < n_rx; ++nn) {
                bank(mm * n_rx + nn, c) = vt * std::polar(1.0, kPi * nn * sr);
            }
        }
    }

    const Eigen::MatrixXcd proj = dec.signal_basis.adjoint() * bank;  // K x m
    const Eigen::RowVectorXd music_vals = proj.colwise().squaredNorm();
    const Eigen::MatrixXcd r_bank = cov.R * bank;
    const Eigen::RowVectorXd bartlett_vals =
        bank.conjugate().cwiseProduct(r_bank).colwise().sum().real();

    for (int c = 0; c < m; ++c) {
        const auto idx = static_cast<std::size_t>(live[static_cast<std::size_t>(c)]);
        fields.music[idx] = std::max(0.0, music_vals(c));
        fields.bartlett[idx] = std::max(0.0, bartlett_vals(c));
    }
    return fields;
}

LikelihoodMap pair_map_from_fields(const PairGridFields& fields, const SearchGrid& grid,
                                   const RadarPairConfig& pair, FusionMethod method,
                                   double signal_power_weight) {
    const auto n = static_cast<std::size_t>(grid.size());
    if (fields.music.size() != n || fields.bartlett.size() != n || fields.in_field.size() != n) {
        throw std::invalid_argument("pair_map_from_fields: fields do not match grid");
    }
    LikelihoodMap map;
    map.grid = grid;
    map.method = method;
    map.pair_id = pair.pair_id;
    map.values.assign(n, kOutOfField);
    const double w = pair.subcarriers / (2.0 * pair.noise_variance);
    for (std::size_t i = 0; i < n; ++i) {
        if (!fields.in_field[i]) continue;
        switch (method) {
            case FusionMethod::proposed:
                map.values[i] = w * fields.music[i] * signal_power_weight;
                break;
            case FusionMethod::method_a:
                map.values[i] = w * fields.music[i];
                break;
            case FusionMethod::method_b:
                map.values[i] = w * fields.music[i] * fields.bartlett[i];
                break;
            case FusionMethod::fft2d:
                map.values[i] = w * fields.bartlett[i];
                break;
            case FusionMethod::soft:
                throw std::invalid_argument("soft fusion has no likelihood map");
        }
    }
    return map;
}

LikelihoodMap pair_likelihood_map(const SubspaceDecomposition& dec, const AngleEstimate& est,
                                  const CovarianceSet& cov, const RadarPairConfig& pair,
                                  const SearchGrid& grid, FusionMethod method) {
    const PairGridFields fields = evaluate_pair_fields(dec, cov, pair, grid);
    const double sbar =
        method == FusionMethod::proposed ? fusion_weight(est, cov, pair) : 1.0;
    return pair_map_from_fields(fields, grid, pair, method, sbar);
}

LikelihoodMap combine_maps(std::span<const LikelihoodMap> maps) {
    if (maps.empty()) throw std::invalid_argument("combine_maps: no maps");
    LikelihoodMap out;
    out.grid = maps.front().grid;
    out.method = maps.front().method;
    out.pair_id = -1;
    out.values.assign(maps.front().values.size(), 0.0);
    for (const LikelihoodMap& map : maps) {
        if (!(map.grid == out.grid) || map.values.size() != out.values.size()) {
            throw std::invalid_argument("combine_maps: grid mismatch");
        }
        if (map.method != out.method) {
            throw std::invalid_argument("combine_maps: method mismatch");
        }
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            if (map.values[i] == kOutOfField) {
                out.values[i] = kOutOfField;
            } else if (out.values[i] != kOutOfField) {
                out.values[i] += map.values[i];
            }
        }
    }
    return out;
}

std::vector<PeakPick> select_peak_cells(const LikelihoodMap& map, int num_peaks,
                                        double exclusion_radius_m) {
    const SearchGrid& grid = map.grid;
    if (map.values.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("select_peaks: values do not match grid");
    }
    const int nx = grid.nx();
    const int ny = grid.ny();
    const auto value = [&](int iy, int ix) {
        return map.values[static_cast<std::size_t>(grid.index(ix, iy))];
    };
    std::vector<Cell> all;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double v = value(iy, ix);
            if (std::isfinite(v)) all.push_back({iy, ix, v});
        }
    }
    if (static_cast<int>(all.size()) < num_peaks) {
        throw std::invalid_argument("select_peaks: fewer in-field grid points than peaks");
    }
    std::vector<Cell> maxima = strict_local_maxima(ny, nx, value);
    sort_descending(maxima, nx);
    sort_descending(all, nx);

    auto [picked, fallback] =
        pick_peaks(maxima, all, num_peaks, [&](const Cell& a, const Cell& b) {
            return distance(grid.point(a.j, a.i), grid.point(b.j, b.i)) < exclusion_radius_m;
        });
    (void)fallback;

    std::vector<PeakPick> out;
    out.reserve(picked.size());
    for (const Cell& c : picked) out.push_back({c.j, c.i, c.value});
    return out;
}

std::vector<Position2D> select_peaks(const LikelihoodMap& map, int num_peaks,
                                     double exclusion_radius_m) {
    std::vector<Position2D> out;
    for (const PeakPick& p : select_peak_cells(map, num_peaks, exclusion_radius_m)) {
        out.push_back(map.grid.point(p.ix, p.iy));
    }
    return out;
}

std::vector<Position2D> soft_fusion(std::span<const LikelihoodMap> per_pair_maps,
                                    std::span<const Position2D> true_positions, int num_targets,
                                    double exclusion_radius_m) {
    if (per_pair_maps.empty()) throw std::invalid_argument("soft_fusion: no per-pair maps");
    if (static_cast<int>(true_positions.size()) != num_targets) {
        throw std::invalid_argument("soft_fusion: true positions must have K entries");
    }
    const auto k = static_cast<std::size_t>(num_targets);
    std::vector<Vec2> weighted_sum(k, Vec2{});
    std::vector<double> weight_sum(k, 0.0);
    std::vector<std::vector<Position2D>> assigned(per_pair_maps.size());

    for (std::size_t p = 0; p < per_pair_maps.size(); ++p) {
        const LikelihoodMap& map = per_pair_maps[p];
        if (map.method != FusionMethod::method_a) {
            throw std::invalid_argument("soft_fusion: expects unweighted (method_a) per-pair maps");
        }
        const auto picks = select_peak_cells(map, num_targets, exclusion_radius_m);
        std::vector<Position2D> positions;
        std::vector<double> values;
        for (const PeakPick& pk : picks) {
            positions.push_back(map.grid.point(pk.ix, pk.iy));
            values.push_back(std::max(0.0, pk.value));
        }
        // Idealized association of local decisions with the true targets.
        const Assignment match = optimal_assignment(true_positions, positions);
        assigned[p].resize(k);
        for (std::size_t t = 0; t < k; ++t) {
            const auto j = static_cast<std::size_t>(match.to_b[t]);
            assigned[p][t] = positions[j];
            weighted_sum[t] = weighted_sum[t] + positions[j] * values[j];
            weight_sum[t] += values[j];
        }
    }

    std::vector<Position2D> fused(k);
    for (std::size_t t = 0; t < k; ++t) {
        if (weight_sum[t] > 0.0) {
            fused[t] = {weighted_sum[t].x / weight_sum[t], weighted_sum[t].y / weight_sum[t]};
        } else {
            Vec2 mean{};
            for (std::size_t p = 0; p < assigned.size(); ++p) mean = mean + assigned[p][t];
            fused[t] = {mean.x / double(assigned.size()), mean.y / double(assigned.size())};
        }
    }
    return fused;
}

namespace {

std::uint64_t combination_count(int m, int k, std::uint64_t cap) {
    // Multiplicative formula with an early bail-out above the cap.
    long double approx = 1.0L;
    for (int i = 1; i <= k; ++i) approx = approx * (m - k + i) / i;
    if (approx > static_cast<long double>(cap) * 2.0L + 1024.0L) return cap + 1;
    unsigned __int128 c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<unsigned>(m - k + i) / static_cast<unsigned>(i);
    }
    if (c > cap) return cap + 1;
    return static_cast<std::uint64_t>(c);
}

}  // namespace

std::vector<Position2D> exact_ml_oracle(std::span<const CovarianceSet> covs,
                                        std::span<const RadarPairConfig> pairs,
                                        const SearchGrid& grid, int num_targets,
                                        std::uint64_t budget) {
    if (covs.size() != pairs.size() || covs.empty()) {
        throw std::invalid_argument("exact_ml_oracle: need one covariance per pair");
    }
    if (num_targets < 1) throw std::invalid_argument("exact_ml_oracle: K must be >= 1");
    grid.validate();

    // Hypotheses may only place targets where every pair can see them.
    std::vector<Position2D> candidates;
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const Position2D pt = grid.point(ix, iy);
            const bool visible = std::all_of(pairs.begin(), pairs.end(), [&](const auto& pair) {
                return try_angles_for_target(pair, pt).has_value();
            });
            if (visible) candidates.push_back(pt);
        }
    }
    const int m = static_cast<int>(candidates.size());
    if (m < num_targets) throw std::invalid_argument("exact_ml_oracle: not enough in-field points");
    if (combination_count(m, num_targets, budget) > budget) {
        throw std::runtime_error("exact_ml_oracle: hypothesis count exceeds budget");
    }

    const std::size_t n_pairs = pairs.size();
    std::vector<Eigen::MatrixXcd> banks(n_pairs);   // steering vectors per candidate
    std::vector<Eigen::MatrixXcd> r_banks(n_pairs);  // R times the bank
    std::vector<double> pair_weight(n_pairs);
    for (std::size_t p = 0; p < n_pairs; ++p) {
        const RadarPairConfig& pair = pairs[p];
        if (covs[p].R.rows() != pair.joint_dim()) {
            throw std::invalid_argument("exact_ml_oracle: covariance does not match pair");
        }
        Eigen::MatrixXcd bank(pair.joint_dim(), m);
        for (int c = 0; c < m; ++c) {
            bank.col(c) =
                joint_steering_vector(angles_for_target(pair, candidates[static_cast<std::size_t>(c)]), pair);
        }
        r_banks[p] = covs[p].R * bank;
        banks[p] = std::move(bank);
        pair_weight[p] = pair.subcarriers / (2.0 * covs[p].noise_variance);
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_idx;

    if (num_targets == 1) {
        // Tr{a a^+ R} = a^H R a / ||a||^2
        for (int c = 0; c < m; ++c) {
            double score = 0.0;
            for (std::size_t p = 0; p < n_pairs; ++p) {
                const auto a = banks[p].col(c);
                score += pair_weight[p] * a.dot(r_banks[p].col(c)).real() / a.squaredNorm();
            }
            if (score > best) {
                best = score;
                best_idx = {c};
            }
        }
    } else {
        const int k = num_targets;
        std::vector<int> idx(static_cast<std::size_t>(k));
        std::iota(idx.begin(), idx.end(), 0);
        Eigen::MatrixXcd gram(k, k), cross_form(k, k);
        for (;;) {
            double score = 0.0;
            for (std::size_t p = 0; p < n_pairs; ++p) {
                for (int r = 0; r < k; ++r) {
                    for (int c = 0; c < k; ++c) {
                        gram(r, c) = banks[p].col(idx[r]).dot(banks[p].col(idx[c]));
                        cross_form(r, c) = banks[p].col(idx[r]).dot(r_banks[p].col(idx[c]));
                    }
                }
                // Tikhonov fallback for (near-)coincident hypothesis angles.
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
                const double lo = es.eigenvalues().minCoeff();
                const double hi = es.eigenvalues().maxCoeff();
                if (!(lo > hi * 1e-12)) {
                    gram.diagonal().array() += 1e-8 * gram.real().trace() / double(k);
                }
                score += pair_weight[p] * (gram.inverse() * cross_form).trace().real();
            }
            if (score > best) {
                best = score;
                best_idx = idx;
            }
            int pos = k - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int t = pos + 1; t < k; ++t) {
                idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
            }
        }
    }

    std::vector<Position2D> out;
    for (int c : best_idx) out.push_back(candidates[static_cast<std::size_t>(c)]);
    return out;
}

}  // namespace mstatic
