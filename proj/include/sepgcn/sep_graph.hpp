/**
 * @file
 * @brief Similar-edge-pair (SEP) matrix over training interaction edges.
 *
 * Two edges are linked when their weekly slot sets intersect and their
 * locations are close enough that the decay similarity stays above a floor.
 * Candidate pairs come from a 3-D chord-length grid over the unit sphere
 * joined with a per-slot inverted index, so the quadratic pair scan is never
 * materialised.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/geo_temporal.hpp"

#include <array>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace sepgcn {

/// Training edges in canonical (dataset) order with their context.
struct EdgeIndex {
    std::vector<std::uint32_t> users;
    std::vector<std::uint32_t> items;
    std::vector<TimeSlotSet> slots;
    std::vector<GeoPoint> points;
    std::unordered_map<std::uint64_t, std::uint32_t> lookup;
    std::size_t n_users = 0;
    std::size_t n_items = 0;

    [[nodiscard]] std::size_t size() const noexcept { return users.size(); }

    [[nodiscard]] static std::uint64_t key(std::uint32_t u, std::uint32_t i) noexcept {
        return (std::uint64_t{u} << 32) | i;
    }

    /// Edge id of (u, i), or -1 when it is not a training edge.
    [[nodiscard]] std::int64_t find(std::uint32_t u, std::uint32_t i) const {
        const auto it = lookup.find(key(u, i));
        return it == lookup.end() ? -1 : static_cast<std::int64_t>(it->second);
    }
};

[[nodiscard]] inline EdgeIndex build_edge_index(const Dataset &ds) {
    EdgeIndex idx;
    idx.n_users = ds.n_users();
    idx.n_items = ds.n_items();
    for (const Interaction &x : ds.interactions) {
        if (x.split != SplitTag::train) {
            continue;
        }
        idx.lookup.emplace(EdgeIndex::key(x.user, x.item), static_cast<std::uint32_t>(idx.users.size()));
        idx.users.push_back(x.user);
        idx.items.push_back(x.item);
        idx.slots.emplace_back(x.slots);
        idx.points.push_back(ds.item_coords[x.item]);
    }
    return idx;
}

/// Which of the two linking conditions are active.
enum class SepVariant {
    spatio_temporal,  ///< slot overlap and distance decay
    temporal_only,    ///< slot overlap, weight fixed at 1
    spatial_only,     ///< distance decay, no slot condition
};

struct PruningParams {
    double sigma_floor = 0.01;
    std::size_t max_neighbors = 64;  ///< 0 disables the cap
    std::size_t pair_budget = 50'000'000;
    bool self_loops = false;
};

/// Median distance(s) feeding the decay similarity of a pair.
struct MedianContext {
    double global_km = 0.0;
    std::vector<double> per_edge_km;  ///< empty in global mode

    [[nodiscard]] double pair_median(std::size_t i, std::size_t j) const {
        return per_edge_km.empty() ? global_km : 0.5 * (per_edge_km[i] + per_edge_km[j]);
    }

    [[nodiscard]] double max_median() const {
        double m = global_km;
        for (double v : per_edge_km) {
            m = std::max(m, v);
        }
        return m;
    }
};

/**
 * @brief Global median over sampled edge-location pairs; in per-user mode
 *        each edge also carries the median over its user's visited locations.
 */
[[nodiscard]] inline MedianContext compute_median_context(const EdgeIndex &idx, const SimilarityParams &params) {
    MedianContext ctx;
    ctx.global_km = global_median_km(idx.points, params);
    if (params.median_mode == MedianMode::per_user) {
        std::vector<std::vector<GeoPoint>> visited(idx.n_users);
        for (std::size_t e = 0; e < idx.size(); ++e) {
            visited[idx.users[e]].push_back(idx.points[e]);
        }
        for (auto &v : visited) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        const std::vector<double> per_user = per_group_median_km(visited, ctx.global_km, params.earth_radius_km);
        ctx.per_edge_km.resize(idx.size());
        for (std::size_t e = 0; e < idx.size(); ++e) {
            ctx.per_edge_km[e] = per_user[idx.users[e]];
        }
    }
    return ctx;
}

struct CandidatePair {
    std::uint32_t i;
    std::uint32_t j;
    double d_km;
};

namespace detail {

/// Uniform grid over 3-D points on a sphere of the given radius.
class SphereGrid {
  public:
    SphereGrid(std::span<const GeoPoint> points, double chord_cell, double radius_km)
        : cell_(chord_cell), cell_of_(points.size()) {
        constexpr double to_rad = std::numbers::pi / 180.0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            const double lat = points[p].lat * to_rad;
            const double lon = points[p].lon * to_rad;
            const std::array<double, 3> xyz{radius_km * std::cos(lat) * std::cos(lon),
                                            radius_km * std::cos(lat) * std::sin(lon), radius_km * std::sin(lat)};
            std::array<std::int64_t, 3> key{};
            for (std::size_t a = 0; a < 3; ++a) {
                key[a] = cell_ > 0.0 ? static_cast<std::int64_t>(std::floor(xyz[a] / cell_)) : 0;
            }
            const auto [it, fresh] = ids_.try_emplace(key, keys_.size());
            if (fresh) {
                keys_.push_back(key);
            }
            cell_of_[p] = it->second;
        }
    }

    [[nodiscard]] std::size_t cells() const noexcept { return keys_.size(); }
    [[nodiscard]] std::size_t cell_of(std::size_t p) const noexcept { return cell_of_[p]; }

    /// Existing cells among the 27 around (and including) @p cell.
    [[nodiscard]] std::vector<std::size_t> neighbourhood(std::size_t cell) const {
        std::vector<std::size_t> out;
        const auto &k = keys_[cell];
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = ids_.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it != ids_.end()) {
                        out.push_back(it->second);
                    }
                }
            }
        }
        return out;
    }

  private:
    double cell_;
    std::vector<std::size_t> cell_of_;
    std::map<std::array<std::int64_t, 3>, std::size_t> ids_;
    std::vector<std::array<std::int64_t, 3>> keys_;
};

/**
 * @brief Every unordered pair (i < j) with distance <= d_max and, when
 *        @p slots is non-empty, a shared slot. @p accept decides the rest.
 */
template <typename Accept>
void grid_join(std::span<const GeoPoint> points, std::span<const TimeSlotSet> slots, double d_max_km, double radius_km,
               std::size_t pair_budget, Accept &&accept) {
    const std::size_t n = points.size();
    const bool by_slot = !slots.empty();
    const bool whole_sphere = !(d_max_km < std::numbers::pi * radius_km);
    // chord length for d_max, padded so rounding never drops a boundary pair
    const double chord = whole_sphere ? 0.0 : 2.0 * radius_km * std::sin(d_max_km / (2.0 * radius_km)) * (1.0 + 1e-9) + 1e-9;
    const SphereGrid grid(points, chord, radius_km);

    // per cell, per slot (or one bucket when slots are unused): ascending edge ids
    const std::size_t buckets = by_slot ? slots_per_week : 1;
    std::vector<std::size_t> offset(grid.cells() * buckets + 1, 0);
    auto bucket_of = [&](std::size_t cell, int slot) { return cell * buckets + static_cast<std::size_t>(slot); };
    std::vector<std::vector<int>> slot_lists(by_slot ? n : 0);
    for (std::size_t p = 0; p < n; ++p) {
        if (by_slot) {
            slot_lists[p] = slots[p].slots();
            for (int s : slot_lists[p]) {
                ++offset[bucket_of(grid.cell_of(p), s) + 1];
            }
        } else {
            ++offset[bucket_of(grid.cell_of(p), 0) + 1];
        }
    }
    for (std::size_t b = 0; b + 1 < offset.size(); ++b) {
        offset[b + 1] += offset[b];
    }
    std::vector<std::uint32_t> members(offset.back());
    {
        std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
        for (std::size_t p = 0; p < n; ++p) {
            if (by_slot) {
                for (int s : slot_lists[p]) {
                    members[fill[bucket_of(grid.cell_of(p), s)]++] = static_cast<std::uint32_t>(p);
                }
            } else {
                members[fill[bucket_of(grid.cell_of(p), 0)]++] = static_cast<std::uint32_t>(p);
            }
        }
    }

    std::vector<std::uint32_t> marker(n, std::numeric_limits<std::uint32_t>::max());
    std::size_t produced = 0;
    std::vector<std::vector<std::size_t>> hood_cache(grid.cells());
    for (std::size_t i = 0; i < n; ++i) {
        auto &hood = hood_cache[grid.cell_of(i)];
        if (hood.empty()) {
            hood = grid.neighbourhood(grid.cell_of(i));
        }
        auto scan = [&](std::size_t bucket) {
            const auto first = members.begin() + static_cast<std::ptrdiff_t>(offset[bucket]);
            const auto last = members.begin() + static_cast<std::ptrdiff_t>(offset[bucket + 1]);
            for (auto it = std::upper_bound(first, last, static_cast<std::uint32_t>(i)); it != last; ++it) {
                const std::uint32_t j = *it;
                if (marker[j] == i) {
                    continue;
                }
                marker[j] = static_cast<std::uint32_t>(i);
                const double d = haversine_km(points[i], points[j], radius_km);
                if (!whole_sphere && d > d_max_km) {
                    continue;
                }
                if (accept(static_cast<std::uint32_t>(i), j, d) && ++produced > pair_budget) {
                    fail(ErrorKind::config, "SEP candidate pairs exceed the budget of " + std::to_string(pair_budget) +
                                                "; raise sep.sigma_floor or lower sep.max_neighbors/budget scope");
                }
            }
        };
        for (std::size_t cell : hood) {
            if (by_slot) {
                for (int s : slot_lists[i]) {
                    scan(bucket_of(cell, s));
                }
            } else {
                scan(bucket_of(cell, 0));
            }
        }
    }
}

}  // namespace detail

/// Decay weight of a candidate pair under the given variant.
[[nodiscard]] inline double pair_weight(SepVariant variant, double d_km, double median_km, double alpha_sim) {
    return variant == SepVariant::temporal_only ? 1.0 : sigma(d_km, median_km, alpha_sim);
}

/**
 * @brief Candidate pairs (i < j) sorted by (i, j), each paired once.
 *
 * A pair qualifies when its slot sets intersect (unless spatial-only) and
 * its similarity is at least `sigma_floor` (unless temporal-only, which keeps
 * every slot-overlapping pair).
 */
[[nodiscard]] inline std::vector<CandidatePair> candidate_pairs(const EdgeIndex &idx, const SimilarityParams &params,
                                                                const MedianContext &medians,
                                                                const PruningParams &pruning,
                                                                SepVariant variant = SepVariant::spatio_temporal) {
    if (!(pruning.sigma_floor > 0.0 && pruning.sigma_floor < params.alpha_sim)) {
        fail(ErrorKind::config, "sep.sigma_floor must lie in (0, similarity.alpha)");
    }
    const double d_max = variant == SepVariant::temporal_only
                             ? std::numeric_limits<double>::infinity()
                             : cutoff_distance_km(medians.max_median(), params.alpha_sim, pruning.sigma_floor);
    std::vector<CandidatePair> out;
    const std::span<const TimeSlotSet> slot_view =
        variant == SepVariant::spatial_only ? std::span<const TimeSlotSet>{} : std::span<const TimeSlotSet>(idx.slots);
    detail::grid_join(idx.points, slot_view, d_max, params.earth_radius_km, pruning.pair_budget,
                      [&](std::uint32_t i, std::uint32_t j, double d) {
                          if (variant != SepVariant::temporal_only &&
                              sigma(d, medians.pair_median(i, j), params.alpha_sim) < pruning.sigma_floor) {
                              return false;
                          }
                          out.push_back({i, j, d});
                          return true;
                      });
    std::sort(out.begin(), out.end(),
              [](const CandidatePair &a, const CandidatePair &b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    return out;
}

enum class SepNormalization { raw, sym_degree, row_unit };

[[nodiscard]] inline std::string to_string(SepNormalization n) {
    switch (n) {
        case SepNormalization::raw: return "raw";
        case SepNormalization::sym_degree: return "sym_degree";
        case SepNormalization::row_unit: return "row_unit";
    }
    return "raw";
}

/**
 * @brief Sparse symmetric |E| x |E| matrix in coordinate form.
 *
 * Entries are sorted by (row, col) and both (i, j) and (j, i) are stored.
 */
struct SepMatrix {
    std::size_t n = 0;
    std::vector<Triplet> entries;
    SepNormalization normalization = SepNormalization::raw;
    std::vector<std::pair<std::string, std::string>> params;  ///< builder settings echoed into files

    [[nodiscard]] std::size_t nnz() const noexcept { return entries.size(); }
    [[nodiscard]] std::size_t pair_count() const noexcept {
        std::size_t off = 0;
        for (const Triplet &t : entries) {
            off += t.row < t.col ? 1 : 0;
        }
        return off;
    }

    /// Row sums of the stored values.
    [[nodiscard]] std::vector<double> degrees() const {
        std::vector<double> deg(n, 0.0);
        for (const Triplet &t : entries) {
            deg[t.row] += t.value;
        }
        return deg;
    }

    [[nodiscard]] CsrMatrix to_csr() const { return CsrMatrix(n, n, entries); }

    [[nodiscard]] bool is_symmetric() const {
        std::map<std::pair<std::uint32_t, std::uint32_t>, double> m;
        for (const Triplet &t : entries) {
            m[{t.row, t.col}] = t.value;
        }
        return std::all_of(entries.begin(), entries.end(), [&](const Triplet &t) {
            const auto it = m.find({t.col, t.row});
            return it != m.end() && it->second == t.value;
        });
    }
};

namespace detail {

/// Keep each row's strongest @p cap entries (ties: lower column first), then
/// drop any pair that survived on one side only.
inline std::vector<CandidatePair> cap_neighbours(std::size_t n, const std::vector<CandidatePair> &pairs,
                                                 const std::vector<double> &weight, std::size_t cap) {
    if (cap == 0) {
        return pairs;
    }
    std::vector<std::vector<std::pair<double, std::uint32_t>>> nbrs(n);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        nbrs[pairs[p].i].emplace_back(weight[p], pairs[p].j);
        nbrs[pairs[p].j].emplace_back(weight[p], pairs[p].i);
    }
    for (auto &list : nbrs) {
        if (list.size() > cap) {
            std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(cap), list.end(),
                              [](const auto &a, const auto &b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
            list.resize(cap);
        }
        std::sort(list.begin(), list.end(), [](const auto &a, const auto &b) { return a.second < b.second; });
    }
    auto kept = [&](std::uint32_t a, std::uint32_t b) {
        const auto &list = nbrs[a];
        const auto it = std::lower_bound(list.begin(), list.end(), b,
                                         [](const auto &e, std::uint32_t v) { return e.second < v; });
        return it != list.end() && it->second == b;
    };
    std::vector<CandidatePair> out;
    for (const CandidatePair &p : pairs) {
        if (kept(p.i, p.j) && kept(p.j, p.i)) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace detail

/// Build parameters recorded alongside a SEP matrix.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> sep_params_echo(const SimilarityParams &params,
                                                                                     const MedianContext &medians,
                                                                                     const PruningParams &pruning,
                                                                                     SepVariant variant) {
    const char *variant_name = variant == SepVariant::spatio_temporal ? "spatio_temporal"
                               : variant == SepVariant::temporal_only ? "temporal_only"
                                                                      : "spatial_only";
    return {{"variant", variant_name},
            {"alpha_sim", format_double(params.alpha_sim)},
            {"median_mode", params.median_mode == MedianMode::global ? "global" : "per_user"},
            {"median_km", format_double(medians.global_km)},
            {"sample_budget", std::to_string(params.sample_budget)},
            {"seed", std::to_string(params.seed)},
            {"sigma_floor", format_double(pruning.sigma_floor)},
            {"max_neighbors", std::to_string(pruning.max_neighbors)},
            {"self_loops", pruning.self_loops ? "1" : "0"}};
}

struct SepBuildReport {
    std::size_t candidate_pairs = 0;
    std::size_t stored_pairs = 0;
    std::size_t isolated_edges = 0;
    double median_km = 0.0;
    double cutoff_km = 0.0;
    double density = 0.0;  ///< stored entries / |E|^2
};

/**
 * @brief Raw SEP matrix: sigma weights on every surviving candidate pair,
 *        stored in both directions.
 *
 * Zero surviving pairs is not an error (propagation then degenerates to the
 * plain graph model); callers should surface `report.stored_pairs == 0`.
 */
[[nodiscard]] inline SepMatrix build_sep_matrix(const EdgeIndex &idx, const SimilarityParams &params,
                                                const MedianContext &medians, const PruningParams &pruning,
                                                SepVariant variant = SepVariant::spatio_temporal,
                                                SepBuildReport *report = nullptr) {
    const std::vector<CandidatePair> candidates = candidate_pairs(idx, params, medians, pruning, variant);
    std::vector<double> weight(candidates.size());
    for (std::size_t p = 0; p < candidates.size(); ++p) {
        const auto &c = candidates[p];
        weight[p] = pair_weight(variant, c.d_km, medians.pair_median(c.i, c.j), params.alpha_sim);
    }
    const std::vector<CandidatePair> kept = detail::cap_neighbours(idx.size(), candidates, weight, pruning.max_neighbors);

    SepMatrix m;
    m.n = idx.size();
    m.entries.reserve(2 * kept.size() + (pruning.self_loops ? idx.size() : 0));
    for (const CandidatePair &c : kept) {
        const double w = pair_weight(variant, c.d_km, medians.pair_median(c.i, c.j), params.alpha_sim);
        m.entries.push_back({c.i, c.j, w});
        m.entries.push_back({c.j, c.i, w});
    }
    if (pruning.self_loops) {
        for (std::uint32_t e = 0; e < idx.size(); ++e) {
            m.entries.push_back({e, e, 1.0});
        }
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const Triplet &a, const Triplet &b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    m.params = sep_params_echo(params, medians, pruning, variant);
    if (report) {
        report->candidate_pairs = candidates.size();
        report->stored_pairs = kept.size();
        std::vector<bool> touched(idx.size(), false);
        for (const CandidatePair &c : kept) {
            touched[c.i] = touched[c.j] = true;
        }
        report->isolated_edges = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), false));
        report->median_km = medians.global_km;
        report->cutoff_km = variant == SepVariant::temporal_only
                                ? std::numeric_limits<double>::infinity()
                                : cutoff_distance_km(medians.max_median(), params.alpha_sim, pruning.sigma_floor);
        report->density = idx.size() ? static_cast<double>(m.nnz()) / (static_cast<double>(idx.size()) * static_cast<double>(idx.size())) : 0.0;
    }
    return m;
}

/**
 * @brief Normalise a raw SEP matrix.
 *
 * `sym_degree` divides by sqrt(deg_i * deg_j) with deg the raw row sums;
 * `row_unit` scales each row to unit L2 norm. Rows without entries stay empty.
 */
[[nodiscard]] inline SepMatrix normalize_sep(const SepMatrix &raw, SepNormalization method) {
    SepMatrix out = raw;
    out.normalization = method;
    if (method == SepNormalization::raw) {
        return out;
    }
    if (method == SepNormalization::sym_degree) {
        const std::vector<double> deg = raw.degrees();
        for (Triplet &t : out.entries) {
            t.value = t.value / std::sqrt(deg[t.row] * deg[t.col]);
        }
    } else {
        std::vector<double> norm(raw.n, 0.0);
        for (const Triplet &t : raw.entries) {
            norm[t.row] += t.value * t.value;
        }
        for (Triplet &t : out.entries) {
            t.value /= std::sqrt(norm[t.row]);
        }
    }
    return out;
}

// --- text format -------------------------------------------------------------
//
// # SEPMAT1
// # n_edges <n>
// # normalization <raw|sym_degree|row_unit>
// # nnz <k>
// # param <key> <value>      (zero or more)
// <edge_i>\t<edge_j>\t<value>  (k lines, sorted by (edge_i, edge_j))

inline void write_sep_matrix(std::ostream &os, const SepMatrix &m) {
    os << "# SEPMAT1\n# n_edges " << m.n << "\n# normalization " << to_string(m.normalization) << "\n# nnz "
       << m.nnz() << '\n';
    for (const auto &[k, v] : m.params) {
        os << "# param " << k << ' ' << v << '\n';
    }
    for (const Triplet &t : m.entries) {
        os << t.row << '\t' << t.col << '\t' << format_double(t.value) << '\n';
    }
}

[[nodiscard]] inline SepMatrix read_sep_matrix(std::istream &is) {
    auto bad = [](const std::string &what) { return Error(ErrorKind::input, "SEP matrix file: " + what); };
    std::string line;
    if (!std::getline(is, line) || line != "# SEPMAT1") {
        throw bad("missing '# SEPMAT1' header");
    }
    SepMatrix m;
    std::size_t nnz = 0;
    while (is.peek() == '#' && std::getline(is, line)) {
        std::istringstream ls(line.substr(1));
        std::string key;
        ls >> key;
        if (key == "n_edges") {
            ls >> m.n;
        } else if (key == "nnz") {
            ls >> nnz;
        } else if (key == "normalization") {
            std::string v;
            ls >> v;
            m.normalization = v == "sym_degree" ? SepNormalization::sym_degree
                              : v == "row_unit" ? SepNormalization::row_unit
                                                : SepNormalization::raw;
        } else if (key == "param") {
            std::string k;
            std::string v;
            ls >> k >> v;
            m.params.emplace_back(k, v);
        }
    }
    m.entries.reserve(nnz);
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = detail::split_fields(line, '\t');
        if (f.size() != 3) {
            throw bad("malformed entry '" + line + "'");
        }
        const double n = static_cast<double>(m.n);
        const double r = detail::parse_number(f[0]).value_or(-1.0);
        const double c = detail::parse_number(f[1]).value_or(-1.0);
        const auto v = detail::parse_number(f[2]);
        if (!v || r < 0 || c < 0 || r >= n || c >= n) {
            throw bad("malformed entry '" + line + "'");
        }
        m.entries.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), *v});
    }
    if (m.entries.size() != nnz) {
        throw bad("expected " + std::to_string(nnz) + " entries, found " + std::to_string(m.entries.size()));
    }
    return m;
}

/**
 * @brief Item-item block of sigma weights for a spatially augmented
 *        bipartite adjacency (no slot condition, same floor and cap).
 */
[[nodiscard]] inline std::vector<Triplet> item_spatial_block(const std::vector<GeoPoint> &item_coords,
                                                             const SimilarityParams &params, double median_km,
                                                             const PruningParams &pruning) {
    const double d_max = cutoff_distance_km(median_km, params.alpha_sim, pruning.sigma_floor);
    std::vector<CandidatePair> pairs;
    detail::grid_join(item_coords, {}, d_max, params.earth_radius_km, pruning.pair_budget,
                      [&](std::uint32_t i, std::uint32_t j, double d) {
                          if (sigma(d, median_km, params.alpha_sim) < pruning.sigma_floor) {
                              return false;
                          }
                          pairs.push_back({i, j, d});
                          return true;
                      });
    std::sort(pairs.begin(), pairs.end(),
              [](const CandidatePair &a, const CandidatePair &b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    std::vector<double> w(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        w[p] = sigma(pairs[p].d_km, median_km, params.alpha_sim);
    }
    std::vector<Triplet> out;
    for (const CandidatePair &c : detail::cap_neighbours(item_coords.size(), pairs, w, pruning.max_neighbors)) {
        const double v = sigma(c.d_km, median_km, params.alpha_sim);
        out.push_back({c.i, c.j, v});
        out.push_back({c.j, c.i, v});
    }
    return out;
}

}  // namespace sepgcn
