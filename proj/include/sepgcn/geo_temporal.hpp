/**
 * @file
 * @brief Weekly time slots, great-circle distance and the exponential
 *        distance-decay similarity used to weight similar edge pairs.
 */

#pragma once

#include "sepgcn/core.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <numbers>
#include <span>
#include <vector>

namespace sepgcn {

/// Wall-clock reading in the user's local time zone (no offset attached).
struct CivilTime {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    /// 0 = Monday ... 6 = Sunday.
    [[nodiscard]] unsigned weekday_index() const {
        const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
        return std::chrono::weekday{std::chrono::sys_days{ymd}}.iso_encoding() - 1;
    }

    [[nodiscard]] bool valid() const {
        const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
        return ymd.ok() && hour >= 0 && hour < 24 && minute >= 0 && minute < 60 && second >= 0 && second < 61;
    }

    friend bool operator==(const CivilTime &, const CivilTime &) = default;
};

inline constexpr int slots_per_week = 168;

/// Weekly hour slot: weekday (Monday = 0) * 24 + hour, in [0, 167].
[[nodiscard]] inline int to_slot(const CivilTime &t) {
    return static_cast<int>(t.weekday_index()) * 24 + t.hour;
}

/// Set of weekly hour slots packed into 168 bits.
class TimeSlotSet {
  public:
    TimeSlotSet() = default;

    template <typename Range>
    explicit TimeSlotSet(const Range &slots) {
        for (auto s : slots) {
            insert(static_cast<int>(s));
        }
    }

    void insert(int slot) {
        if (slot < 0 || slot >= slots_per_week) {
            throw std::out_of_range("time slot outside [0, 167]");
        }
        bits_[static_cast<std::size_t>(slot) / 64] |= std::uint64_t{1} << (slot % 64);
    }

    [[nodiscard]] bool contains(int slot) const {
        return slot >= 0 && slot < slots_per_week && ((bits_[static_cast<std::size_t>(slot) / 64] >> (slot % 64)) & 1U);
    }

    [[nodiscard]] bool intersects(const TimeSlotSet &o) const noexcept {
        return ((bits_[0] & o.bits_[0]) | (bits_[1] & o.bits_[1]) | (bits_[2] & o.bits_[2])) != 0;
    }

    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(std::popcount(bits_[0]) + std::popcount(bits_[1]) + std::popcount(bits_[2]));
    }

    [[nodiscard]] bool empty() const noexcept { return size() == 0; }

    [[nodiscard]] std::vector<int> slots() const {
        std::vector<int> out;
        for (int s = 0; s < slots_per_week; ++s) {
            if (contains(s)) {
                out.push_back(s);
            }
        }
        return out;
    }

    friend bool operator==(const TimeSlotSet &, const TimeSlotSet &) = default;

  private:
    std::array<std::uint64_t, 3> bits_{};
};

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
    friend bool operator==(const GeoPoint &, const GeoPoint &) = default;
    friend auto operator<=>(const GeoPoint &, const GeoPoint &) = default;
};

inline constexpr double earth_radius_km = 6371.0;

/// Great-circle distance in kilometres via the haversine formula.
[[nodiscard]] inline double haversine_km(const GeoPoint &a, const GeoPoint &b, double radius_km = earth_radius_km) {
    constexpr double to_rad = std::numbers::pi / 180.0;
    const double lat1 = a.lat * to_rad;
    const double lat2 = b.lat * to_rad;
    const double s_lat = std::sin((lat2 - lat1) / 2.0);
    const double s_lon = std::sin((b.lon - a.lon) * to_rad / 2.0);
    const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
    return 2.0 * radius_km * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

enum class MedianMode { global, per_user };

struct SimilarityParams {
    double alpha_sim = 0.5;  ///< similarity at the median distance
    MedianMode median_mode = MedianMode::global;
    std::size_t sample_budget = 1'000'000;
    double earth_radius_km = sepgcn::earth_radius_km;
    std::uint64_t seed = 2024;
};

/**
 * @brief exp((d / median) * ln(alpha)): 1 at d = 0, alpha at the median,
 *        decaying towards 0 beyond it.
 */
[[nodiscard]] inline double sigma(double d_km, double median_km, double alpha_sim) {
    if (!(median_km > 0.0)) {
        fail(ErrorKind::numerical, "degenerate median: median distance must be positive");
    }
    if (!(alpha_sim > 0.0 && alpha_sim < 1.0)) {
        fail(ErrorKind::config, "similarity.alpha must lie in (0, 1)");
    }
    return std::exp((d_km / median_km) * std::log(alpha_sim));
}

/// Distance at which sigma decays to @p floor.
[[nodiscard]] inline double cutoff_distance_km(double median_km, double alpha_sim, double floor) {
    return median_km * std::log(floor) / std::log(alpha_sim);
}

/// Median of a value list (mean of the two middle values for even counts).
[[nodiscard]] inline double median_of(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of empty list");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/**
 * @brief Median pairwise distance over a location list.
 *
 * Exhaustive when the number of unordered pairs fits in `sample_budget`;
 * otherwise `sample_budget` pairs (i != j) are drawn uniformly with the
 * params' seed.
 */
[[nodiscard]] inline double global_median_km(std::span<const GeoPoint> points, const SimilarityParams &params) {
    const std::size_t n = points.size();
    if (n < 2) {
        fail(ErrorKind::input, "median distance needs at least two locations");
    }
    std::vector<double> dist;
    const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (total_pairs <= static_cast<double>(params.sample_budget)) {
        dist.reserve(static_cast<std::size_t>(total_pairs));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                dist.push_back(haversine_km(points[i], points[j], params.earth_radius_km));
            }
        }
    } else {
        Rng rng(params.seed);
        dist.reserve(params.sample_budget);
        for (std::size_t s = 0; s < params.sample_budget; ++s) {
            const std::size_t i = uniform_index(rng, n);
            std::size_t j = uniform_index(rng, n - 1);
            j += j >= i ? 1 : 0;
            dist.push_back(haversine_km(points[i], points[j], params.earth_radius_km));
        }
    }
    const double m = median_of(std::move(dist));
    if (!(m > 0.0)) {
        fail(ErrorKind::numerical, "degenerate median: median pairwise distance is 0 (check coordinates)");
    }
    return m;
}

/**
 * @brief Per-group median of pairwise distances among each group's locations.
 *
 * Groups with fewer than two locations, or whose median is 0, take
 * @p fallback_km.
 */
[[nodiscard]] inline std::vector<double> per_group_median_km(const std::vector<std::vector<GeoPoint>> &groups,
                                                             double fallback_km, double radius_km = earth_radius_km) {
    std::vector<double> out(groups.size(), fallback_km);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto &pts = groups[g];
        if (pts.size() < 2) {
            continue;
        }
        std::vector<double> dist;
        dist.reserve(pts.size() * (pts.size() - 1) / 2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                dist.push_back(haversine_km(pts[i], pts[j], radius_km));
            }
        }
        const double m = median_of(std::move(dist));
        if (m > 0.0) {
            out[g] = m;
        }
    }
    return out;
}

}  // namespace sepgcn
