/**
 * @file
 * @brief Seeded synthetic check-in generator for a single city with planted
 *        spatio-temporal co-visit structure.
 *
 * Venues sit in neighbourhoods and each venue has an opening pattern (a
 * weekly time profile). Users live around one or two neighbourhoods and
 * keep one or two daily routines; a check-in picks a neighbourhood the user
 * frequents, a routine, then a popular venue matching both. Users who share
 * neighbourhood and routine therefore co-visit nearby venues in the same
 * weekly slots without necessarily sharing venues.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/geo_temporal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace sepgcn {

struct SynthConfig {
    std::size_t n_users = 1000;
    std::size_t n_items = 2000;
    std::size_t n_checkins = 30000;
    std::size_t n_regions = 120;
    std::size_t n_profiles = 6;
    double center_lat = 40.7306;
    double center_lon = -73.9866;
    double city_radius_km = 12.0;
    double region_spread_km = 0.3;
    double region_loyalty = 0.9;   ///< chance a check-in stays in the user's regions
    double routine_loyalty = 0.9;  ///< chance a check-in follows the user's routines
    double popularity_skew = 0.8;  ///< Zipf exponent of venue popularity within a cell
    double revisit = 0.1;          ///< chance of repeating a previously visited venue
    std::uint64_t seed = 7;
};

namespace detail {

/// Hours (0-23) and weekday mask of a routine.
struct Routine {
    std::vector<int> hours;
    std::array<bool, 7> days{};
};

inline std::vector<Routine> default_routines(std::size_t n) {
    const std::array<Routine, 8> base{{
        {{7, 8, 9}, {true, true, true, true, true, false, false}},        // weekday breakfast
        {{12, 13}, {true, true, true, true, true, false, false}},         // weekday lunch
        {{18, 19, 20}, {true, true, true, true, true, false, false}},     // weekday evening
        {{21, 22, 23}, {false, false, false, false, true, true, false}},  // late fri/sat
        {{10, 11, 12, 13}, {false, false, false, false, false, true, true}},  // weekend brunch
        {{15, 16, 17}, {false, false, false, false, false, true, true}},  // weekend afternoon
        {{6, 7}, {false, true, false, true, false, true, false}},         // early gym
        {{0, 1, 2}, {false, false, false, false, false, true, true}},     // night
    }};
    std::vector<Routine> out;
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(base[k % base.size()]);
    }
    return out;
}

inline GeoPoint offset_km(const GeoPoint &p, double north_km, double east_km) {
    constexpr double km_per_deg = earth_radius_km * std::numbers::pi / 180.0;
    return {p.lat + north_km / km_per_deg, p.lon + east_km / (km_per_deg * std::cos(p.lat * std::numbers::pi / 180.0))};
}

}  // namespace detail

/**
 * @brief Generate raw check-ins. Item and user ids are `v<k>` and `u<k>`.
 */
[[nodiscard]] inline std::vector<CheckinRecord> generate_city(const SynthConfig &cfg) {
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const GeoPoint center{cfg.center_lat, cfg.center_lon};
    const auto routines = detail::default_routines(cfg.n_profiles);

    std::vector<GeoPoint> region_center(cfg.n_regions);
    for (auto &rc : region_center) {
        const double r = cfg.city_radius_km * std::sqrt(unit(rng));
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        rc = detail::offset_km(center, r * std::cos(theta), r * std::sin(theta));
    }
    // venues: region, routine, location; cell lists keyed by (region, routine)
    std::vector<GeoPoint> venue_at(cfg.n_items);
    std::vector<std::vector<std::vector<std::uint32_t>>> cell(cfg.n_regions,
                                                              std::vector<std::vector<std::uint32_t>>(cfg.n_profiles));
    std::vector<std::size_t> venue_routine(cfg.n_items);
    for (std::uint32_t v = 0; v < cfg.n_items; ++v) {
        const std::size_t reg = uniform_index(rng, cfg.n_regions);
        const std::size_t rt = uniform_index(rng, cfg.n_profiles);
        venue_at[v] = detail::offset_km(region_center[reg], cfg.region_spread_km * gauss(rng),
                                        cfg.region_spread_km * gauss(rng));
        venue_routine[v] = rt;
        cell[reg][rt].push_back(v);
    }
    auto zipf_pick = [&](const std::vector<std::uint32_t> &list) {
        double total = 0.0;
        for (std::size_t k = 0; k < list.size(); ++k) {
            total += 1.0 / std::pow(static_cast<double>(k + 1), cfg.popularity_skew);
        }
        double x = unit(rng) * total;
        for (std::size_t k = 0; k < list.size(); ++k) {
            x -= 1.0 / std::pow(static_cast<double>(k + 1), cfg.popularity_skew);
            if (x <= 0.0) {
                return list[k];
            }
        }
        return list.back();
    };

    struct Persona {
        std::vector<std::size_t> regions;
        std::vector<std::size_t> routines;
        std::vector<std::uint32_t> visited;
    };
    std::vector<Persona> users(cfg.n_users);
    for (Persona &p : users) {
        const std::size_t home = uniform_index(rng, cfg.n_regions);
        p.regions.push_back(home);
        if (unit(rng) < 0.5) {
            // second region: the nearest other neighbourhood
            std::size_t best = home;
            double best_d = 1e300;
            for (std::size_t r = 0; r < cfg.n_regions; ++r) {
                const double d = haversine_km(region_center[home], region_center[r]);
                if (r != home && d < best_d) {
                    best_d = d;
                    best = r;
                }
            }
            p.regions.push_back(best);
        }
        p.routines.push_back(uniform_index(rng, cfg.n_profiles));
        if (unit(rng) < 0.6) {
            p.routines.push_back(uniform_index(rng, cfg.n_profiles));
        }
    }

    std::vector<CheckinRecord> out;
    out.reserve(cfg.n_checkins);
    // every user gets an even share, the remainder goes to the first users
    for (std::size_t c = 0; c < cfg.n_checkins; ++c) {
        const std::size_t u = c % cfg.n_users;
        Persona &p = users[u];
        std::uint32_t venue = 0;
        if (!p.visited.empty() && unit(rng) < cfg.revisit) {
            venue = p.visited[uniform_index(rng, p.visited.size())];
        } else {
            std::size_t reg = unit(rng) < cfg.region_loyalty ? p.regions[uniform_index(rng, p.regions.size())]
                                                               : uniform_index(rng, cfg.n_regions);
            std::size_t rt = unit(rng) < cfg.routine_loyalty ? p.routines[uniform_index(rng, p.routines.size())]
                                                               : uniform_index(rng, cfg.n_profiles);
            for (std::size_t tries = 0; cell[reg][rt].empty() && tries < 64; ++tries) {
                reg = uniform_index(rng, cfg.n_regions);
                rt = uniform_index(rng, cfg.n_profiles);
            }
            venue = cell[reg][rt].empty() ? static_cast<std::uint32_t>(uniform_index(rng, cfg.n_items))
                                          : zipf_pick(cell[reg][rt]);
            p.visited.push_back(venue);
        }
        const detail::Routine &rt = routines[venue_routine[venue]];
        std::vector<int> days;
        for (int d = 0; d < 7; ++d) {
            if (rt.days[static_cast<std::size_t>(d)]) {
                days.push_back(d);
            }
        }
        const int weekday = days[uniform_index(rng, days.size())];
        const int hour = rt.hours[uniform_index(rng, rt.hours.size())];
        // 2012-01-02 is a Monday; spread over 40 weeks
        const auto base = std::chrono::sys_days{std::chrono::year{2012} / 1 / 2} +
                          std::chrono::days{7 * static_cast<int>(uniform_index(rng, 40)) + weekday};
        const std::chrono::year_month_day ymd{base};
        CheckinRecord rec;
        rec.user_id = "u" + std::to_string(u);
        rec.item_id = "v" + std::to_string(venue);
        rec.local_time = CivilTime{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                                   static_cast<unsigned>(ymd.day()), hour, static_cast<int>(uniform_index(rng, 60)),
                                   static_cast<int>(uniform_index(rng, 60))};
        rec.latitude = venue_at[venue].lat;
        rec.longitude = venue_at[venue].lon;
        out.push_back(std::move(rec));
    }
    return out;
}

/// Small random check-in graph for oracle comparisons.
struct RandomGraphConfig {
    std::size_t n_users = 50;
    std::size_t n_items = 80;
    std::size_t n_records = 400;
    double box_km = 4.0;     ///< side of the square holding every venue
    int n_hours = 6;         ///< distinct hours used on two weekdays
    double train_ratio = 0.7;
    std::uint64_t seed = 1;
};

/**
 * @brief Records cover every user and item at least once when n_records
 *        allows; the dataset keeps users with a single venue.
 */
[[nodiscard]] inline Dataset random_dataset(const RandomGraphConfig &cfg) {
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const GeoPoint origin{52.52, 13.40};
    std::vector<GeoPoint> venue(cfg.n_items);
    for (GeoPoint &v : venue) {
        v = detail::offset_km(origin, cfg.box_km * unit(rng), cfg.box_km * unit(rng));
    }
    std::vector<CheckinRecord> raw;
    for (std::size_t r = 0; r < cfg.n_records; ++r) {
        const std::size_t u = r < cfg.n_users ? r : uniform_index(rng, cfg.n_users);
        const std::size_t i = r < cfg.n_items ? r : uniform_index(rng, cfg.n_items);
        CheckinRecord rec;
        rec.user_id = "u" + std::to_string(u);
        rec.item_id = "v" + std::to_string(i);
        // 2012-01-02 is a Monday
        rec.local_time = CivilTime{2012, 1, 2 + static_cast<unsigned>(uniform_index(rng, 2)),
                                   10 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.n_hours))), 0, 0};
        rec.latitude = venue[i].lat;
        rec.longitude = venue[i].lon;
        raw.push_back(std::move(rec));
    }
    SplitConfig split;
    split.train_ratio = cfg.train_ratio;
    split.min_interactions = 1;
    split.seed = cfg.seed;
    return build_dataset(raw, split);
}

/// Write records as tab-separated `user item timestamp lat lon` lines.
inline void write_checkins_tsv(std::ostream &os, const std::vector<CheckinRecord> &records) {
    for (const CheckinRecord &r : records) {
        char ts[32];
        std::snprintf(ts, sizeof(ts), "%04d-%02u-%02uT%02d:%02d:%02d", r.local_time.year, r.local_time.month,
                      r.local_time.day, r.local_time.hour, r.local_time.minute, r.local_time.second);
        os << r.user_id << '\t' << r.item_id << '\t' << ts << '\t' << format_double(r.latitude) << '\t'
           << format_double(r.longitude) << '\n';
    }
}

}  // namespace sepgcn
