/**
 * @file
 * @brief Check-in ingestion: line parsing, k-core filtering, entity indexing,
 *        per-user train/test split and the `SEPDATA1` snapshot format.
 */

#pragma once

#include "sepgcn/core.hpp"
#include "sepgcn/geo_temporal.hpp"

#include <ctime>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace sepgcn {

struct CheckinRecord {
    std::string user_id;
    std::string item_id;
    CivilTime local_time;
    double latitude = 0.0;
    double longitude = 0.0;
};

enum class TimestampFormat { iso, epoch_with_zone };

/// Column layout of a raw check-in file. Column indices are 0-based.
struct FieldMapping {
    int user = 0;
    int item = 1;
    int timestamp = 2;
    int lat = 3;
    int lon = 4;
    int zone = -1;  ///< IANA zone column; required for epoch timestamps
    char delimiter = '\0';  ///< '\0' detects tab vs comma from the first line
    bool header = false;
    TimestampFormat format = TimestampFormat::iso;
};

struct LineReject {
    std::size_t line_no;
    std::string reason;
};

struct ParseResult {
    std::vector<CheckinRecord> records;
    std::vector<LineReject> rejects;
    std::size_t lines = 0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    std::string tmp(s);
    char *end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int &out) {
    if (pos + len > s.size()) {
        return false;
    }
    int v = 0;
    for (std::size_t k = pos; k < pos + len; ++k) {
        if (s[k] < '0' || s[k] > '9') {
            return false;
        }
        v = v * 10 + (s[k] - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

/**
 * @brief Parse `YYYY-MM-DD[T ]HH:MM[:SS]` as a civil local time.
 *
 * A trailing `Z` or fractional seconds are accepted and ignored; the value is
 * taken at face value as local time.
 */
inline std::optional<CivilTime> parse_iso_civil(std::string_view s) {
    CivilTime t;
    int month = 0;
    int day = 0;
    if (!detail::parse_fixed_int(s, 0, 4, t.year) || s.size() < 16 || s[4] != '-' || s[7] != '-' ||
        !detail::parse_fixed_int(s, 5, 2, month) || !detail::parse_fixed_int(s, 8, 2, day) ||
        (s[10] != 'T' && s[10] != ' ') || !detail::parse_fixed_int(s, 11, 2, t.hour) || s[13] != ':' ||
        !detail::parse_fixed_int(s, 14, 2, t.minute)) {
        return std::nullopt;
    }
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!detail::parse_fixed_int(s, pos + 1, 2, t.second)) {
            return std::nullopt;
        }
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                ++pos;
            }
        }
    }
    if (pos < s.size() && s[pos] == 'Z') {
        ++pos;
    }
    if (pos != s.size()) {
        return std::nullopt;
    }
    t.month = static_cast<unsigned>(month);
    t.day = static_cast<unsigned>(day);
    if (!t.valid()) {
        return std::nullopt;
    }
    return t;
}

/**
 * @brief Convert epoch seconds to civil time in an IANA zone.
 *
 * Goes through the C library's TZ machinery, so it is not thread-safe;
 * ingestion is single-threaded.
 */
inline std::optional<CivilTime> epoch_to_civil(std::int64_t epoch_s, const std::string &zone) {
    if (zone.empty() || zone.find("..") != std::string::npos) {
        return std::nullopt;
    }
    if (zone != "UTC" && !std::ifstream("/usr/share/zoneinfo/" + zone)) {
        return std::nullopt;
    }
    const char *old = std::getenv("TZ");
    const std::string saved = old ? old : "";
    setenv("TZ", zone.c_str(), 1);
    tzset();
    const std::time_t tt = static_cast<std::time_t>(epoch_s);
    std::tm tm{};
    const bool ok = localtime_r(&tt, &tm) != nullptr;
    if (old) {
        setenv("TZ", saved.c_str(), 1);
    } else {
        unsetenv("TZ");
    }
    tzset();
    if (!ok) {
        return std::nullopt;
    }
    return CivilTime{tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1), static_cast<unsigned>(tm.tm_mday),
                     tm.tm_hour, tm.tm_min, tm.tm_sec};
}

/**
 * @brief Parse delimiter-separated check-in lines.
 *
 * Blank lines are skipped. Invalid lines are collected in `rejects`; if more
 * than 10% of the data lines are rejected the mapping is assumed to be wrong
 * and an input error is raised.
 */
inline ParseResult parse_checkins(std::istream &in, const FieldMapping &map) {
    ParseResult result;
    char delim = map.delimiter;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = map.header;
    const int needed = std::max({map.user, map.item, map.timestamp, map.lat, map.lon, map.zone});
    if (map.format == TimestampFormat::epoch_with_zone && map.zone < 0) {
        fail(ErrorKind::config, "epoch timestamps need a zone column in the field mapping");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        if (delim == '\0') {
            delim = line.find('\t') != std::string::npos ? '\t' : ',';
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        ++result.lines;
        const auto fields = detail::split_fields(line, delim);
        auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };
        if (static_cast<int>(fields.size()) <= needed) {
            reject("expected at least " + std::to_string(needed + 1) + " fields, got " + std::to_string(fields.size()));
            continue;
        }
        CheckinRecord rec;
        rec.user_id = std::string(detail::trim(fields[static_cast<std::size_t>(map.user)]));
        rec.item_id = std::string(detail::trim(fields[static_cast<std::size_t>(map.item)]));
        if (rec.user_id.empty() || rec.item_id.empty()) {
            reject("empty user or item id");
            continue;
        }
        const auto lat = detail::parse_number(detail::trim(fields[static_cast<std::size_t>(map.lat)]));
        const auto lon = detail::parse_number(detail::trim(fields[static_cast<std::size_t>(map.lon)]));
        if (!lat) {
            reject("latitude not a number");
            continue;
        }
        if (!lon) {
            reject("longitude not a number");
            continue;
        }
        if (*lat < -90.0 || *lat > 90.0) {
            reject("latitude out of range");
            continue;
        }
        if (*lon < -180.0 || *lon > 180.0) {
            reject("longitude out of range");
            continue;
        }
        rec.latitude = *lat;
        rec.longitude = *lon;
        const std::string_view ts = detail::trim(fields[static_cast<std::size_t>(map.timestamp)]);
        std::optional<CivilTime> when;
        if (map.format == TimestampFormat::iso) {
            when = parse_iso_civil(ts);
        } else {
            const auto secs = detail::parse_number(ts);
            if (secs) {
                when = epoch_to_civil(static_cast<std::int64_t>(*secs),
                                      std::string(detail::trim(fields[static_cast<std::size_t>(map.zone)])));
            }
        }
        if (!when) {
            reject("unparseable timestamp");
            continue;
        }
        rec.local_time = *when;
        result.records.push_back(std::move(rec));
    }
    if (result.lines > 0 && result.rejects.size() * 10 > result.lines) {
        fail(ErrorKind::input, std::to_string(result.rejects.size()) + " of " + std::to_string(result.lines) +
                                   " lines rejected (first: line " + std::to_string(result.rejects.front().line_no) +
                                   ": " + result.rejects.front().reason + "); check the field mapping");
    }
    return result;
}

/**
 * @brief Iteratively drop users and items with fewer than @p k distinct
 *        interactions until every survivor has at least @p k.
 *
 * Records are kept in input order. k = 0 and k = 1 return the input unchanged.
 */
inline std::vector<CheckinRecord> kcore_filter(const std::vector<CheckinRecord> &records, std::size_t k) {
    if (k <= 1) {
        return records;
    }
    std::unordered_map<std::string, std::uint32_t> user_ix;
    std::unordered_map<std::string, std::uint32_t> item_ix;
    std::vector<std::uint32_t> rec_user(records.size());
    std::vector<std::uint32_t> rec_item(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        rec_user[r] = user_ix.try_emplace(records[r].user_id, static_cast<std::uint32_t>(user_ix.size())).first->second;
        rec_item[r] = item_ix.try_emplace(records[r].item_id, static_cast<std::uint32_t>(item_ix.size())).first->second;
    }
    const std::size_t n_users = user_ix.size();
    const std::size_t n_nodes = n_users + item_ix.size();

    // distinct bipartite adjacency over user nodes [0, n) and item nodes [n, n+m)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        pairs.emplace_back(rec_user[r], static_cast<std::uint32_t>(n_users + rec_item[r]));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    std::vector<std::vector<std::uint32_t>> adj(n_nodes);
    for (const auto &[u, i] : pairs) {
        adj[u].push_back(i);
        adj[i].push_back(u);
    }
    std::vector<std::size_t> degree(n_nodes);
    std::vector<bool> removed(n_nodes, false);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < n_nodes; ++v) {
        degree[v] = adj[v].size();
        if (degree[v] < k) {
            removed[v] = true;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t w : adj[v]) {
            if (!removed[w] && --degree[w] < k) {
                removed[w] = true;
                queue.push_back(w);
            }
        }
    }
    std::vector<CheckinRecord> out;
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (!removed[rec_user[r]] && !removed[n_users + rec_item[r]]) {
            out.push_back(records[r]);
        }
    }
    if (out.empty()) {
        fail(ErrorKind::input, "k-core eliminated all data (k=" + std::to_string(k) + ")");
    }
    return out;
}

struct SplitConfig {
    double train_ratio = 0.70;
    std::uint64_t seed = 2024;
    std::size_t min_interactions = 5;
    std::size_t kcore = 0;
};

enum class SplitTag : std::uint8_t { train, test };

/// One collapsed (user, item) edge; `slots` keeps one entry per raw check-in.
struct Interaction {
    std::uint32_t user = 0;
    std::uint32_t item = 0;
    std::vector<std::uint8_t> slots;
    SplitTag split = SplitTag::train;
};

/// Indexed check-in data. Immutable once built.
struct Dataset {
    std::vector<std::string> user_ids;
    std::vector<std::string> item_ids;
    std::vector<GeoPoint> item_coords;
    std::vector<Interaction> interactions;
    SplitConfig config;

    [[nodiscard]] std::size_t n_users() const noexcept { return user_ids.size(); }
    [[nodiscard]] std::size_t n_items() const noexcept { return item_ids.size(); }

    /// Sorted train items per user.
    [[nodiscard]] std::vector<std::vector<std::uint32_t>> items_by_user(SplitTag tag) const {
        std::vector<std::vector<std::uint32_t>> out(n_users());
        for (const Interaction &x : interactions) {
            if (x.split == tag) {
                out[x.user].push_back(x.item);
            }
        }
        for (auto &v : out) {
            std::sort(v.begin(), v.end());
        }
        return out;
    }

    [[nodiscard]] std::size_t count(SplitTag tag) const {
        return static_cast<std::size_t>(std::count_if(interactions.begin(), interactions.end(),
                                                      [tag](const Interaction &x) { return x.split == tag; }));
    }
};

/**
 * @brief Index filtered records and split each user's items into train/test.
 *
 * Steps: drop users with fewer than `min_interactions` distinct items, apply
 * the k-core filter, assign dense ids in first-appearance order, collapse
 * repeat check-ins into one edge, and shuffle each user's edges with the
 * seeded generator taking round(ratio * n) (at least one) for training.
 * An item whose every edge landed in test has its first such edge moved to
 * train, so every indexed entity is seen during training.
 */
inline Dataset build_dataset(const std::vector<CheckinRecord> &raw, const SplitConfig &cfg) {
    if (!(cfg.train_ratio > 0.0 && cfg.train_ratio < 1.0)) {
        fail(ErrorKind::config, "train_ratio must lie in (0, 1)");
    }
    std::vector<CheckinRecord> records;
    {
        std::unordered_map<std::string, std::vector<std::string>> items_of;
        for (const CheckinRecord &r : raw) {
            items_of[r.user_id].push_back(r.item_id);
        }
        std::unordered_map<std::string, std::size_t> distinct;
        for (auto &[user, items] : items_of) {
            std::sort(items.begin(), items.end());
            distinct[user] = static_cast<std::size_t>(std::unique(items.begin(), items.end()) - items.begin());
        }
        for (const CheckinRecord &r : raw) {
            if (distinct[r.user_id] >= cfg.min_interactions) {
                records.push_back(r);
            }
        }
    }
    if (records.empty()) {
        fail(ErrorKind::input, "no check-ins left after the minimum-interaction filter");
    }
    if (cfg.kcore > 0) {
        records = kcore_filter(records, cfg.kcore);
    }

    Dataset ds;
    ds.config = cfg;
    std::unordered_map<std::string, std::uint32_t> user_ix;
    std::unordered_map<std::string, std::uint32_t> item_ix;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> edge_ix;
    std::vector<std::map<GeoPoint, std::pair<std::size_t, std::size_t>>> coord_votes;  // count, first-seen order
    std::size_t seen = 0;
    for (const CheckinRecord &r : records) {
        auto [uit, unew] = user_ix.try_emplace(r.user_id, static_cast<std::uint32_t>(ds.user_ids.size()));
        if (unew) {
            ds.user_ids.push_back(r.user_id);
        }
        auto [iit, inew] = item_ix.try_emplace(r.item_id, static_cast<std::uint32_t>(ds.item_ids.size()));
        if (inew) {
            ds.item_ids.push_back(r.item_id);
            coord_votes.emplace_back();
        }
        auto &vote = coord_votes[iit->second].try_emplace(GeoPoint{r.latitude, r.longitude}, 0, seen++).first->second;
        ++vote.first;
        auto [eit, enew] = edge_ix.try_emplace({uit->second, iit->second}, ds.interactions.size());
        if (enew) {
            ds.interactions.push_back({uit->second, iit->second, {}, SplitTag::train});
        }
        ds.interactions[eit->second].slots.push_back(static_cast<std::uint8_t>(to_slot(r.local_time)));
    }
    ds.item_coords.resize(ds.item_ids.size());
    for (std::size_t i = 0; i < coord_votes.size(); ++i) {
        const auto best = std::max_element(coord_votes[i].begin(), coord_votes[i].end(), [](const auto &a, const auto &b) {
            return a.second.first != b.second.first ? a.second.first < b.second.first : a.second.second > b.second.second;
        });
        ds.item_coords[i] = best->first;
    }

    std::vector<std::vector<std::size_t>> by_user(ds.n_users());
    for (std::size_t e = 0; e < ds.interactions.size(); ++e) {
        by_user[ds.interactions[e].user].push_back(e);
    }
    Rng rng(cfg.seed);
    for (auto &edges : by_user) {
        for (std::size_t k = edges.size(); k > 1; --k) {
            std::swap(edges[k - 1], edges[uniform_index(rng, k)]);
        }
        const auto n = static_cast<double>(edges.size());
        const std::size_t n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.train_ratio * n)),
                                                            1, edges.size());
        for (std::size_t k = 0; k < edges.size(); ++k) {
            ds.interactions[edges[k]].split = k < n_train ? SplitTag::train : SplitTag::test;
        }
    }
    std::vector<bool> item_has_train(ds.n_items(), false);
    for (const Interaction &x : ds.interactions) {
        if (x.split == SplitTag::train) {
            item_has_train[x.item] = true;
        }
    }
    for (Interaction &x : ds.interactions) {
        if (!item_has_train[x.item]) {
            x.split = SplitTag::train;
            item_has_train[x.item] = true;
        }
    }
    return ds;
}

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::size_t n_checkins = 0;  ///< raw check-ins
    std::size_t n_edges = 0;     ///< distinct (user, item) pairs
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double density_pct = 0.0;    ///< 100 * n_checkins / (n_users * n_items)
    std::size_t min_user_degree = 0;
    std::size_t min_item_degree = 0;
};

inline DatasetStats dataset_stats(const Dataset &ds) {
    DatasetStats s;
    s.n_users = ds.n_users();
    s.n_items = ds.n_items();
    s.n_edges = ds.interactions.size();
    std::vector<std::size_t> udeg(s.n_users, 0);
    std::vector<std::size_t> ideg(s.n_items, 0);
    for (const Interaction &x : ds.interactions) {
        s.n_checkins += x.slots.size();
        ++udeg[x.user];
        ++ideg[x.item];
        (x.split == SplitTag::train ? s.n_train : s.n_test) += 1;
    }
    if (s.n_users > 0 && s.n_items > 0) {
        s.density_pct = 100.0 * static_cast<double>(s.n_checkins) / (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
        s.min_user_degree = *std::min_element(udeg.begin(), udeg.end());
        s.min_item_degree = *std::min_element(ideg.begin(), ideg.end());
    }
    return s;
}

inline std::string format_stats_table(const std::string &name, const DatasetStats &s) {
    std::ostringstream os;
    os << "dataset\tusers\titems\tcheckins\tedges\ttrain\ttest\tdensity_pct\n";
    char density[32];
    std::snprintf(density, sizeof(density), "%.3f", s.density_pct);
    os << name << '\t' << s.n_users << '\t' << s.n_items << '\t' << s.n_checkins << '\t' << s.n_edges << '\t'
       << s.n_train << '\t' << s.n_test << '\t' << density << '\n';
    return os.str();
}

// --- SEPDATA1 snapshot -----------------------------------------------------
//
// SEPDATA1
// config <train_ratio> <seed> <min_interactions> <kcore>
// users <n>            then n lines: <user_id>
// items <m>            then m lines: <item_id>\t<lat>\t<lon>
// interactions <e>     then e lines: <user>\t<item>\t<train|test>\t<slot,slot,...>
// end

[[noreturn]] inline void snapshot_error(const std::string &what) { fail(ErrorKind::input, "snapshot: " + what); }

inline void write_snapshot(std::ostream &os, const Dataset &ds) {
    os << "SEPDATA1\n";
    os << "config " << format_double(ds.config.train_ratio) << ' ' << ds.config.seed << ' '
       << ds.config.min_interactions << ' ' << ds.config.kcore << '\n';
    os << "users " << ds.n_users() << '\n';
    for (const std::string &u : ds.user_ids) {
        os << u << '\n';
    }
    os << "items " << ds.n_items() << '\n';
    for (std::size_t i = 0; i < ds.n_items(); ++i) {
        os << ds.item_ids[i] << '\t' << format_double(ds.item_coords[i].lat) << '\t'
           << format_double(ds.item_coords[i].lon) << '\n';
    }
    os << "interactions " << ds.interactions.size() << '\n';
    for (const Interaction &x : ds.interactions) {
        os << x.user << '\t' << x.item << '\t' << (x.split == SplitTag::train ? "train" : "test") << '\t';
        for (std::size_t k = 0; k < x.slots.size(); ++k) {
            os << (k ? "," : "") << static_cast<int>(x.slots[k]);
        }
        os << '\n';
    }
    os << "end\n";
}

inline std::string snapshot_bytes(const Dataset &ds) {
    std::ostringstream os;
    write_snapshot(os, ds);
    return os.str();
}

inline Dataset read_snapshot(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != "SEPDATA1") {
        snapshot_error("missing SEPDATA1 header");
    }
    Dataset ds;
    auto section = [&](const char *name) {
        if (!std::getline(is, line)) {
            snapshot_error(std::string("truncated before '") + name + "'");
        }
        std::istringstream ls(line);
        std::string tag;
        std::size_t n = 0;
        if (!(ls >> tag >> n) || tag != name) {
            snapshot_error(std::string("expected '") + name + "' section");
        }
        return n;
    };
    {
        if (!std::getline(is, line)) {
            snapshot_error("truncated config");
        }
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag >> ds.config.train_ratio >> ds.config.seed >> ds.config.min_interactions >> ds.config.kcore) ||
            tag != "config") {
            snapshot_error("malformed config line");
        }
    }
    const std::size_t n_users = section("users");
    for (std::size_t u = 0; u < n_users; ++u) {
        if (!std::getline(is, line)) {
            snapshot_error("truncated users");
        }
        ds.user_ids.push_back(line);
    }
    const std::size_t n_items = section("items");
    for (std::size_t i = 0; i < n_items; ++i) {
        if (!std::getline(is, line)) {
            snapshot_error("truncated items");
        }
        const auto f = detail::split_fields(line, '\t');
        const auto lat = f.size() == 3 ? detail::parse_number(f[1]) : std::nullopt;
        const auto lon = f.size() == 3 ? detail::parse_number(f[2]) : std::nullopt;
        if (!lat || !lon) {
            snapshot_error("malformed item line " + std::to_string(i));
        }
        ds.item_ids.emplace_back(f[0]);
        ds.item_coords.push_back({*lat, *lon});
    }
    const std::size_t n_inter = section("interactions");
    ds.interactions.reserve(n_inter);
    for (std::size_t e = 0; e < n_inter; ++e) {
        if (!std::getline(is, line)) {
            snapshot_error("truncated interactions");
        }
        const auto f = detail::split_fields(line, '\t');
        const auto u = f.size() == 4 ? detail::parse_number(f[0]) : std::nullopt;
        const auto i = f.size() == 4 ? detail::parse_number(f[1]) : std::nullopt;
        if (!u || !i || *u < 0 || *i < 0 || *u >= static_cast<double>(n_users) || *i >= static_cast<double>(n_items) ||
            (f[2] != "train" && f[2] != "test")) {
            snapshot_error("malformed interaction line " + std::to_string(e));
        }
        Interaction x{static_cast<std::uint32_t>(*u), static_cast<std::uint32_t>(*i), {},
                      f[2] == "train" ? SplitTag::train : SplitTag::test};
        for (std::string_view s : detail::split_fields(f[3], ',')) {
            const auto slot = detail::parse_number(s);
            if (!slot || *slot < 0 || *slot > 167) {
                snapshot_error("bad slot on interaction line " + std::to_string(e));
            }
            x.slots.push_back(static_cast<std::uint8_t>(*slot));
        }
        ds.interactions.push_back(std::move(x));
    }
    if (!std::getline(is, line) || line != "end") {
        snapshot_error("missing end marker");
    }
    return ds;
}

}  // namespace sepgcn
