#pragma once

// Training data preparation: per-day statistics, normalization against the
// day-ahead profile, forecast errors, the inverse mapping back to MW,
// seasonal labels and the train/test split. Also reads the load CSV and
// reads/writes the dataset bundle directory.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "oascen/csv.hpp"
#include "oascen/errors.hpp"
#include "oascen/fields.hpp"
#include "oascen/grid.hpp"

namespace oascen {

/// Seasonal class: quarter of the year, 0..3.
using Label = int;
inline constexpr int kQuarterLabels = 4;

/// One day of DA forecast and RT actual net load, nodes x hours in grid order.
struct DaySample {
    std::string date;  // YYYY-MM-DD
    Eigen::MatrixXd da;
    Eigen::MatrixXd rt;
    Label label{0};

    [[nodiscard]] Eigen::Index nodes() const { return da.rows(); }
    [[nodiscard]] Eigen::Index hours() const { return da.cols(); }
    [[nodiscard]] NetLoadProfile da_profile() const { return {da}; }
    [[nodiscard]] NetLoadProfile rt_profile() const { return {rt}; }
};

struct DayStats {
    Eigen::VectorXd da_min, da_ave, da_max;

    [[nodiscard]] Eigen::VectorXd range() const { return da_max - da_min; }
};

struct NormalizedDay {
    Eigen::MatrixXd da_norm, rt_norm;
};

/// How a normalized error maps back to load. RoundTrip inverts
/// forecast_error exactly (d = DA - eps*range); PaperPlus is the printed
/// form d = DA + eps*range.
enum class SignMode { PaperPlus, RoundTrip };

inline const char* to_string(SignMode m) { return m == SignMode::RoundTrip ? "roundtrip" : "paperplus"; }

inline SignMode parse_sign_mode(const std::string& s) {
    if (s == "roundtrip") return SignMode::RoundTrip;
    if (s == "paperplus") return SignMode::PaperPlus;
    throw ConfigError("unknown sign mode '" + s + "' (expected roundtrip or paperplus)");
}

/// d(load)/d(eps) for one node under `sign`.
inline double load_per_error(SignMode sign, double range) { return sign == SignMode::RoundTrip ? -range : range; }

inline void check_sample(const DaySample& s) {
    if (s.da.rows() != s.rt.rows() || s.da.cols() != s.rt.cols())
        throw DimensionMismatch("day " + s.date + ": DA and RT shapes differ");
    if (s.da.size() == 0) throw ValidationError("day " + s.date + ": empty sample");
    if (!s.da.allFinite() || !s.rt.allFinite()) throw ValidationError("day " + s.date + ": non-finite load");
}

inline DayStats day_stats(const DaySample& s) {
    check_sample(s);
    DayStats st;
    st.da_min = s.da.rowwise().minCoeff();
    st.da_max = s.da.rowwise().maxCoeff();
    st.da_ave = s.da.rowwise().mean();
    for (Eigen::Index i = 0; i < s.nodes(); ++i) {
        if (!(st.da_max[i] > st.da_min[i]))
            throw DegenerateDay("day " + s.date + ": flat DA profile at node index " + std::to_string(i));
        // the mean can drift an ulp outside [min, max] on near-constant rows
        st.da_ave[i] = std::clamp(st.da_ave[i], st.da_min[i], st.da_max[i]);
    }
    return st;
}

inline NormalizedDay normalize_day(const DaySample& s, const DayStats& st) {
    check_sample(s);
    if (st.da_min.size() != s.nodes()) throw DimensionMismatch("normalize_day: stats/sample node count differ");
    const Eigen::VectorXd range = st.range();
    if ((range.array() <= 0.0).any()) throw DegenerateDay("day " + s.date + ": zero DA range");
    // (x - ave)/range evaluated as (x - min)/range - c: the DA extremes map to
    // exactly 0 and 1 before the shift, and snapping c to a multiple of 2^-53
    // keeps both shifted extremes exact, so the DA row spans exactly 1.
    Eigen::VectorXd c(s.nodes());
    for (Eigen::Index i = 0; i < s.nodes(); ++i)
        c[i] = std::ldexp(std::round(std::ldexp((st.da_ave[i] - st.da_min[i]) / range[i], 53)), -53);
    NormalizedDay n;
    n.da_norm = ((s.da.colwise() - st.da_min).array().colwise() / range.array()).colwise() - c.array();
    n.rt_norm = ((s.rt.colwise() - st.da_min).array().colwise() / range.array()).colwise() - c.array();
    return n;
}

inline ErrorField forecast_error(const Eigen::MatrixXd& da_norm, const Eigen::MatrixXd& rt_norm) {
    if (da_norm.rows() != rt_norm.rows() || da_norm.cols() != rt_norm.cols())
        throw DimensionMismatch("forecast_error: shapes differ");
    return {da_norm - rt_norm, ErrorKind::Normalized};
}

inline ErrorField forecast_error(const NormalizedDay& n) { return forecast_error(n.da_norm, n.rt_norm); }

/// Normalized error of a whole day in one call.
inline ErrorField day_error(const DaySample& s) { return forecast_error(normalize_day(s, day_stats(s))); }

inline NetLoadProfile denormalize_error(const ErrorField& eps, const DaySample& s, const DayStats& st,
                                        SignMode sign = SignMode::RoundTrip) {
    eps.require(ErrorKind::Normalized, "denormalize_error");
    if (eps.nodes() != s.nodes() || eps.hours() != s.hours())
        throw DimensionMismatch("denormalize_error: error field shape differs from sample");
    Eigen::VectorXd scale = st.range();
    if (sign == SignMode::RoundTrip) scale = -scale;
    NetLoadProfile d;
    d.mw = s.da + (eps.values.array().colwise() * scale.array()).matrix();
    return d;
}

/// The error in MW relative to the DA profile, as consumed by the reserve OPF.
inline ErrorField physical_error(const ErrorField& eps, const DaySample& s, const DayStats& st,
                                 SignMode sign = SignMode::RoundTrip) {
    return {denormalize_error(eps, s, st, sign).mw - s.da, ErrorKind::PhysicalMW};
}

inline std::chrono::year_month_day parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char a = 0, b = 0;
    std::istringstream in(text);
    if (text.size() != 10 || !(in >> y >> a >> m >> b >> d) || a != '-' || b != '-')
        throw ParseError("invalid date '" + text + "' (expected YYYY-MM-DD)");
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + text + "'");
    return ymd;
}

inline Label assign_label(const std::string& date) {
    const auto month = static_cast<unsigned>(parse_date(date).month());
    return static_cast<Label>((month - 1) / 3);
}

struct Split {
    std::vector<DaySample> train, test;
};

/// Random disjoint split; both halves keep the input order.
inline Split split_dataset(const std::vector<DaySample>& samples, std::size_t n_train, std::uint64_t seed) {
    if (n_train >= samples.size())
        throw InsufficientData("split_dataset: n_train=" + std::to_string(n_train) + " leaves no test days out of " +
                               std::to_string(samples.size()));
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<bool> is_train(samples.size(), false);
    for (std::size_t k = 0; k < n_train; ++k) is_train[idx[k]] = true;
    Split out;
    for (std::size_t k = 0; k < samples.size(); ++k) (is_train[k] ? out.train : out.test).push_back(samples[k]);
    return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

struct IngestReport {
    std::vector<DaySample> days;  // sorted by date
    std::vector<std::string> dropped_incomplete;
    std::vector<std::string> dropped_flat;
};

/// Builds day samples from rows `date,zone,hour,da_mw,rt_mw` (hour 1..horizon).
/// Incomplete or flat days are dropped and reported.
inline IngestReport ingest_load_table(const csv::Table& t, const GridModel& grid, int horizon = 24) {
    if (horizon < 1) throw ConfigError("horizon must be positive");
    const auto c_date = t.column("date"), c_zone = t.column("zone"), c_hour = t.column("hour"),
               c_da = t.column("da_mw"), c_rt = t.column("rt_mw");
    if (t.rows.empty()) throw InsufficientData("load csv has no data rows");
    const auto N = static_cast<Eigen::Index>(grid.num_nodes());

    struct Partial {
        Eigen::MatrixXd da, rt;
        std::vector<bool> seen;
        std::size_t count{0};
    };
    std::map<std::string, Partial> days;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = "load csv line " + std::to_string(t.line_numbers[r]);
        const std::string& date = row[c_date];
        parse_date(date);
        if (!grid.has_node(row[c_zone])) throw UnknownNode(where + ": zone '" + row[c_zone] + "' not in grid");
        const auto i = static_cast<Eigen::Index>(grid.node_index(row[c_zone]));
        const auto hour = csv::to_int(row[c_hour], where);
        if (hour < 1 || hour > horizon)
            throw ValidationError(where + ": hour " + std::to_string(hour) + " outside 1.." + std::to_string(horizon));
        auto& p = days[date];
        if (p.seen.empty()) {
            p.da = Eigen::MatrixXd::Zero(N, horizon);
            p.rt = Eigen::MatrixXd::Zero(N, horizon);
            p.seen.assign(static_cast<std::size_t>(N * horizon), false);
        }
        const auto t_idx = static_cast<Eigen::Index>(hour - 1);
        const auto slot = static_cast<std::size_t>(i * horizon + t_idx);
        if (p.seen[slot]) throw ValidationError(where + ": duplicate row for " + date + "/" + row[c_zone]);
        p.seen[slot] = true;
        ++p.count;
        p.da(i, t_idx) = csv::to_double(row[c_da], where);
        p.rt(i, t_idx) = csv::to_double(row[c_rt], where);
    }

    IngestReport rep;
    for (auto& [date, p] : days) {
        if (p.count != p.seen.size()) {
            rep.dropped_incomplete.push_back(date);
            continue;
        }
        DaySample s{date, std::move(p.da), std::move(p.rt), assign_label(date)};
        try {
            (void)day_stats(s);
        } catch (const DegenerateDay&) {
            rep.dropped_flat.push_back(date);
            continue;
        }
        rep.days.push_back(std::move(s));
    }
    return rep;
}

inline IngestReport ingest_load_csv(const std::string& path, const GridModel& grid, int horizon = 24) {
    return ingest_load_table(csv::read(path), grid, horizon);
}

/// Writes samples as `date,zone,hour,da_mw,rt_mw`.
inline csv::Writer samples_csv(const std::vector<DaySample>& days, const GridModel& grid) {
    csv::Writer w({"date", "zone", "hour", "da_mw", "rt_mw"});
    for (const auto& s : days)
        for (Eigen::Index i = 0; i < s.nodes(); ++i)
            for (Eigen::Index t = 0; t < s.hours(); ++t)
                w.add(s.date, grid.nodes()[static_cast<std::size_t>(i)], t + 1, s.da(i, t), s.rt(i, t));
    return w;
}

// ---------------------------------------------------------------------------
// Keyed error-field CSV: `<key>,zone,hour,eps`

struct KeyedField {
    std::string key;
    Eigen::MatrixXd values;
};

inline csv::Writer fields_csv(const std::string& key_column, const std::vector<KeyedField>& fields,
                              const GridModel& grid) {
    csv::Writer w({key_column, "zone", "hour", "eps"});
    for (const auto& f : fields)
        for (Eigen::Index i = 0; i < f.values.rows(); ++i)
            for (Eigen::Index t = 0; t < f.values.cols(); ++t)
                w.add(f.key, grid.nodes()[static_cast<std::size_t>(i)], t + 1, f.values(i, t));
    return w;
}

/// Parses a keyed field CSV; keys keep their first-appearance order and every
/// key must cover all nodes and hours.
inline std::vector<KeyedField> parse_fields(const csv::Table& t, const std::string& key_column, const GridModel& grid,
                                            int horizon) {
    const auto c_key = t.column(key_column), c_zone = t.column("zone"), c_hour = t.column("hour"),
               c_eps = t.column("eps");
    const auto N = static_cast<Eigen::Index>(grid.num_nodes());
    std::vector<KeyedField> out;
    std::map<std::string, std::size_t> pos;
    std::vector<std::vector<bool>> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = "error csv line " + std::to_string(t.line_numbers[r]);
        auto [it, fresh] = pos.emplace(row[c_key], out.size());
        if (fresh) {
            out.push_back({row[c_key], Eigen::MatrixXd::Zero(N, horizon)});
            seen.emplace_back(static_cast<std::size_t>(N * horizon), false);
        }
        if (!grid.has_node(row[c_zone])) throw UnknownNode(where + ": zone '" + row[c_zone] + "' not in grid");
        const auto i = static_cast<Eigen::Index>(grid.node_index(row[c_zone]));
        const auto hour = csv::to_int(row[c_hour], where);
        if (hour < 1 || hour > horizon)
            throw ValidationError(where + ": hour " + std::to_string(hour) + " outside 1.." + std::to_string(horizon));
        const auto slot = static_cast<std::size_t>(i * horizon + hour - 1);
        if (seen[it->second][slot]) throw ValidationError(where + ": duplicate entry");
        seen[it->second][slot] = true;
        out[it->second].values(i, static_cast<Eigen::Index>(hour - 1)) = csv::to_double(row[c_eps], where);
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        if (std::find(seen[k].begin(), seen[k].end(), false) != seen[k].end())
            throw ValidationError("error csv: key '" + out[k].key + "' does not cover every zone and hour");
    return out;
}

// ---------------------------------------------------------------------------
// Dataset bundle directory

struct DatasetBundle {
    std::vector<DaySample> train, test;

    [[nodiscard]] int horizon() const {
        const auto& any = train.empty() ? test : train;
        return any.empty() ? 0 : static_cast<int>(any.front().hours());
    }
};

namespace bundle_files {
inline constexpr const char* kSamples = "samples.csv";
inline constexpr const char* kErrors = "errors.csv";
inline constexpr const char* kStats = "stats.csv";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kSplit = "split.csv";
}  // namespace bundle_files

/// Writes samples, normalized errors, stats, labels and the split. Returns
/// the written file names (relative to `dir`).
inline std::vector<std::string> write_bundle(const DatasetBundle& b, const GridModel& grid, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());

    std::vector<DaySample> all = b.train;
    all.insert(all.end(), b.test.begin(), b.test.end());
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.date < y.date; });
    std::set<std::string> train_dates;
    for (const auto& s : b.train) train_dates.insert(s.date);

    std::vector<KeyedField> errs;
    csv::Writer stats({"date", "zone", "da_min", "da_ave", "da_max"});
    csv::Writer labels({"date", "label"});
    csv::Writer split({"date", "set"});
    for (const auto& s : all) {
        const auto st = day_stats(s);
        errs.push_back({s.date, forecast_error(normalize_day(s, st)).values});
        for (Eigen::Index i = 0; i < s.nodes(); ++i)
            stats.add(s.date, grid.nodes()[static_cast<std::size_t>(i)], st.da_min[i], st.da_ave[i], st.da_max[i]);
        labels.add(s.date, s.label);
        split.add(s.date, std::string(train_dates.count(s.date) ? "train" : "test"));
    }
    const fs::path root(dir);
    samples_csv(all, grid).save((root / bundle_files::kSamples).string());
    fields_csv("date", errs, grid).save((root / bundle_files::kErrors).string());
    stats.save((root / bundle_files::kStats).string());
    labels.save((root / bundle_files::kLabels).string());
    split.save((root / bundle_files::kSplit).string());
    return {bundle_files::kSamples, bundle_files::kErrors, bundle_files::kStats, bundle_files::kLabels,
            bundle_files::kSplit};
}

/// Reads a bundle back. The horizon is taken from the largest hour present.
inline DatasetBundle read_bundle(const std::string& dir, const GridModel& grid) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw IoError("bundle directory '" + dir + "' not found");
    auto samples = csv::read((root / bundle_files::kSamples).string());
    const auto c_hour = samples.column("hour");
    long long horizon = 0;
    for (std::size_t r = 0; r < samples.rows.size(); ++r)
        horizon = std::max(horizon, csv::to_int(samples.rows[r][c_hour], "bundle samples"));
    auto rep = ingest_load_table(samples, grid, static_cast<int>(horizon));
    if (!rep.dropped_incomplete.empty() || !rep.dropped_flat.empty())
        throw ValidationError("bundle '" + dir + "' contains invalid days");

    auto labels = csv::read((root / bundle_files::kLabels).string());
    std::map<std::string, Label> label_of;
    for (const auto& row : labels.rows)
        label_of[row[labels.column("date")]] = static_cast<Label>(csv::to_int(row[labels.column("label")], "labels"));
    auto split = csv::read((root / bundle_files::kSplit).string());
    std::map<std::string, std::string> set_of;
    for (const auto& row : split.rows) set_of[row[split.column("date")]] = row[split.column("set")];

    DatasetBundle b;
    for (auto& s : rep.days) {
        auto l = label_of.find(s.date);
        auto w = set_of.find(s.date);
        if (l == label_of.end() || w == set_of.end())
            throw ValidationError("bundle '" + dir + "': day " + s.date + " missing from labels or split");
        s.label = l->second;
        if (w->second == "train")
            b.train.push_back(std::move(s));
        else if (w->second == "test")
            b.test.push_back(std::move(s));
        else
            throw ValidationError("bundle '" + dir + "': unknown split set '" + w->second + "'");
    }
    return b;
}

}  // namespace oascen
