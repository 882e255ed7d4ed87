#pragma once

// Accuracy tables from prediction logs, deviations from the disk baseline,
// augmentation gains and Kendall rank correlation between model rankings.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "kernel.hpp"

namespace opticsbench {

inline constexpr const char* kCleanName = "clean";

struct PredictionRow {
    std::string image;
    std::string corruption;  // corruption name, or "clean" with severity 0
    int severity = 0;
    std::string truth;
    std::string pred;
};

struct PredictionLog {
    std::string model;
    std::vector<PredictionRow> rows;
};

inline PredictionLog parse_prediction_log(std::istream& is, std::string model) {
    PredictionLog log{std::move(model), {}};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw FormatError("empty prediction log", 0);
    ++line_no;
    const auto header = split_csv_line(line);
    if (header != std::vector<std::string>{"image", "corruption", "severity", "true", "pred"})
        throw FormatError("prediction log header must be image,corruption,severity,true,pred", 0);
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 5) throw FormatError("line " + std::to_string(line_no) + ": expected 5 fields", line_no);
        const auto sev = parse_integer(f[2]);
        if (!sev || *sev < 0 || *sev > kSeverities)
            throw FormatError("line " + std::to_string(line_no) + ": bad severity '" + f[2] + "'", line_no);
        if ((f[1] == kCleanName) != (*sev == 0))
            throw FormatError("line " + std::to_string(line_no) + ": severity 0 is reserved for clean rows", line_no);
        log.rows.push_back({std::move(f[0]), std::move(f[1]), static_cast<int>(*sev), std::move(f[3]), std::move(f[4])});
    }
    return log;
}

// Model name defaults to the file stem.
inline PredictionLog read_prediction_log(const std::filesystem::path& path, std::string model = {}) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return parse_prediction_log(is, model.empty() ? path.stem().string() : std::move(model));
}

inline void write_prediction_log(std::ostream& os, const PredictionLog& log) {
    os << "image,corruption,severity,true,pred\n";
    for (const auto& r : log.rows)
        os << csv_field(r.image) << ',' << csv_field(r.corruption) << ',' << r.severity << ',' << csv_field(r.truth)
           << ',' << csv_field(r.pred) << '\n';
}

using Cell = std::pair<std::string, int>;  // (corruption, severity)

inline std::string cell_name(const Cell& c) { return c.first + "/" + std::to_string(c.second); }

inline double accuracy(const PredictionLog& log, const std::string& corruption, int severity) {
    std::size_t total = 0, correct = 0;
    for (const auto& r : log.rows)
        if (r.corruption == corruption && r.severity == severity) {
            ++total;
            correct += r.truth == r.pred;
        }
    if (total == 0) throw DomainError("no predictions for " + cell_name({corruption, severity}) + " in " + log.model);
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

inline double delta_vs_baseline(double acc_c, double acc_b) { return acc_c - acc_b; }

// Per-cell accuracies of every cell present in the log, in one pass.
inline std::map<Cell, double> accuracy_grid(const PredictionLog& log) {
    std::map<Cell, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& r : log.rows) {
        auto& [correct, total] = counts[{r.corruption, r.severity}];
        ++total;
        correct += r.truth == r.pred;
    }
    std::map<Cell, double> out;
    for (const auto& [cell, ct] : counts)
        out[cell] = 100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second);
    return out;
}

struct ScoreRow {
    double acc = 0.0;
    std::optional<double> baseline_acc;
    std::optional<double> delta;        // acc - baseline_acc
    std::optional<double> delta_clean;  // acc - clean_acc
};

struct ScoreTable {
    std::string model;
    std::string baseline = "defocus_blur";
    std::map<Cell, ScoreRow> cells;  // every corruption except clean and the baseline
    std::optional<double> clean_acc;
    std::map<int, double> baseline_acc;
};

inline ScoreTable score(const PredictionLog& log, const std::string& baseline = "defocus_blur") {
    ScoreTable t;
    t.model = log.model;
    t.baseline = baseline;
    const auto grid = accuracy_grid(log);
    for (const auto& [cell, acc] : grid) {
        if (cell.first == kCleanName) t.clean_acc = acc;
        else if (cell.first == baseline) t.baseline_acc[cell.second] = acc;
    }
    for (const auto& [cell, acc] : grid) {
        if (cell.first == kCleanName || cell.first == baseline) continue;
        ScoreRow row;
        row.acc = acc;
        if (auto it = t.baseline_acc.find(cell.second); it != t.baseline_acc.end()) {
            row.baseline_acc = it->second;
            row.delta = delta_vs_baseline(acc, it->second);
        }
        if (t.clean_acc) row.delta_clean = acc - *t.clean_acc;
        t.cells[cell] = row;
    }
    return t;
}

namespace detail {

inline std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline std::string fixed2(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

inline std::vector<const ScoreTable*> sorted_by_model(const std::vector<ScoreTable>& tables) {
    std::vector<const ScoreTable*> out;
    for (const auto& t : tables) out.push_back(&t);
    std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->model < b->model; });
    return out;
}

}  // namespace detail

// Machine-readable report, one row per (model, corruption, severity) plus one clean row
// per model. Ordering: corruption alphabetical, severity ascending, model alphabetical.
inline void write_score_csv(std::ostream& os, const std::vector<ScoreTable>& tables) {
    if (tables.empty()) throw ConfigError("no score tables to report");
    os << "model,corruption,severity,acc,baseline_acc,delta,delta_clean\n";
    const auto models = detail::sorted_by_model(tables);
    std::set<Cell> cells;
    for (auto* t : models)
        for (const auto& [cell, row] : t->cells) cells.insert(cell);
    for (const auto& cell : cells)
        for (auto* t : models) {
            auto it = t->cells.find(cell);
            if (it == t->cells.end()) continue;
            const auto& r = it->second;
            os << csv_field(t->model) << ',' << csv_field(cell.first) << ',' << cell.second << ','
               << format_number(r.acc) << ',' << detail::opt_number(r.baseline_acc) << ','
               << detail::opt_number(r.delta) << ',' << detail::opt_number(r.delta_clean) << '\n';
        }
    for (auto* t : models)
        if (t->clean_acc) os << csv_field(t->model) << ',' << kCleanName << ",0," << format_number(*t->clean_acc) << ",,,\n";
}

// Same content as the CSV, as an aligned table with two decimals.
inline void write_score_text(std::ostream& os, const std::vector<ScoreTable>& tables) {
    std::ostringstream csv;
    write_score_csv(csv, tables);
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv.str());
    std::string line;
    while (std::getline(in, line)) {
        auto f = split_csv_line(line);
        if (!rows.empty())
            for (std::size_t i = 3; i < f.size(); ++i)
                if (!f[i].empty()) f[i] = detail::fixed2(parse_number(f[i]));
        rows.push_back(std::move(f));
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            const std::string pad(width[i] - r[i].size(), ' ');
            os << (i < 2 ? r[i] + pad : pad + r[i]) << (i + 1 < r.size() ? "  " : "");
        }
        os << '\n';
    }
}

// Per severity, mean over corruptions of (augmented - plain) accuracy. Clean rows
// and the baseline corruption are not part of the benchmark grid.
inline std::map<int, double> gain_table(const PredictionLog& plain, const PredictionLog& augmented,
                                        const std::string& baseline = "defocus_blur") {
    auto grid_of = [&](const PredictionLog& log) {
        auto g = accuracy_grid(log);
        for (auto it = g.begin(); it != g.end();)
            it = (it->first.first == kCleanName || it->first.first == baseline) ? g.erase(it) : std::next(it);
        return g;
    };
    const auto a = grid_of(plain);
    const auto b = grid_of(augmented);
    for (const auto& [cell, v] : a)
        if (!b.count(cell)) throw DomainError("augmented log lacks " + cell_name(cell));
    for (const auto& [cell, v] : b)
        if (!a.count(cell)) throw DomainError("plain log lacks " + cell_name(cell));
    if (a.empty()) throw DomainError("logs contain no corruption cells");

    std::map<int, std::pair<double, int>> acc;
    for (const auto& [cell, v] : a) {
        auto& [sum, n] = acc[cell.second];
        sum += b.at(cell) - v;
        ++n;
    }
    std::map<int, double> out;
    for (const auto& [sev, sn] : acc) out[sev] = sn.first / sn.second;
    return out;
}

// One row per model with the per-severity gains, two decimals.
inline void write_gain_table(std::ostream& os, const std::vector<std::pair<std::string, std::map<int, double>>>& rows) {
    std::set<int> sevs;
    for (const auto& [m, g] : rows)
        for (const auto& [s, v] : g) sevs.insert(s);
    os << "model";
    for (int s : sevs) os << ',' << s;
    os << '\n';
    auto sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [m, g] : sorted) {
        os << csv_field(m);
        for (int s : sevs) {
            auto it = g.find(s);
            os << ',' << detail::fixed2(it == g.end() ? std::nullopt : std::optional<double>(it->second));
        }
        os << '\n';
    }
}

namespace detail {

inline std::uint64_t count_inversions(std::vector<int>& v, std::vector<int>& tmp, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

}  // namespace detail

// Kendall tau between two tie-free orderings of the same models.
// Discordant pairs are the inversions of b's positions read in a's order.
inline double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, int> pos_b;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!pos_b.emplace(b[i], static_cast<int>(i)).second) throw DomainError("duplicate model in ranking: " + b[i]);
    std::set<std::string> seen_a;
    std::vector<std::string> only_a, only_b;
    std::vector<int> seq;
    for (const auto& m : a) {
        if (!seen_a.insert(m).second) throw DomainError("duplicate model in ranking: " + m);
        auto it = pos_b.find(m);
        if (it == pos_b.end()) only_a.push_back(m);
        else seq.push_back(it->second);
    }
    for (const auto& m : b)
        if (!seen_a.count(m)) only_b.push_back(m);
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "rankings cover different models;";
        for (const auto& m : only_a) msg += " only in first: " + m + ";";
        for (const auto& m : only_b) msg += " only in second: " + m + ";";
        throw DomainError(msg);
    }
    const std::size_t n = seq.size();
    if (n < 2) throw DomainError("kendall tau needs at least two models");
    std::vector<int> tmp(n);
    const auto discordant = detail::count_inversions(seq, tmp, 0, n);
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
}

// Models ordered by accuracy on one cell, best first; ties broken by name.
inline std::vector<std::string> rank_models(const std::vector<ScoreTable>& tables, const Cell& cell) {
    std::vector<std::pair<double, std::string>> v;
    for (const auto& t : tables) {
        std::optional<double> acc;
        if (cell.first == t.baseline) {
            if (auto it = t.baseline_acc.find(cell.second); it != t.baseline_acc.end()) acc = it->second;
        } else if (cell.first == kCleanName) {
            acc = t.clean_acc;
        } else if (auto it = t.cells.find(cell); it != t.cells.end()) {
            acc = it->second.acc;
        }
        if (!acc) throw DomainError("model " + t.model + " has no accuracy for " + cell_name(cell));
        v.emplace_back(*acc, t.model);
    }
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    std::vector<std::string> out;
    for (auto& [acc, m] : v) out.push_back(std::move(m));
    return out;
}

// Models ordered by mean accuracy over all severities of one corruption.
inline std::vector<std::string> rank_models_aggregate(const std::vector<ScoreTable>& tables, const std::string& corruption) {
    std::vector<std::pair<double, std::string>> v;
    for (const auto& t : tables) {
        double sum = 0.0;
        int n = 0;
        if (corruption == t.baseline) {
            for (const auto& [s, acc] : t.baseline_acc) sum += acc, ++n;
        } else {
            for (const auto& [cell, row] : t.cells)
                if (cell.first == corruption) sum += row.acc, ++n;
        }
        if (n == 0) throw DomainError("model " + t.model + " has no accuracies for " + corruption);
        v.emplace_back(sum / n, t.model);
    }
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    std::vector<std::string> out;
    for (auto& [acc, m] : v) out.push_back(std::move(m));
    return out;
}

struct TauRow {
    std::string corruption;
    int severity = 0;  // 0 for the aggregate over severities
    double tau = 0.0;
};

// Rank correlation of each corruption's model ranking with the baseline's ranking,
// per (corruption, severity) cell, or per corruption over mean accuracy when aggregate.
inline std::vector<TauRow> kendall_vs_baseline(const std::vector<ScoreTable>& tables, bool aggregate = false) {
    if (tables.size() < 2) throw DomainError("ranking correlation needs at least two models");
    const std::string baseline = tables.front().baseline;
    std::set<Cell> cells;
    for (const auto& t : tables)
        for (const auto& [cell, row] : t.cells) cells.insert(cell);
    std::vector<TauRow> out;
    if (aggregate) {
        std::set<std::string> names;
        for (const auto& c : cells) names.insert(c.first);
        const auto base = rank_models_aggregate(tables, baseline);
        for (const auto& n : names) out.push_back({n, 0, kendall_tau(rank_models_aggregate(tables, n), base)});
    } else {
        for (const auto& cell : cells)
            out.push_back({cell.first, cell.second,
                           kendall_tau(rank_models(tables, cell), rank_models(tables, {baseline, cell.second}))});
    }
    return out;
}

}  // namespace opticsbench
