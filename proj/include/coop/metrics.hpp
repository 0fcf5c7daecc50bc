// GOSPA evaluation (alpha = 2 decomposition) plus switching error and
// whole-run reports for the three track systems.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop/assignment.hpp"

namespace coop::metrics {

struct GospaParams {
    double p = 2.0;   // order
    double c = 30.0;  // cutoff [m]
    // alpha fixed at 2: the decomposable case.
};

// Components are kept as raw p-th powers so that
// total^p == localization + missed + false_.
struct GospaBreakdown {
    double total = 0.0;
    double localization = 0.0;
    double missed = 0.0;
    double false_ = 0.0;
    double switching = 0.0;
};

struct GospaResult {
    GospaBreakdown breakdown;
    // assignment[i] = index into estimates matched to truth i, or -1.
    std::vector<int> assignment;
};

// GOSPA with alpha = 2: optimal one-to-one partial assignment minimizing
// sum of min(d, c)^p over pairs plus (c^p / 2) per unassigned element.
inline GospaResult gospa_with_assignment(const std::vector<Eigen::Vector2d>& estimates,
                                         const std::vector<Eigen::Vector2d>& truths,
                                         const GospaParams& gp) {
    if (gp.p < 1.0 || gp.c <= 0.0) throw std::invalid_argument("invalid GOSPA parameters");
    const int m = static_cast<int>(truths.size());
    const int n = static_cast<int>(estimates.size());
    const double cp = std::pow(gp.c, gp.p);
    const double half_cp = 0.5 * cp;

    GospaResult res;
    res.assignment.assign(m, -1);
    if (m == 0 && n == 0) return res;

    // Square (m+n) matrix: pairing block, per-element "unassigned" diagonal
    // blocks, zero dummy-dummy block.
    const int sz = m + n;
    std::vector<std::vector<double>> cost(sz, std::vector<double>(sz, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = (truths[i] - estimates[j]).norm();
            cost[i][j] = d < gp.c ? std::pow(d, gp.p) : assignment::kForbidden;
        }
        for (int j = 0; j < m; ++j) cost[i][n + j] = (i == j) ? half_cp : assignment::kForbidden;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) cost[m + i][j] = (i == j) ? half_cp : assignment::kForbidden;
    }
    const auto row_to_col = assignment::solve(cost);

    for (int i = 0; i < m; ++i) {
        const int j = row_to_col[i];
        if (j < n && cost[i][j] < assignment::kForbidden) {
            res.assignment[i] = j;
            res.breakdown.localization += cost[i][j];
        } else {
            res.breakdown.missed += half_cp;
        }
    }
    std::vector<char> est_used(n, false);
    for (int i = 0; i < m; ++i) {
        if (res.assignment[i] >= 0) est_used[res.assignment[i]] = true;
    }
    for (int j = 0; j < n; ++j) {
        if (!est_used[j]) res.breakdown.false_ += half_cp;
    }
    res.breakdown.total = std::pow(
        res.breakdown.localization + res.breakdown.missed + res.breakdown.false_, 1.0 / gp.p);
    return res;
}

inline GospaBreakdown gospa(const std::vector<Eigen::Vector2d>& estimates,
                            const std::vector<Eigen::Vector2d>& truths, const GospaParams& gp) {
    return gospa_with_assignment(estimates, truths, gp).breakdown;
}

// Identity churn between consecutive frames: a truth assigned in both frames
// but to a different track id counts once. Reappearance after an unassigned
// gap does not count.
inline double switching_error(const std::map<int, int>& prev_assignment,
                              const std::map<int, int>& cur_assignment, double penalty) {
    double err = 0.0;
    for (const auto& [truth_id, track_id] : cur_assignment) {
        auto it = prev_assignment.find(truth_id);
        if (it != prev_assignment.end() && it->second != track_id) err += penalty;
    }
    return err;
}

struct FrameEstimates {
    std::vector<int> track_ids;
    std::vector<Eigen::Vector2d> positions;
};

struct FrameTruth {
    std::vector<int> truth_ids;
    std::vector<Eigen::Vector2d> positions;
};

struct SystemSeries {
    std::string name;
    std::vector<GospaBreakdown> frames;
    double mean_total = 0.0;
    double mean_localization = 0.0;
    double mean_missed = 0.0;
    double mean_false = 0.0;
    double mean_switching = 0.0;
};

struct RunReport {
    std::vector<SystemSeries> systems;  // local, v2v, priority
    std::vector<std::string> verdicts;

    const SystemSeries& by_name(const std::string& name) const {
        for (const auto& s : systems) {
            if (s.name == name) return s;
        }
        throw std::out_of_range("unknown system: " + name);
    }
};

inline SystemSeries evaluate_system(const std::string& name,
                                    const std::vector<FrameEstimates>& snapshots,
                                    const std::vector<FrameTruth>& truth, const GospaParams& gp,
                                    double switch_penalty) {
    if (snapshots.size() != truth.size())
        throw std::invalid_argument("frame count mismatch between snapshots and truth");
    SystemSeries s;
    s.name = name;
    std::map<int, int> prev_assignment;
    for (std::size_t f = 0; f < snapshots.size(); ++f) {
        GospaResult r = gospa_with_assignment(snapshots[f].positions, truth[f].positions, gp);
        std::map<int, int> cur_assignment;
        for (std::size_t i = 0; i < r.assignment.size(); ++i) {
            if (r.assignment[i] >= 0) {
                cur_assignment[truth[f].truth_ids[i]] = snapshots[f].track_ids[r.assignment[i]];
            }
        }
        r.breakdown.switching = switching_error(prev_assignment, cur_assignment, switch_penalty);
        prev_assignment = std::move(cur_assignment);
        s.frames.push_back(r.breakdown);
    }
    const double n = static_cast<double>(s.frames.size());
    for (const auto& b : s.frames) {
        s.mean_total += b.total / n;
        s.mean_localization += b.localization / n;
        s.mean_missed += b.missed / n;
        s.mean_false += b.false_ / n;
        s.mean_switching += b.switching / n;
    }
    return s;
}

inline RunReport evaluate_run(const std::vector<FrameEstimates>& local,
                              const std::vector<FrameEstimates>& v2v,
                              const std::vector<FrameEstimates>& priority,
                              const std::vector<FrameTruth>& truth, const GospaParams& gp,
                              double switch_penalty) {
    RunReport rep;
    rep.systems.push_back(evaluate_system("local", local, truth, gp, switch_penalty));
    rep.systems.push_back(evaluate_system("v2v", v2v, truth, gp, switch_penalty));
    rep.systems.push_back(evaluate_system("priority", priority, truth, gp, switch_penalty));

    const auto& l = rep.systems[0];
    const auto& v = rep.systems[1];
    const auto& p = rep.systems[2];
    auto verdict = [&](const std::string& text, bool ok) {
        rep.verdicts.push_back(std::string(ok ? "PASS " : "FAIL ") + text);
    };
    verdict("mean GOSPA ordering v2v < priority < local",
            v.mean_total < p.mean_total && p.mean_total < l.mean_total);
    verdict("missed: v2v mean == 0 and priority < local",
            v.mean_missed == 0.0 && p.mean_missed < l.mean_missed);
    verdict("false: v2v mean == 0 and priority < local",
            v.mean_false == 0.0 && p.mean_false < l.mean_false);
    verdict("switching: all systems mean == 0",
            l.mean_switching == 0.0 && v.mean_switching == 0.0 && p.mean_switching == 0.0);
    return rep;
}

inline std::string report_csv(const RunReport& rep) {
    std::ostringstream os;
    os << "frame,system,total,localization,missed,false,switching\n";
    char buf[256];
    for (const auto& s : rep.systems) {
        for (std::size_t f = 0; f < s.frames.size(); ++f) {
            const auto& b = s.frames[f];
            std::snprintf(buf, sizeof(buf), "%zu,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", f,
                          s.name.c_str(), b.total, b.localization, b.missed, b.false_,
                          b.switching);
            os << buf;
        }
    }
    return os.str();
}

inline std::string report_summary(const RunReport& rep) {
    std::ostringstream os;
    char buf[256];
    os << "system means (total, localization, missed, false, switching)\n";
    for (const auto& s : rep.systems) {
        std::snprintf(buf, sizeof(buf), "%-9s %.4f %.4f %.4f %.4f %.4f\n", s.name.c_str(),
                      s.mean_total, s.mean_localization, s.mean_missed, s.mean_false,
                      s.mean_switching);
        os << buf;
    }
    for (const auto& v : rep.verdicts) os << v << "\n";
    return os.str();
}

}  // namespace coop::metrics
