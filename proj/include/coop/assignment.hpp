// Minimum-cost one-to-one assignment (Hungarian algorithm with potentials).
#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

namespace coop::assignment {

constexpr double kForbidden = 1e12;

// Square cost matrix, row-major. Returns col index assigned to each row.
// O(n^3), exact.
inline std::vector<int> solve(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != n) throw std::invalid_argument("cost matrix not square");
    }
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials, way[] per standard e-maxx formulation.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

inline double total_cost(const std::vector<std::vector<double>>& cost,
                         const std::vector<int>& row_to_col) {
    double s = 0.0;
    for (std::size_t i = 0; i < row_to_col.size(); ++i) s += cost[i][row_to_col[i]];
    return s;
}

}  // namespace coop::assignment
