#include "avground/assignment.hpp"

#include <algorithm>
#include <limits>

namespace avground {

namespace {

// Transposed view so both solvers can assume rows <= cols.
std::vector<std::vector<double>> transpose(const std::vector<std::vector<double>>& w) {
    size_t rows = w.size();
    size_t cols = rows == 0 ? 0 : w[0].size();
    std::vector<std::vector<double>> out(cols, std::vector<double>(rows));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) out[j][i] = w[i][j];
    }
    return out;
}

std::vector<int> invert(const std::vector<int>& col_to_row, size_t rows, size_t cols) {
    std::vector<int> row_to_col(rows, -1);
    for (size_t j = 0; j < cols; ++j) {
        if (col_to_row[j] >= 0) row_to_col[static_cast<size_t>(col_to_row[j])] = static_cast<int>(j);
    }
    return row_to_col;
}

// Depth-first enumeration of injections row -> column; rows <= cols.
void search(const std::vector<std::vector<double>>& w, size_t row, std::vector<int>& current,
            std::vector<bool>& used, double total, double& best_total,
            std::vector<int>& best) {
    if (row == w.size()) {
        if (total > best_total) {
            best_total = total;
            best = current;
        }
        return;
    }
    for (size_t j = 0; j < w[row].size(); ++j) {
        if (used[j]) continue;
        used[j] = true;
        current[row] = static_cast<int>(j);
        search(w, row + 1, current, used, total + w[row][j], best_total, best);
        used[j] = false;
    }
    current[row] = -1;
}

std::vector<int> exhaustive_rows_le_cols(const std::vector<std::vector<double>>& w) {
    std::vector<int> current(w.size(), -1);
    std::vector<int> best(w.size(), -1);
    std::vector<bool> used(w.empty() ? 0 : w[0].size(), false);
    double best_total = -std::numeric_limits<double>::infinity();
    search(w, 0, current, used, 0.0, best_total, best);
    return best;
}

// Hungarian method with potentials, minimizing cost; rows <= cols.
std::vector<int> hungarian_rows_le_cols(const std::vector<std::vector<double>>& weights) {
    int n = static_cast<int>(weights.size());
    int m = n == 0 ? 0 : static_cast<int>(weights[0].size());
    const double kInf = std::numeric_limits<double>::infinity();

    // 1-based cost matrix, negated weights.
    std::vector<std::vector<double>> a(n + 1, std::vector<double>(m + 1, 0.0));
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) a[i][j] = -weights[i - 1][j - 1];
    }

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = a[i0][j] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
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
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

template <typename Solver>
std::vector<int> solve(const std::vector<std::vector<double>>& w, Solver solver) {
    size_t rows = w.size();
    size_t cols = rows == 0 ? 0 : w[0].size();
    if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
    if (rows <= cols) return solver(w);
    return invert(solver(transpose(w)), rows, cols);
}

}  // namespace

namespace detail {

std::vector<int> assignment_exhaustive(const std::vector<std::vector<double>>& weights) {
    return solve(weights, exhaustive_rows_le_cols);
}

std::vector<int> assignment_hungarian(const std::vector<std::vector<double>>& weights) {
    return solve(weights, hungarian_rows_le_cols);
}

}  // namespace detail

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
    size_t rows = weights.size();
    size_t cols = rows == 0 ? 0 : weights[0].size();
    if (std::max(rows, cols) <= 8) return detail::assignment_exhaustive(weights);
    return detail::assignment_hungarian(weights);
}

}  // namespace avground
