#include "supreme/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "supreme/error.hpp"

namespace supreme {

HungarianResult hungarian(const Matrix& cost) {
    for (double v : cost.data) {
        if (std::isnan(v)) throw ValidationError("hungarian: NaN cost");
        if (!std::isfinite(v)) throw ValidationError("hungarian: non-finite cost");
    }
    const std::size_t n = std::max(cost.rows, cost.cols);
    if (n == 0) throw ValidationError("hungarian: empty cost matrix");
    auto padded = [&](std::size_t i, std::size_t j) -> double {
        return (i < cost.rows && j < cost.cols) ? cost.at(i, j) : 0.0;
    };

    const double inf = std::numeric_limits<double>::infinity();
    // potentials over 1-based rows/columns; p[j] = row matched to column j
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = padded(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    HungarianResult res;
    res.assignment.assign(cost.rows, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        if (p[j] == 0) continue;
        const std::size_t row = p[j] - 1;
        if (row < cost.rows && j - 1 < cost.cols) {
            res.assignment[row] = static_cast<int>(j - 1);
            res.cost += cost.at(row, j - 1);
        } else if (row < cost.rows) {
            res.assignment[row] = -1;  // matched to a padded column
        }
    }
    return res;
}

NmiNorm parse_nmi_norm(const std::string& name) {
    if (name == "geometric") return NmiNorm::geometric;
    if (name == "arithmetic") return NmiNorm::arithmetic;
    if (name == "max") return NmiNorm::max;
    throw ValidationError("unknown nmi norm '" + name + "' (use geometric, arithmetic or max)");
}

namespace {

std::vector<std::vector<long>> contingency_table(const std::vector<int>& pred,
                                                 const std::vector<int>& truth) {
    if (pred.size() != truth.size()) {
        throw ValidationError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                              std::to_string(truth.size()) + " labels");
    }
    if (pred.empty()) throw ValidationError("metrics: empty partitions");
    int pmax = 0, tmax = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || truth[i] < 0) throw ValidationError("metrics: negative label");
        pmax = std::max(pmax, pred[i]);
        tmax = std::max(tmax, truth[i]);
    }
    std::vector<std::vector<long>> table(static_cast<std::size_t>(pmax) + 1,
                                         std::vector<long>(static_cast<std::size_t>(tmax) + 1, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++table[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
    }
    return table;
}

}  // namespace

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                           ClusterEvaluation* detail) {
    const auto table = contingency_table(pred, truth);
    const std::size_t rows = table.size();
    const std::size_t cols = table[0].size();
    long max_count = 0;
    for (const auto& row : table) {
        for (long c : row) max_count = std::max(max_count, c);
    }
    // maximise matched count == minimise (max - count)
    Matrix cost(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            cost.at(i, j) = static_cast<double>(max_count - table[i][j]);
        }
    }
    const HungarianResult match = hungarian(cost);
    long matched = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (match.assignment[i] >= 0) matched += table[i][static_cast<std::size_t>(match.assignment[i])];
    }
    const double acc = static_cast<double>(matched) / static_cast<double>(pred.size());
    if (detail) {
        detail->acc = acc;
        detail->contingency = table;
        detail->matching = match.assignment;
    }
    return acc;
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth, NmiNorm norm) {
    const auto table = contingency_table(pred, truth);
    const double n = static_cast<double>(pred.size());
    const std::size_t rows = table.size();
    const std::size_t cols = table[0].size();

    std::vector<long> row_sum(rows, 0), col_sum(cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
        }
    }
    double h_pred = 0.0, h_truth = 0.0, mutual = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_sum[i] == 0) continue;
        const double p = static_cast<double>(row_sum[i]) / n;
        h_pred -= p * std::log(p);
    }
    for (std::size_t j = 0; j < cols; ++j) {
        if (col_sum[j] == 0) continue;
        const double p = static_cast<double>(col_sum[j]) / n;
        h_truth -= p * std::log(p);
    }
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (table[i][j] == 0) continue;
            const double pij = static_cast<double>(table[i][j]) / n;
            const double pi = static_cast<double>(row_sum[i]) / n;
            const double pj = static_cast<double>(col_sum[j]) / n;
            mutual += pij * std::log(pij / (pi * pj));
        }
    }

    if (h_pred <= 0.0 && h_truth <= 0.0) return 1.0;  // both single-cluster, identical partitions
    if (h_pred <= 0.0 || h_truth <= 0.0) return 0.0;  // one side carries no information
    double denom = 0.0;
    switch (norm) {
        case NmiNorm::geometric: denom = std::sqrt(h_pred * h_truth); break;
        case NmiNorm::arithmetic: denom = 0.5 * (h_pred + h_truth); break;
        case NmiNorm::max: denom = std::max(h_pred, h_truth); break;
    }
    const double value = mutual / denom;
    return std::clamp(value, 0.0, 1.0);
}

ClusterEvaluation evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth,
                                      NmiNorm norm) {
    ClusterEvaluation eval;
    clustering_accuracy(pred, truth, &eval);
    eval.nmi = nmi(pred, truth, norm);
    return eval;
}

}  // namespace supreme
