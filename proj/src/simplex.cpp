#include "fermi/simplex.hpp"

#include <algorithm>
#include <unsupported/Eigen/MatrixFunctions>

namespace fermi {

double constrained_simplex_volume(double t, const std::vector<std::pair<double, double>>& windows) {
    const int n = int(windows.size());
    if (t <= 0.0) return n == 0 ? 1.0 : 0.0;
    std::vector<double> cuts{0.0, t};
    for (auto [lo, hi] : windows) {
        if (lo > 0.0 && lo < t) cuts.push_back(lo);
        if (hi > 0.0 && hi < t) cuts.push_back(hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // dp[j]: weight of placing s_1..s_j in the cells swept so far
    std::vector<double> dp(n + 1, 0.0), next(n + 1);
    dp[0] = 1.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], b = cuts[c + 1], len = b - a;
        std::fill(next.begin(), next.end(), 0.0);
        for (int j = 0; j <= n; ++j) {
            if (dp[j] == 0.0) continue;
            double w = dp[j];
            next[j] += w;
            for (int k = 1; j + k <= n; ++k) {
                const auto [lo, hi] = windows[j + k - 1];
                if (!(lo <= a && hi >= b)) break;
                w *= len / k;
                next[j + k] += w;
            }
        }
        dp.swap(next);
    }
    return dp[n];
}

cplx exp_divided_difference(const std::vector<cplx>& nodes) {
    const int m = int(nodes.size());
    if (m == 0) return 0.0;
    CMat Z = CMat::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        Z(k, k) = nodes[k];
        if (k + 1 < m) Z(k + 1, k) = 1.0;
    }
    return Z.exp()(m - 1, 0);
}

}  // namespace fermi
