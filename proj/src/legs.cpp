#include "fermi/legs.hpp"

#include "fermi/combinatorics.hpp"

#include <algorithm>

namespace fermi {

namespace {

void for_each_injection(const std::vector<int>& from, int targets,
                        const std::function<void(const std::vector<std::pair<int, int>>&)>& fn) {
    std::vector<std::pair<int, int>> cur;
    std::vector<bool> used(targets, false);
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == from.size()) {
            fn(cur);
            return;
        }
        for (int j = 0; j < targets; ++j) {
            if (used[j]) continue;
            used[j] = true;
            cur.emplace_back(from[k], j);
            rec(k + 1);
            cur.pop_back();
            used[j] = false;
        }
    };
    rec(0);
}

}  // namespace

void for_each_leg_contraction(const Bits& alpha, const Bits& beta, int km, int kp,
                              const std::function<void(const LegContraction&)>& fn) {
    const int n = int(alpha.size());
    require_dim(int(beta.size()) == n, "leg contraction: bit lengths differ");
    std::vector<int> A, B;
    for (int i = 0; i < n; ++i) {
        if (alpha[i]) A.push_back(i);
        if (beta[i]) B.push_back(i);
    }
    if (int(A.size()) > km || int(B.size()) > kp) return;
    if (km - A.size() != kp - B.size()) return;
    const Bits ones_l(km, 1), ones_r(kp, 1);

    LegContraction c;
    for_each_injection(A, km, [&](const std::vector<std::pair<int, int>>& p1) {
        const int s1 = sign_xi_matching(Matching{n, km, p1}, alpha, ones_l);
        std::vector<bool> lu(km, false);
        for (auto [i, j] : p1) lu[j] = true;
        for_each_injection(B, kp, [&](const std::vector<std::pair<int, int>>& p2) {
            Matching P2{kp, n, {}};
            for (auto [i, j] : p2) P2.pairs.emplace_back(j, i);
            std::sort(P2.pairs.begin(), P2.pairs.end());
            std::vector<bool> ru(kp, false);
            for (auto [i, j] : p2) ru[j] = true;
            c.sign = (s1 + sign_xi_matching(P2, ones_r, beta)) & 1;
            c.left = p1;
            c.right = p2;
            c.left_rest.clear();
            c.right_rest.clear();
            for (int j = 0; j < km; ++j)
                if (!lu[j]) c.left_rest.push_back(j);
            for (int j = 0; j < kp; ++j)
                if (!ru[j]) c.right_rest.push_back(j);
            fn(c);
        });
    });
}

}  // namespace fermi
