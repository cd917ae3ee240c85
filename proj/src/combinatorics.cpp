#include "fermi/combinatorics.hpp"

#include <algorithm>
#include <sstream>

namespace fermi {

Partition::Partition(int n, std::vector<std::vector<int>> parts) : n_(n), parts_(std::move(parts)) {
    if (n < 0) throw DimensionError("partition size must be non-negative");
    part_of_.assign(n, -1);
    next_.assign(n, -1);
    prev_.assign(n, -1);
    for (auto& p : parts_) {
        if (p.empty()) throw std::invalid_argument("partition has an empty part");
        std::sort(p.begin(), p.end());
    }
    std::sort(parts_.begin(), parts_.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t k = 0; k < parts_.size(); ++k)
        for (std::size_t h = 0; h < parts_[k].size(); ++h) {
            const int e = parts_[k][h];
            if (e < 0 || e >= n) throw std::invalid_argument("partition element out of range");
            if (part_of_[e] >= 0) throw std::invalid_argument("partition parts overlap");
            part_of_[e] = int(k);
            if (h > 0) prev_[e] = parts_[k][h - 1];
            if (h + 1 < parts_[k].size()) next_[e] = parts_[k][h + 1];
        }
    for (int e = 0; e < n; ++e)
        if (part_of_[e] < 0) throw std::invalid_argument("partition does not cover the ground set");
}

Partition Partition::from_one_based(int n, const std::vector<std::vector<int>>& parts) {
    auto p = parts;
    for (auto& part : p)
        for (auto& e : part) --e;
    return Partition(n, std::move(p));
}

Partition Partition::singletons(int n) {
    std::vector<std::vector<int>> parts;
    for (int i = 0; i < n; ++i) parts.push_back({i});
    return Partition(n, std::move(parts));
}

std::vector<int> Partition::g_in() const {
    std::vector<int> out;
    for (const auto& p : parts_) out.push_back(p.front());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Partition::g_out() const {
    std::vector<int> out;
    for (const auto& p : parts_) out.push_back(p.back());
    std::sort(out.begin(), out.end());
    return out;
}

std::string Partition::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (k) os << ',';
        os << '{';
        for (std::size_t h = 0; h < parts_[k].size(); ++h) os << (h ? "," : "") << parts_[k][h] + 1;
        os << '}';
    }
    os << '}';
    return os.str();
}

void for_each_partition(int n, const std::function<void(const Partition&)>& fn) {
    if (n == 0) {
        fn(Partition(0, {}));
        return;
    }
    std::vector<int> rgs(n, 0), maxv(n, 0);
    while (true) {
        int blocks = 0;
        for (int v : rgs) blocks = std::max(blocks, v + 1);
        std::vector<std::vector<int>> parts(blocks);
        for (int i = 0; i < n; ++i) parts[rgs[i]].push_back(i);
        fn(Partition(n, std::move(parts)));
        // next restricted growth string
        int i = n - 1;
        while (i > 0 && rgs[i] > maxv[i - 1]) --i;
        if (i == 0) return;
        ++rgs[i];
        maxv[i] = std::max(maxv[i - 1], rgs[i]);
        for (int k = i + 1; k < n; ++k) {
            rgs[k] = 0;
            maxv[k] = maxv[i];
        }
    }
}

std::vector<Partition> enumerate_partitions(int n) {
    if (n < 1 || n > 8) throw GuardError("enumerate_partitions: n must lie in [1, 8]");
    std::vector<Partition> out;
    for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
    return out;
}

bool is_type_one(const Partition& g) {
    for (const auto& p : g.parts())
        for (std::size_t h = 1; h < p.size(); ++h)
            if (p[h] != p[h - 1] + 1) return false;
    return true;
}

Partition type_one_from_sizes(const std::vector<int>& sizes) {
    std::vector<std::vector<int>> parts;
    int next = 0;
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("type-I block size must be positive");
        std::vector<int> p(s);
        for (int h = 0; h < s; ++h) p[h] = next++;
        parts.push_back(std::move(p));
    }
    return Partition(next, std::move(parts));
}

std::vector<Partition> enumerate_type_one(int n) {
    if (n < 1) throw GuardError("enumerate_type_one: n must be positive");
    std::vector<Partition> out;
    for (unsigned long long mask = 0; mask < (1ULL << (n - 1)); ++mask) {
        std::vector<int> sizes;
        int run = 1;
        for (int k = 0; k < n - 1; ++k) {
            if (mask >> k & 1) {
                sizes.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        sizes.push_back(run);
        out.push_back(type_one_from_sizes(sizes));
    }
    return out;
}

std::vector<int> Matching::domain() const {
    std::vector<int> out;
    for (auto [i, j] : pairs) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Matching::range() const {
    std::vector<int> out;
    for (auto [i, j] : pairs) out.push_back(j);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Matching::domain_complement() const {
    std::vector<int> out;
    for (int i = 0; i < m; ++i)
        if (partner_of_left(i) < 0) out.push_back(i);
    return out;
}

std::vector<int> Matching::range_complement() const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
        if (partner_of_right(j) < 0) out.push_back(j);
    return out;
}

int Matching::partner_of_left(int i) const {
    for (auto [a, b] : pairs)
        if (a == i) return b;
    return -1;
}

int Matching::partner_of_right(int j) const {
    for (auto [a, b] : pairs)
        if (b == j) return a;
    return -1;
}

std::string Matching::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < pairs.size(); ++k)
        os << (k ? "," : "") << '(' << pairs[k].first + 1 << ',' << pairs[k].second + 1 << ')';
    os << '}';
    return os.str();
}

void for_each_matching(int m, int n, const std::function<void(const Matching&)>& fn) {
    Matching cur{m, n, {}};
    std::vector<bool> used(n, false);
    std::function<void(int)> rec = [&](int i) {
        if (i == m) {
            fn(cur);
            return;
        }
        rec(i + 1);
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            used[j] = true;
            cur.pairs.emplace_back(i, j);
            rec(i + 1);
            cur.pairs.pop_back();
            used[j] = false;
        }
    };
    rec(0);
}

std::vector<Matching> enumerate_matchings(int m, int n) {
    if (m < 0 || n < 0 || m > 6 || n > 6)
        throw GuardError("enumerate_matchings: sizes must lie in [0, 6]");
    std::vector<Matching> out;
    for_each_matching(m, n, [&](const Matching& p) { out.push_back(p); });
    return out;
}

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

long long matching_count(int m, int n) {
    long long total = 0, fact = 1;
    for (int i = 0; i <= std::min(m, n); ++i) {
        if (i > 0) fact *= i;
        total += binomial(m, i) * binomial(n, i) * fact;
    }
    return total;
}

Crossing crossing_condition(const Partition& g, int j, int i) {
    if (j <= i) return Crossing::None;
    const int ip = g.next_in_part(i);
    const int jp = g.prev_in_part(j);
    const bool i_out = ip < 0, j_in = jp < 0;
    if (!i_out && ip <= j) return Crossing::None;
    if (!j_in && jp >= i) return Crossing::None;
    if (i_out && j_in) return Crossing::OutIn;
    if (i_out) return Crossing::OutOverLine;
    if (j_in) return Crossing::InUnderLine;
    return Crossing::Nested;
}

int sign_xi(const Partition& g, const Bits& alpha, const Bits& beta) {
    require_dim(int(alpha.size()) == g.n() && int(beta.size()) == g.n(),
                "sign_xi: bit vectors must have length n");
    int xi = 0;
    for (int i = 0; i < g.n(); ++i) {
        if (!alpha[i]) continue;
        for (int j = i + 1; j < g.n(); ++j)
            if (beta[j] && crosses(g, j, i)) ++xi;
    }
    return xi;
}

Partition matching_partition(const Matching& p) {
    const int total = p.m + p.n;
    std::vector<std::vector<int>> parts;
    for (int i = 0; i < p.m; ++i) {
        const int j = p.partner_of_left(i);
        if (j < 0)
            parts.push_back({i});
        else
            parts.push_back({i, p.m + j});
    }
    for (int j = 0; j < p.n; ++j)
        if (p.partner_of_right(j) < 0) parts.push_back({p.m + j});
    return Partition(total, std::move(parts));
}

int sign_xi_matching(const Matching& p, const Bits& alpha, const Bits& beta) {
    require_dim(int(alpha.size()) == p.m && int(beta.size()) == p.n,
                "sign_xi_matching: bit lengths must match the matching's ground sets");
    Bits ah(p.m + p.n, 0), bh(p.m + p.n, 0);
    for (int i = 0; i < p.m; ++i) ah[i] = alpha[i];
    for (int j = 0; j < p.n; ++j) bh[p.m + j] = beta[j];
    return sign_xi(matching_partition(p), ah, bh);
}

int OccupationProfile::E() const {
    int e = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) e += int(j + 1) * counts[j];
    return e;
}

int OccupationProfile::N() const {
    int s = 0;
    for (int c : counts) s += c;
    return s;
}

OccupationProfile OccupationProfile::trimmed() const {
    OccupationProfile t{counts};
    while (!t.counts.empty() && t.counts.back() == 0) t.counts.pop_back();
    return t;
}

OccupationProfile occupation_profile(const Partition& g) {
    OccupationProfile pr;
    for (const auto& p : g.parts()) {
        if (pr.counts.size() < p.size()) pr.counts.resize(p.size(), 0);
        ++pr.counts[p.size() - 1];
    }
    return pr;
}

std::vector<Partition> partitions_with_profile(const OccupationProfile& profile) {
    const int E = profile.E();
    std::vector<Partition> out;
    if (E == 0) return out;
    for (const auto& g : enumerate_partitions(E))
        if (occupation_profile(g) == profile) out.push_back(g);
    return out;
}

}  // namespace fermi
