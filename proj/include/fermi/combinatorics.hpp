#pragma once

#include "fermi/types.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace fermi {

/// Set partition of {0, ..., n-1}. Parts are kept canonical: elements
/// ascending, parts ordered by their minimum. Elements are printed 1-based.
class Partition {
public:
    Partition() = default;
    Partition(int n, std::vector<std::vector<int>> parts);
    static Partition from_one_based(int n, const std::vector<std::vector<int>>& parts);
    static Partition singletons(int n);

    int n() const { return n_; }
    const std::vector<std::vector<int>>& parts() const { return parts_; }
    int num_parts() const { return int(parts_.size()); }

    /// Part minima / maxima, ascending.
    std::vector<int> g_in() const;
    std::vector<int> g_out() const;
    bool is_in(int i) const { return prev_[i] < 0; }
    bool is_out(int i) const { return next_[i] < 0; }
    int part_of(int i) const { return part_of_[i]; }
    /// Neighbours inside the part; -1 when i is the part maximum / minimum.
    int next_in_part(int i) const { return next_[i]; }
    int prev_in_part(int i) const { return prev_[i]; }

    std::string to_string() const;
    bool operator==(const Partition& o) const { return n_ == o.n_ && parts_ == o.parts_; }

private:
    int n_ = 0;
    std::vector<std::vector<int>> parts_;
    std::vector<int> part_of_, next_, prev_;
};

/// Calls fn for every partition of {0..n-1} (restricted growth strings).
void for_each_partition(int n, const std::function<void(const Partition&)>& fn);
/// Guarded enumeration, 1 <= n <= 8.
std::vector<Partition> enumerate_partitions(int n);

bool is_type_one(const Partition& g);
/// Type-I partition with consecutive blocks of the given sizes, lowest block first.
Partition type_one_from_sizes(const std::vector<int>& sizes);
/// All 2^{n-1} type-I partitions of {0..n-1}.
std::vector<Partition> enumerate_type_one(int n);

/// Partial injective pairing between {0..m-1} and {0..n-1}.
struct Matching {
    int m = 0, n = 0;
    std::vector<std::pair<int, int>> pairs;  // sorted by first index

    std::vector<int> domain() const;
    std::vector<int> range() const;
    std::vector<int> domain_complement() const;
    std::vector<int> range_complement() const;
    /// Partner of i in {0..n-1}, or -1.
    int partner_of_left(int i) const;
    int partner_of_right(int j) const;
    std::string to_string() const;
};

void for_each_matching(int m, int n, const std::function<void(const Matching&)>& fn);
/// Guarded enumeration, m, n <= 6.
std::vector<Matching> enumerate_matchings(int m, int n);
/// sum_i C(m,i) C(n,i) i!
long long matching_count(int m, int n);

/// Which line-crossing condition makes the ordered pair (j, i), j > i,
/// contribute to the sign. With i' the successor of i in its part (absent
/// when i is a part maximum) and j' the predecessor of j (absent when j is a
/// part minimum), the pair counts iff i' > j and j' < i.
enum class Crossing {
    None,
    Nested,       // both i and j internal to their chains
    OutOverLine,  // i is an out-vertex, j has a predecessor below i
    InUnderLine,  // j is an in-vertex, i has a successor above j
    OutIn         // i out-vertex, j in-vertex
};
Crossing crossing_condition(const Partition& g, int j, int i);
inline bool crosses(const Partition& g, int j, int i) {
    return crossing_condition(g, j, i) != Crossing::None;
}

/// xi(G, alpha, beta) = sum over crossing pairs (j > i) of beta_j alpha_i.
int sign_xi(const Partition& g, const Bits& alpha, const Bits& beta);

/// Partition of {0..m+n-1}: creators occupy 0..m-1, annihilators m..m+n-1,
/// each matched pair (i, j) becomes the part {i, m+j}.
Partition matching_partition(const Matching& p);
int sign_xi_matching(const Matching& p, const Bits& alpha, const Bits& beta);

struct OccupationProfile {
    std::vector<int> counts;  // counts[j-1] = number of j-element parts
    int E() const;
    int N() const;
    /// Trailing zero counts are insignificant.
    OccupationProfile trimmed() const;
    bool operator==(const OccupationProfile& o) const { return trimmed().counts == o.trimmed().counts; }
    bool operator<(const OccupationProfile& o) const { return trimmed().counts < o.trimmed().counts; }
};

OccupationProfile occupation_profile(const Partition& g);
/// All partitions of {0..E-1} with the given profile (E <= 8).
std::vector<Partition> partitions_with_profile(const OccupationProfile& profile);

long long binomial(int n, int k);

}  // namespace fermi
