#pragma once

#include "fermi/types.hpp"

namespace fermi {

/// M orthonormal one-particle modes; the Fock space has dimension 2^M and
/// basis states are occupation bitstrings (bit k set = mode k occupied).
class ModeSpace {
public:
    explicit ModeSpace(int modes, int max_modes = 12);
    int modes() const { return modes_; }
    Eigen::Index dim() const { return Eigen::Index(1) << modes_; }

private:
    int modes_;
};

enum class Parity { Even, Odd, Mixed };

/// Dense operator on Fock space.
struct FockOperator {
    CMat entries;

    Parity parity(double tol = 0.0) const;
    FockOperator adjoint() const { return {entries.adjoint()}; }
};

FockOperator operator*(const FockOperator& a, const FockOperator& b);
FockOperator operator+(const FockOperator& a, const FockOperator& b);
FockOperator anticommutator(const FockOperator& a, const FockOperator& b);

CVec vacuum(const ModeSpace& space);

/// a†_k with the Jordan-Wigner string: sign (-1)^{#occupied modes below k}.
FockOperator mode_creation(const ModeSpace& space, int k);

/// A+(f) = sum_k f_k a†_k.
FockOperator creation(const ModeSpace& space, const CVec& f);
/// A-(f) = A+(f)†, antilinear in f.
FockOperator annihilation(const ModeSpace& space, const CVec& f);

/// Gamma(U): on wedge basis states the entries are minors det U[c, b].
FockOperator second_quantize(const ModeSpace& space, const CMat& U, double tol = 1e-10);

/// dGamma(H) = sum_kl H_kl a†_k a_l.
FockOperator dgamma(const ModeSpace& space, const CMat& H);

/// Matrix-free actions of A+(f) and A-(f).
CVec apply_creation(const ModeSpace& space, const CVec& f, const CVec& psi);
CVec apply_annihilation(const ModeSpace& space, const CVec& f, const CVec& psi);

/// A+(v_k)...A+(v_1) Phi: index 1 acts first (rightmost).
CVec product_state(const ModeSpace& space, const std::vector<CVec>& vs);
/// A+(u_1)...A+(u_k) Phi: the reversed product.
CVec reverse_product_state(const ModeSpace& space, const std::vector<CVec>& us);

/// <A+(u_1)...A+(u_k) Phi | A+(v_k)...A+(v_1) Phi> from the overlap matrix
/// G_ij = <u_i|v_j>. Reversing one of the two products costs the sign
/// (-1)^{k(k-1)/2}, so the value is that sign times det G. Non-square -> 0.
cplx gram_determinant(const CMat& overlaps);

cplx gram_inner(const std::vector<CVec>& left, const std::vector<CVec>& right);

/// Brute-force evaluation of gram_inner on the dense Fock space.
cplx gram_inner_dense(const ModeSpace& space, const std::vector<CVec>& left,
                      const std::vector<CVec>& right);

}  // namespace fermi
