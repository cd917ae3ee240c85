#include "fermi/fock.hpp"

#include <bit>
#include <string>

namespace fermi {

namespace {

int jw_sign(std::uint64_t b, int k) {
    const std::uint64_t below = b & ((std::uint64_t(1) << k) - 1);
    return (std::popcount(below) & 1) ? -1 : 1;
}

void check_vec(const ModeSpace& s, const CVec& f) {
    require_dim(f.size() == s.modes(),
                "one-particle vector has " + std::to_string(f.size()) + " entries, expected " +
                    std::to_string(s.modes()));
}

}  // namespace

ModeSpace::ModeSpace(int modes, int max_modes) : modes_(modes) {
    if (modes < 1 || modes > max_modes)
        throw GuardError("mode count " + std::to_string(modes) + " outside [1, " +
                         std::to_string(max_modes) + "]");
}

Parity FockOperator::parity(double tol) const {
    bool even = false, odd = false;
    for (Eigen::Index c = 0; c < entries.cols(); ++c)
        for (Eigen::Index r = 0; r < entries.rows(); ++r) {
            if (std::abs(entries(r, c)) <= tol) continue;
            const int d = std::popcount(std::uint64_t(r)) + std::popcount(std::uint64_t(c));
            (d & 1 ? odd : even) = true;
        }
    if (even && odd) return Parity::Mixed;
    return odd ? Parity::Odd : Parity::Even;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    return {a.entries * b.entries};
}
FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    return {a.entries + b.entries};
}
FockOperator anticommutator(const FockOperator& a, const FockOperator& b) {
    return {a.entries * b.entries + b.entries * a.entries};
}

CVec vacuum(const ModeSpace& space) {
    CVec v = CVec::Zero(space.dim());
    v(0) = 1.0;
    return v;
}

FockOperator mode_creation(const ModeSpace& space, int k) {
    if (k < 0 || k >= space.modes()) throw DimensionError("mode index out of range");
    const auto D = space.dim();
    CMat m = CMat::Zero(D, D);
    const std::uint64_t bit = std::uint64_t(1) << k;
    for (std::uint64_t b = 0; b < std::uint64_t(D); ++b)
        if (!(b & bit)) m(Eigen::Index(b | bit), Eigen::Index(b)) = double(jw_sign(b, k));
    return {m};
}

CVec apply_creation(const ModeSpace& space, const CVec& f, const CVec& psi) {
    check_vec(space, f);
    require_dim(psi.size() == space.dim(), "Fock vector dimension mismatch");
    CVec out = CVec::Zero(psi.size());
    for (std::uint64_t b = 0; b < std::uint64_t(psi.size()); ++b) {
        const cplx amp = psi(Eigen::Index(b));
        if (amp == 0.0) continue;
        for (int k = 0; k < space.modes(); ++k) {
            const std::uint64_t bit = std::uint64_t(1) << k;
            if (b & bit) continue;
            out(Eigen::Index(b | bit)) += double(jw_sign(b, k)) * f(k) * amp;
        }
    }
    return out;
}

CVec apply_annihilation(const ModeSpace& space, const CVec& f, const CVec& psi) {
    check_vec(space, f);
    require_dim(psi.size() == space.dim(), "Fock vector dimension mismatch");
    CVec out = CVec::Zero(psi.size());
    for (std::uint64_t b = 0; b < std::uint64_t(psi.size()); ++b) {
        const cplx amp = psi(Eigen::Index(b));
        if (amp == 0.0) continue;
        for (int k = 0; k < space.modes(); ++k) {
            const std::uint64_t bit = std::uint64_t(1) << k;
            if (!(b & bit)) continue;
            out(Eigen::Index(b ^ bit)) += double(jw_sign(b ^ bit, k)) * std::conj(f(k)) * amp;
        }
    }
    return out;
}

FockOperator creation(const ModeSpace& space, const CVec& f) {
    check_vec(space, f);
    const auto D = space.dim();
    CMat m = CMat::Zero(D, D);
    for (std::uint64_t b = 0; b < std::uint64_t(D); ++b)
        for (int k = 0; k < space.modes(); ++k) {
            const std::uint64_t bit = std::uint64_t(1) << k;
            if (!(b & bit)) m(Eigen::Index(b | bit), Eigen::Index(b)) = double(jw_sign(b, k)) * f(k);
        }
    return {m};
}

FockOperator annihilation(const ModeSpace& space, const CVec& f) {
    return creation(space, f).adjoint();
}

FockOperator second_quantize(const ModeSpace& space, const CMat& U, double tol) {
    const int M = space.modes();
    require_dim(U.rows() == M && U.cols() == M, "second_quantize: U must be M x M");
    const double dev = (U.adjoint() * U - CMat::Identity(M, M)).cwiseAbs().maxCoeff();
    if (dev > tol) throw GuardError("second_quantize: U is not unitary (deviation " +
                                    std::to_string(dev) + ")");
    const auto D = space.dim();
    CMat m = CMat::Zero(D, D);
    m(0, 0) = 1.0;
    std::vector<int> rows, cols;
    for (std::uint64_t c = 1; c < std::uint64_t(D); ++c)
        for (std::uint64_t b = 1; b < std::uint64_t(D); ++b) {
            if (std::popcount(c) != std::popcount(b)) continue;
            rows.clear();
            cols.clear();
            for (int k = 0; k < M; ++k) {
                if (c >> k & 1) rows.push_back(k);
                if (b >> k & 1) cols.push_back(k);
            }
            CMat minor(rows.size(), cols.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < cols.size(); ++j) minor(i, j) = U(rows[i], cols[j]);
            m(Eigen::Index(c), Eigen::Index(b)) = minor.determinant();
        }
    return {m};
}

FockOperator dgamma(const ModeSpace& space, const CMat& H) {
    const int M = space.modes();
    require_dim(H.rows() == M && H.cols() == M, "dgamma: H must be M x M");
    const auto D = space.dim();
    CMat m = CMat::Zero(D, D);
    for (std::uint64_t b = 0; b < std::uint64_t(D); ++b)
        for (int l = 0; l < M; ++l) {
            if (!(b >> l & 1)) continue;
            const std::uint64_t b1 = b ^ (std::uint64_t(1) << l);
            const int s1 = jw_sign(b1, l);
            for (int k = 0; k < M; ++k) {
                if (b1 >> k & 1 || H(k, l) == 0.0) continue;
                const std::uint64_t b2 = b1 | (std::uint64_t(1) << k);
                m(Eigen::Index(b2), Eigen::Index(b)) += double(s1 * jw_sign(b1, k)) * H(k, l);
            }
        }
    return {m};
}

CVec product_state(const ModeSpace& space, const std::vector<CVec>& vs) {
    CVec psi = vacuum(space);
    for (const auto& v : vs) psi = apply_creation(space, v, psi);
    return psi;
}

CVec reverse_product_state(const ModeSpace& space, const std::vector<CVec>& us) {
    CVec psi = vacuum(space);
    for (auto it = us.rbegin(); it != us.rend(); ++it) psi = apply_creation(space, *it, psi);
    return psi;
}

cplx gram_determinant(const CMat& overlaps) {
    if (overlaps.rows() != overlaps.cols()) return 0.0;
    const Eigen::Index k = overlaps.rows();
    if (k == 0) return 1.0;
    const double sign = ((k * (k - 1) / 2) % 2) ? -1.0 : 1.0;
    return sign * overlaps.determinant();
}

cplx gram_inner(const std::vector<CVec>& left, const std::vector<CVec>& right) {
    if (left.size() != right.size()) return 0.0;
    const Eigen::Index k = Eigen::Index(left.size());
    CMat g(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            require_dim(left[i].size() == right[j].size(), "gram_inner: mode mismatch");
            g(i, j) = left[i].dot(right[j]);
        }
    return gram_determinant(g);
}

cplx gram_inner_dense(const ModeSpace& space, const std::vector<CVec>& left,
                      const std::vector<CVec>& right) {
    return reverse_product_state(space, left).dot(product_state(space, right));
}

}  // namespace fermi
