#pragma once

#include "fermi/combinatorics.hpp"
#include "fermi/fock.hpp"

#include <map>
#include <string>

namespace fermi {

/// [A+(f)]^alpha [A-(g)]^beta
struct WordFactor {
    CVec f, g;
    int alpha = 0, beta = 0;
};

/// Product F_n = factor_n ... factor_1; factors[0] is the rightmost one.
struct OperatorWord {
    std::vector<WordFactor> factors;

    int size() const { return int(factors.size()); }
    int modes() const;
    Bits alpha() const;
    Bits beta() const;
};

FockOperator dense_word(const ModeSpace& space, const OperatorWord& w);

/// coefficient * prod_{i in creators} A+(c_i) * prod_{j in annihilators} A-(a_j),
/// both products taken with the largest index leftmost.
struct NormalTerm {
    cplx coefficient;
    std::vector<int> creators;
    std::vector<int> annihilators;
};

struct NormalForm {
    std::vector<NormalTerm> terms;

    /// Dense operator given the vectors the indices refer to.
    FockOperator to_dense(const ModeSpace& space, const std::vector<CVec>& creator_vectors,
                          const std::vector<CVec>& annihilator_vectors) const;
    /// Coefficient of the identity term (0 if absent).
    cplx identity_coefficient() const;
    std::string to_string(const std::string& creator_prefix = "f",
                          const std::string& annihilator_prefix = "g") const;
};

/// Sum over partitions G of (-1)^xi prod_parts prod_h beta alpha <g|f>,
/// with creators from G_out and annihilators from G_in. Requires n <= 7.
NormalForm normal_order_word(const OperatorWord& w);
FockOperator dense_normal_form(const ModeSpace& space, const OperatorWord& w, const NormalForm& nf);

struct Annihilator {
    CVec g;
    int beta = 1;
};
struct Creator {
    CVec f;
    int alpha = 1;
};

/// [prod_j A-(g_j)^beta_j][prod_i A+(f_i)^alpha_i] reordered through all
/// matchings. Creator indices refer to fs, annihilator indices to gs.
NormalForm normal_order_two_block(const std::vector<Annihilator>& gs, const std::vector<Creator>& fs);
FockOperator dense_two_block(const ModeSpace& space, const std::vector<Annihilator>& gs,
                             const std::vector<Creator>& fs);

cplx vacuum_expectation(const OperatorWord& w);

/// Word grammar: tokens `a+(name)` / `a-(name)` separated by optional
/// whitespace, read left to right as an operator product. Adjacent
/// `a+(f) a-(g)` share one factor.
struct ParseError : std::invalid_argument {
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset;
};

OperatorWord parse_word(const std::string& expr, const std::map<std::string, CVec>& vectors);

}  // namespace fermi
