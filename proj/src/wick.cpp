#include "fermi/wick.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fermi {

int OperatorWord::modes() const {
    if (factors.empty()) throw DimensionError("operator word is empty");
    const auto m = factors.front().f.size();
    for (const auto& fa : factors)
        require_dim(fa.f.size() == m && fa.g.size() == m, "operator word: mode mismatch");
    return int(m);
}

Bits OperatorWord::alpha() const {
    Bits a;
    for (const auto& fa : factors) a.push_back(fa.alpha);
    return a;
}

Bits OperatorWord::beta() const {
    Bits b;
    for (const auto& fa : factors) b.push_back(fa.beta);
    return b;
}

FockOperator dense_word(const ModeSpace& space, const OperatorWord& w) {
    CMat acc = CMat::Identity(space.dim(), space.dim());
    for (const auto& fa : w.factors) {
        CMat factor = CMat::Identity(space.dim(), space.dim());
        if (fa.alpha) factor = creation(space, fa.f).entries;
        if (fa.beta) factor = factor * annihilation(space, fa.g).entries;
        acc = factor * acc;
    }
    return {acc};
}

FockOperator NormalForm::to_dense(const ModeSpace& space, const std::vector<CVec>& cv,
                                  const std::vector<CVec>& av) const {
    const auto D = space.dim();
    CMat total = CMat::Zero(D, D);
    for (const auto& t : terms) {
        CMat op = CMat::Identity(D, D);
        for (auto it = t.creators.rbegin(); it != t.creators.rend(); ++it)
            op = op * creation(space, cv.at(*it)).entries;
        for (auto it = t.annihilators.rbegin(); it != t.annihilators.rend(); ++it)
            op = op * annihilation(space, av.at(*it)).entries;
        total += t.coefficient * op;
    }
    return {total};
}

cplx NormalForm::identity_coefficient() const {
    cplx c = 0.0;
    for (const auto& t : terms)
        if (t.creators.empty() && t.annihilators.empty()) c += t.coefficient;
    return c;
}

std::string NormalForm::to_string(const std::string& cp, const std::string& ap) const {
    std::ostringstream os;
    for (const auto& t : terms) {
        os << '(' << t.coefficient.real() << (t.coefficient.imag() < 0 ? "" : "+")
           << t.coefficient.imag() << "i)";
        for (auto it = t.creators.rbegin(); it != t.creators.rend(); ++it)
            os << " a+(" << cp << *it + 1 << ')';
        for (auto it = t.annihilators.rbegin(); it != t.annihilators.rend(); ++it)
            os << " a-(" << ap << *it + 1 << ')';
        os << '\n';
    }
    return os.str();
}

namespace {

constexpr double kPrune = 1e-15;

void sort_terms(NormalForm& nf) {
    std::stable_sort(nf.terms.begin(), nf.terms.end(), [](const NormalTerm& a, const NormalTerm& b) {
        if (a.creators != b.creators) return a.creators < b.creators;
        return a.annihilators < b.annihilators;
    });
}

}  // namespace

NormalForm normal_order_word(const OperatorWord& w) {
    const int n = w.size();
    if (n < 1 || n > 7) throw GuardError("normal_order_word: word length must lie in [1, 7]");
    w.modes();
    const Bits a = w.alpha(), b = w.beta();
    NormalForm nf;
    for_each_partition(n, [&](const Partition& g) {
        cplx coef = (sign_xi(g, a, b) & 1) ? -1.0 : 1.0;
        for (const auto& part : g.parts())
            for (std::size_t h = 0; h + 1 < part.size(); ++h) {
                const int lo = part[h], hi = part[h + 1];
                if (!a[lo] || !b[hi]) {
                    coef = 0.0;
                    break;
                }
                coef *= w.factors[hi].g.dot(w.factors[lo].f);
            }
        if (std::abs(coef) < kPrune) return;
        NormalTerm t{coef, {}, {}};
        for (int i : g.g_out())
            if (a[i]) t.creators.push_back(i);
        for (int j : g.g_in())
            if (b[j]) t.annihilators.push_back(j);
        nf.terms.push_back(std::move(t));
    });
    sort_terms(nf);
    return nf;
}

FockOperator dense_normal_form(const ModeSpace& space, const OperatorWord& w, const NormalForm& nf) {
    std::vector<CVec> fs, gs;
    for (const auto& fa : w.factors) {
        fs.push_back(fa.f);
        gs.push_back(fa.g);
    }
    return nf.to_dense(space, fs, gs);
}

NormalForm normal_order_two_block(const std::vector<Annihilator>& gs, const std::vector<Creator>& fs) {
    const int m = int(fs.size()), n = int(gs.size());
    if (m > 6 || n > 6) throw GuardError("normal_order_two_block: block sizes must be <= 6");
    Bits alpha, beta;
    for (const auto& c : fs) alpha.push_back(c.alpha);
    for (const auto& a : gs) beta.push_back(a.beta);
    NormalForm nf;
    for_each_matching(m, n, [&](const Matching& p) {
        cplx coef = (sign_xi_matching(p, alpha, beta) & 1) ? -1.0 : 1.0;
        for (auto [i, j] : p.pairs) {
            if (!alpha[i] || !beta[j]) {
                coef = 0.0;
                break;
            }
            coef *= gs[j].g.dot(fs[i].f);
        }
        if (std::abs(coef) < kPrune) return;
        NormalTerm t{coef, {}, {}};
        for (int i : p.domain_complement())
            if (alpha[i]) t.creators.push_back(i);
        for (int j : p.range_complement())
            if (beta[j]) t.annihilators.push_back(j);
        nf.terms.push_back(std::move(t));
    });
    sort_terms(nf);
    return nf;
}

FockOperator dense_two_block(const ModeSpace& space, const std::vector<Annihilator>& gs,
                             const std::vector<Creator>& fs) {
    const auto D = space.dim();
    CMat op = CMat::Identity(D, D);
    for (auto it = gs.rbegin(); it != gs.rend(); ++it)
        if (it->beta) op = op * annihilation(space, it->g).entries;
    for (auto it = fs.rbegin(); it != fs.rend(); ++it)
        if (it->alpha) op = op * creation(space, it->f).entries;
    return {op};
}

cplx vacuum_expectation(const OperatorWord& w) {
    return normal_order_word(w).identity_coefficient();
}

ParseError::ParseError(const std::string& msg, std::size_t off)
    : std::invalid_argument("byte " + std::to_string(off) + ": " + msg), offset(off) {}

OperatorWord parse_word(const std::string& expr, const std::map<std::string, CVec>& vectors) {
    struct Token {
        bool create;
        std::string name;
        std::size_t offset;
    };
    std::vector<Token> tokens;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < expr.size() && std::isspace(static_cast<unsigned char>(expr[pos]))) ++pos;
    };
    skip_ws();
    while (pos < expr.size()) {
        const std::size_t start = pos;
        if (expr[pos] != 'a') throw ParseError("expected 'a+(' or 'a-('", pos);
        ++pos;
        if (pos >= expr.size() || (expr[pos] != '+' && expr[pos] != '-'))
            throw ParseError("expected '+' or '-' after 'a'", pos);
        const bool create = expr[pos] == '+';
        ++pos;
        if (pos >= expr.size() || expr[pos] != '(') throw ParseError("expected '('", pos);
        ++pos;
        const std::size_t name_start = pos;
        while (pos < expr.size() &&
               (std::isalnum(static_cast<unsigned char>(expr[pos])) || expr[pos] == '_'))
            ++pos;
        if (pos == name_start) throw ParseError("expected a vector name", pos);
        std::string name = expr.substr(name_start, pos - name_start);
        if (pos >= expr.size() || expr[pos] != ')') throw ParseError("expected ')'", pos);
        ++pos;
        if (!vectors.count(name)) throw ParseError("unknown vector '" + name + "'", name_start);
        tokens.push_back({create, std::move(name), start});
        skip_ws();
    }
    if (tokens.empty()) throw ParseError("empty operator word", 0);

    const auto m = vectors.at(tokens.front().name).size();
    for (const auto& t : tokens)
        if (vectors.at(t.name).size() != m)
            throw ParseError("vector '" + t.name + "' has a different mode count", t.offset);
    const CVec zero = CVec::Zero(m);

    OperatorWord w;
    for (int k = int(tokens.size()) - 1; k >= 0; --k) {
        WordFactor fa{zero, zero, 0, 0};
        if (!tokens[k].create) {
            fa.g = vectors.at(tokens[k].name);
            fa.beta = 1;
            if (k > 0 && tokens[k - 1].create) {
                --k;
                fa.f = vectors.at(tokens[k].name);
                fa.alpha = 1;
            }
        } else {
            fa.f = vectors.at(tokens[k].name);
            fa.alpha = 1;
        }
        w.factors.push_back(std::move(fa));
    }
    return w;
}

}  // namespace fermi
