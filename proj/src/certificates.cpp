#include "kdvsch/certificates.hpp"

#include "kdvsch/errors.hpp"

#include <algorithm>
#include <functional>

namespace kdvsch {

// ---------------------------------------------------------------------------
// Coefficient vectors and echelonization
// ---------------------------------------------------------------------------

std::vector<Rational> to_coeff_vector(const TrigPoly& p, int dim) {
    std::vector<Rational> v(dim, Rational(0));
    v[0] = p.a0;
    for (int m = 1; m <= p.degree(); ++m) {
        v[2 * m - 1] = p.cs[m - 1];
        v[2 * m] = p.sn[m - 1];
    }
    return v;
}

TrigPoly from_coeff_vector(std::span<const Rational> v) {
    TrigPoly p;
    if (!v.empty()) p.a0 = v[0];
    for (size_t i = 1; i < v.size(); ++i) {
        int m = static_cast<int>((i + 1) / 2);
        if (i % 2 == 1)
            p.add_cos(m, v[i]);
        else
            p.add_sin(m, v[i]);
    }
    return p;
}

std::vector<Rational> Echelon::reduce(const TrigPoly& p, std::vector<Rational>* combo) const {
    size_t dim = static_cast<size_t>(2 * p.degree() + 1);
    for (const auto& r : rows_) dim = std::max(dim, r.size());
    std::vector<Rational> v = to_coeff_vector(p, static_cast<int>(dim));
    if (combo) combo->assign(rows_.size(), Rational(0));
    for (size_t i = 0; i < rows_.size(); ++i) {
        const int pc = pivots_[i];
        if (static_cast<size_t>(pc) >= v.size() || v[pc] == 0) continue;
        Rational f = v[pc];
        if (combo) (*combo)[i] = f;
        const auto& row = rows_[i];
        for (size_t j = 0; j < row.size() && j < v.size(); ++j) v[j] -= f * row[j];
    }
    return v;
}

bool Echelon::add(const TrigPoly& p) {
    std::vector<Rational> v = reduce(p, nullptr);
    int pivot = -1;
    for (size_t j = 0; j < v.size(); ++j)
        if (v[j] != 0) { pivot = static_cast<int>(j); break; }
    if (pivot < 0) return false;
    Rational inv = Rational(1) / v[pivot];
    for (auto& x : v) x *= inv;
    // Back-substitute into existing rows to keep RREF.
    for (size_t i = 0; i < rows_.size(); ++i) {
        auto& row = rows_[i];
        if (static_cast<size_t>(pivot) >= row.size() || row[pivot] == 0) continue;
        Rational f = row[pivot];
        if (row.size() < v.size()) row.resize(v.size(), Rational(0));
        for (size_t j = 0; j < v.size(); ++j) row[j] -= f * v[j];
    }
    // Insert keeping pivot columns ascending (frequency-then-parity order).
    size_t pos = 0;
    while (pos < pivots_.size() && pivots_[pos] < pivot) ++pos;
    rows_.insert(rows_.begin() + pos, std::move(v));
    pivots_.insert(pivots_.begin() + pos, pivot);
    return true;
}

bool Echelon::contains(const TrigPoly& p) const {
    std::vector<Rational> v = reduce(p, nullptr);
    return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
}

std::vector<TrigPoly> Echelon::basis() const {
    std::vector<TrigPoly> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(from_coeff_vector(r));
    return out;
}

std::vector<Rational> Echelon::coordinates(const TrigPoly& p) const {
    std::vector<Rational> combo;
    std::vector<Rational> residual = reduce(p, &combo);
    for (const auto& x : residual)
        if (x != 0) return {};
    return combo;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

CertPtr cert_basis(int index) {
    auto c = std::make_shared<SaturationCertificate>();
    c->kind = SaturationCertificate::Kind::Basis;
    c->basis_index = index;
    return c;
}

CertPtr cert_lincomb(std::vector<std::pair<Rational, CertPtr>> terms) {
    auto c = std::make_shared<SaturationCertificate>();
    c->kind = SaturationCertificate::Kind::LinComb;
    c->terms = std::move(terms);
    return c;
}

CertPtr cert_deriv_power(CertPtr child, int n) {
    if (n < 3 || n % 2 == 0) throw ValidationError("deriv-power node requires odd n >= 3");
    auto c = std::make_shared<SaturationCertificate>();
    c->kind = SaturationCertificate::Kind::DerivPower;
    c->child = std::move(child);
    c->power = n;
    return c;
}

TrigPoly evaluate(const SaturationCertificate& c, std::span<const TrigPoly> basis) {
    switch (c.kind) {
        case SaturationCertificate::Kind::Basis:
            if (c.basis_index < 0 || static_cast<size_t>(c.basis_index) >= basis.size())
                throw ValidationError("certificate basis index out of range");
            return basis[c.basis_index];
        case SaturationCertificate::Kind::LinComb: {
            TrigPoly r;
            for (const auto& [coeff, child] : c.terms) r += evaluate(*child, basis) * coeff;
            return r;
        }
        case SaturationCertificate::Kind::DerivPower:
            return power(evaluate(*c.child, basis).derivative(), c.power);
    }
    throw ValidationError("corrupt certificate node");
}

int cert_depth(const SaturationCertificate& c) {
    switch (c.kind) {
        case SaturationCertificate::Kind::Basis:
            return 0;
        case SaturationCertificate::Kind::LinComb: {
            int d = 0;
            for (const auto& [coeff, child] : c.terms) d = std::max(d, cert_depth(*child));
            return d;
        }
        case SaturationCertificate::Kind::DerivPower:
            return 1 + cert_depth(*c.child);
    }
    return 0;
}

double cert_coeff_magnitude(const SaturationCertificate& c) {
    double m = 0;
    if (c.kind == SaturationCertificate::Kind::LinComb) {
        for (const auto& [coeff, child] : c.terms) {
            m = std::max(m, std::abs(to_double(Rational(boost::multiprecision::numerator(coeff)))));
            m = std::max(m, std::abs(to_double(Rational(boost::multiprecision::denominator(coeff)))));
            m = std::max(m, cert_coeff_magnitude(*child));
        }
    } else if (c.kind == SaturationCertificate::Kind::DerivPower) {
        m = cert_coeff_magnitude(*c.child);
    }
    return m;
}

std::vector<TrigPoly> h0_basis(int n) {
    if (n < 3 || n % 2 == 0) throw ValidationError("saturation basis requires odd n >= 3");
    std::vector<TrigPoly> b;
    b.push_back(TrigPoly::constant(Rational(1)));
    for (int m = 1; m <= n - 1; ++m) {
        b.push_back(TrigPoly::cosine(m));
        b.push_back(TrigPoly::sine(m));
    }
    return b;
}

// ---------------------------------------------------------------------------
// Polarization and the saturation step
// ---------------------------------------------------------------------------

std::pair<TrigPoly, std::vector<PolarizationTerm>> polarized_product(
    std::span<const TrigPoly> f_list, int n) {
    if (n < 3 || n % 2 == 0)
        throw ValidationError("polarized_product requires odd n >= 3");
    if (static_cast<int>(f_list.size()) != n)
        throw ValidationError("polarized_product requires exactly n factors");

    std::vector<TrigPoly> derivs;
    derivs.reserve(n);
    for (const auto& f : f_list) derivs.push_back(f.derivative());

    TrigPoly product = TrigPoly::constant(Rational(1));
    for (const auto& d : derivs) product = multiply(product, d);

    std::vector<PolarizationTerm> expansion;
    expansion.reserve(static_cast<size_t>(1) << n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        PolarizationTerm t;
        TrigPoly s;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                t.subset.push_back(i);
                s += derivs[i];
            }
        t.sign = ((n - static_cast<int>(t.subset.size())) % 2 == 0) ? 1 : -1;
        t.term = power(s, n);
        expansion.push_back(std::move(t));
    }
    return {std::move(product), std::move(expansion)};
}

std::vector<TrigPoly> fn_step(std::span<const TrigPoly> generators, int n, int freq_cap) {
    if (n < 3 || n % 2 == 0) throw ValidationError("fn_step requires odd n >= 3");
    Echelon ech;
    for (const auto& g : generators) ech.add(g);
    std::vector<TrigPoly> base = ech.basis();
    std::vector<TrigPoly> derivs;
    derivs.reserve(base.size());
    for (const auto& b : base) derivs.push_back(b.derivative());

    // Products over multisets of basis derivatives; by polarization these
    // span the same space as { (phi')^n, phi in span }.
    std::vector<int> idx(n, 0);
    std::function<void(int, int, int)> rec = [&](int pos, int start, int deg_sum) {
        if (deg_sum > freq_cap) return;
        if (pos == n) {
            TrigPoly prod = TrigPoly::constant(Rational(1));
            for (int i = 0; i < n; ++i) prod = multiply(prod, derivs[idx[i]]);
            if (prod.degree() <= freq_cap) ech.add(prod);
            return;
        }
        for (int i = start; i < static_cast<int>(derivs.size()); ++i) {
            idx[pos] = i;
            rec(pos + 1, i, deg_sum + derivs[i].degree());
        }
    };
    rec(0, 0, 0);
    return ech.basis();
}

// ---------------------------------------------------------------------------
// Mode certificates (top-mode peeling induction)
// ---------------------------------------------------------------------------

ModeCertifier::ModeCertifier(int n) : n_(n), basis_(h0_basis(n)) {}

CertPtr ModeCertifier::certificate(int N, Parity parity) {
    if (N < 0) throw ValidationError("mode certificate needs N >= 0");
    auto key = std::make_pair(N, parity == Parity::Cos ? 0 : 1);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    CertPtr result;
    if (N == 0) {
        result = parity == Parity::Cos ? cert_basis(0) : cert_lincomb({});
    } else if (N <= n_ - 1) {
        result = cert_basis(parity == Parity::Cos ? 2 * N - 1 : 2 * N);
    } else {
        const int m0 = N - (n_ - 1);  // 1 <= m0 <= N-1
        const TrigPoly g = TrigPoly::sine(1);
        const CertPtr g_cert = cert_basis(2);

        // fA with fA' = cos(m0 x) (cos target) or sin(m0 x) (sin target).
        TrigPoly fA;
        CertPtr fA_cert;
        if (parity == Parity::Cos) {
            fA = TrigPoly::sine(m0, Rational(1) / m0);
            fA_cert = cert_lincomb({{Rational(1) / m0, certificate(m0, Parity::Sin)}});
        } else {
            fA = TrigPoly::cosine(m0, Rational(-1) / m0);
            fA_cert = cert_lincomb({{Rational(-1) / m0, certificate(m0, Parity::Cos)}});
        }

        const TrigPoly prod_poly =
            multiply(fA.derivative(), power(g.derivative(), n_ - 1));

        CertPtr prod_cert;
        if (parity == Parity::Cos && m0 == 1) {
            // fA == g == sin x: the product is (g')^n directly.
            prod_cert = cert_deriv_power(g_cert, n_);
        } else {
            // Grouped polarization over the tuple (fA, g, ..., g):
            // fA' (g')^{n-1} = (1/n!) sum_{e,k} (-1)^{n-e-k} C(n-1,k) (e fA' + k g')^n
            Rational nfact(1);
            for (int i = 2; i <= n_; ++i) nfact *= i;
            std::vector<std::pair<Rational, CertPtr>> terms;
            Rational binom(1);
            for (int k = 0; k <= n_ - 1; ++k) {
                for (int e = 0; e <= 1; ++e) {
                    if (e == 0 && k == 0) continue;  // zero summand
                    Rational coeff = binom / nfact;
                    if ((n_ - e - k) % 2 != 0) coeff = -coeff;
                    std::vector<std::pair<Rational, CertPtr>> inner;
                    if (e) inner.emplace_back(Rational(1), fA_cert);
                    if (k) inner.emplace_back(Rational(k), g_cert);
                    terms.emplace_back(coeff, cert_deriv_power(cert_lincomb(std::move(inner)), n_));
                }
                binom = binom * (n_ - 1 - k) / (k + 1);
            }
            prod_cert = cert_lincomb(std::move(terms));
        }

        const Rational c_top = parity == Parity::Cos ? prod_poly.cos_coeff(N)
                                                     : prod_poly.sin_coeff(N);
        if (c_top == 0) throw ValidationError("top-mode coefficient vanished in induction");

        std::vector<std::pair<Rational, CertPtr>> terms;
        terms.emplace_back(Rational(1) / c_top, prod_cert);
        for (int l = (parity == Parity::Cos ? 0 : 1); l < N; ++l) {
            Rational a = parity == Parity::Cos ? prod_poly.cos_coeff(l) : prod_poly.sin_coeff(l);
            if (a != 0) terms.emplace_back(-a / c_top, certificate(l, parity));
        }
        result = cert_lincomb(std::move(terms));
    }
    memo_[key] = result;
    return result;
}

// ---------------------------------------------------------------------------
// Vector fields and bracket certificates
// ---------------------------------------------------------------------------

VectorFieldOnTorus lie_bracket(const VectorFieldOnTorus& X, const VectorFieldOnTorus& Y) {
    TrigPoly c = multiply(X.coeff, Y.coeff.derivative());
    c -= multiply(Y.coeff, X.coeff.derivative());
    return {std::move(c)};
}

BracketPtr expr_gen(TrigPoly phi) {
    auto e = std::make_shared<BracketExpression>();
    e->kind = BracketExpression::Kind::Gen;
    e->phi = std::move(phi);
    return e;
}

BracketPtr expr_lin(std::vector<std::pair<Rational, BracketPtr>> terms) {
    auto e = std::make_shared<BracketExpression>();
    e->kind = BracketExpression::Kind::Lin;
    e->terms = std::move(terms);
    return e;
}

BracketPtr expr_bracket(BracketPtr l, BracketPtr r) {
    auto e = std::make_shared<BracketExpression>();
    e->kind = BracketExpression::Kind::Bracket;
    e->left = std::move(l);
    e->right = std::move(r);
    return e;
}

VectorFieldOnTorus evaluate(const BracketExpression& e) {
    switch (e.kind) {
        case BracketExpression::Kind::Gen: {
            TrigPoly d = e.phi.derivative();
            return {multiply(d, d)};
        }
        case BracketExpression::Kind::Lin: {
            TrigPoly r;
            for (const auto& [c, child] : e.terms) r += evaluate(*child).coeff * c;
            return {std::move(r)};
        }
        case BracketExpression::Kind::Bracket:
            return lie_bracket(evaluate(*e.left), evaluate(*e.right));
    }
    throw ValidationError("corrupt bracket expression");
}

FieldCertifier::FieldCertifier() {
    const Rational half(1, 2);
    BracketPtr gen_cos = expr_gen(TrigPoly::cosine(1));  // field sin^2 x
    BracketPtr gen_sin = expr_gen(TrigPoly::sine(1));    // field cos^2 x

    dx_ = expr_lin({{Rational(1), gen_cos}, {Rational(1), gen_sin}});
    modes_[{0, 0}] = dx_;  // constant field 1
    modes_[{2, 0}] = expr_lin({{Rational(1), gen_sin}, {Rational(-1), gen_cos}});
    modes_[{2, 1}] = expr_lin({{Rational(-1), expr_bracket(gen_cos, gen_sin)}});

    // phi_pm = sin x +- 1/2 sin 2x; g = 1/2 (f_+ - f_-) = cos x + cos 3x.
    TrigPoly phi_p = TrigPoly::sine(1) + TrigPoly::sine(2, half);
    TrigPoly phi_m = TrigPoly::sine(1) - TrigPoly::sine(2, half);
    g_ = expr_lin({{half, expr_gen(phi_p)}, {-half, expr_gen(phi_m)}});

    BracketPtr dg = deriv(g_);
    BracketPtr d2g = deriv(dg);
    BracketPtr d3g = deriv(d2g);
    const Rational c98(9, 8), c18(1, 8);
    modes_[{1, 0}] = expr_lin({{c98, g_}, {c18, d2g}});             // cos x
    modes_[{1, 1}] = expr_lin({{-c98, dg}, {-c18, d3g}});           // sin x
    modes_[{3, 0}] = expr_lin({{Rational(1), g_}, {-Rational(1), modes_[{1, 0}]}});  // cos 3x
}

BracketPtr FieldCertifier::deriv(const BracketPtr& e) const {
    return expr_bracket(dx_, e);  // [dx, f dx] = f' dx
}

BracketPtr FieldCertifier::mode(int m, Parity parity) {
    auto key = std::make_pair(m, parity == Parity::Cos ? 0 : 1);
    if (auto it = modes_.find(key); it != modes_.end()) return it->second;

    // Raise modes: A_{m} = [sin((m-1)x) dx, sin x dx],
    //              B_{m} = [cos((m-1)x) dx, sin x dx], m-1 >= 2.
    const int nprev = m - 1;
    const Rational lead = Rational(2) / (1 - nprev);
    const Rational carry = Rational(1 + nprev) / (1 - nprev);
    BracketPtr sin1 = mode(1, Parity::Sin);
    BracketPtr result;
    if (parity == Parity::Sin) {
        BracketPtr A = expr_bracket(mode(nprev, Parity::Sin), sin1);
        result = expr_lin({{lead, A}, {-carry, mode(nprev - 1, Parity::Sin)}});
    } else {
        BracketPtr B = expr_bracket(mode(nprev, Parity::Cos), sin1);
        result = expr_lin({{lead, B}, {-carry, mode(nprev - 1, Parity::Cos)}});
    }
    modes_[key] = result;
    return result;
}

BracketPtr FieldCertifier::certificate(const TrigPoly& p) {
    std::vector<std::pair<Rational, BracketPtr>> terms;
    if (p.a0 != 0) terms.emplace_back(p.a0, dx_);
    for (int m = 1; m <= p.degree(); ++m) {
        if (p.cs[m - 1] != 0) terms.emplace_back(p.cs[m - 1], mode(m, Parity::Cos));
        if (p.sn[m - 1] != 0) terms.emplace_back(p.sn[m - 1], mode(m, Parity::Sin));
    }
    return expr_lin(std::move(terms));
}

}  // namespace kdvsch
