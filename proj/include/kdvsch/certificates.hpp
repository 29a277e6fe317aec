#ifndef KDVSCH_CERTIFICATES_HPP
#define KDVSCH_CERTIFICATES_HPP

#include "kdvsch/trigpoly.hpp"

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace kdvsch {

// ---------------------------------------------------------------------------
// Exact linear algebra on trigonometric polynomials.
// Coefficient ordering: column 0 = constant, 2m-1 = cos(mx), 2m = sin(mx),
// i.e. by frequency then parity (cos before sin).
// ---------------------------------------------------------------------------

class Echelon {
  public:
    // Returns true if the polynomial enlarged the span.
    bool add(const TrigPoly& p);
    bool contains(const TrigPoly& p) const;
    int rank() const { return static_cast<int>(rows_.size()); }
    std::vector<TrigPoly> basis() const;

    // Least-squares-free exact representation: coefficients c with
    // p = sum c_i basis()[i], empty if p is outside the span.
    std::vector<Rational> coordinates(const TrigPoly& p) const;

  private:
    std::vector<std::vector<Rational>> rows_;  // reduced row echelon form
    std::vector<int> pivots_;
    std::vector<Rational> reduce(const TrigPoly& p, std::vector<Rational>* combo) const;
};

std::vector<Rational> to_coeff_vector(const TrigPoly& p, int dim);
TrigPoly from_coeff_vector(std::span<const Rational> v);

// ---------------------------------------------------------------------------
// Saturation certificates: expression trees over a declared generating set.
// ---------------------------------------------------------------------------

struct SaturationCertificate;
using CertPtr = std::shared_ptr<const SaturationCertificate>;

struct SaturationCertificate {
    enum class Kind { Basis, LinComb, DerivPower };
    Kind kind;
    int basis_index = -1;                                  // Basis
    std::vector<std::pair<Rational, CertPtr>> terms;       // LinComb
    CertPtr child;                                         // DerivPower
    int power = 3;                                         // odd n of the DerivPower node
};

CertPtr cert_basis(int index);
CertPtr cert_lincomb(std::vector<std::pair<Rational, CertPtr>> terms);
CertPtr cert_deriv_power(CertPtr child, int n);

TrigPoly evaluate(const SaturationCertificate& c, std::span<const TrigPoly> basis);
int cert_depth(const SaturationCertificate& c);
// Largest |numerator|,|denominator| appearing in the tree, as double.
double cert_coeff_magnitude(const SaturationCertificate& c);

// H_0 for a given odd n: {1, cos x, sin x, ..., cos((n-1)x), sin((n-1)x)}.
std::vector<TrigPoly> h0_basis(int n);

// ---------------------------------------------------------------------------
// Closure machinery.
// ---------------------------------------------------------------------------

struct PolarizationTerm {
    int sign;                   // (-1)^(n-|eps|)
    std::vector<int> subset;    // indices with eps_i = 1
    TrigPoly term;              // (sum_{i in subset} f_i')^n
};

// Returns f_1'...f_n' and the 2^n-term polarization expansion whose weighted
// sum of n-th powers reproduces n! times the product. Odd n >= 3 only.
std::pair<TrigPoly, std::vector<PolarizationTerm>> polarized_product(
    std::span<const TrigPoly> f_list, int n);

// One saturation step: basis of F_n(span(generators)) echelonized by
// frequency, candidates capped at freq_cap.
std::vector<TrigPoly> fn_step(std::span<const TrigPoly> generators, int n, int freq_cap);

enum class Parity { Cos, Sin };

// Builds certificates cos(Nx)/sin(Nx) in terms of h0_basis(n) following the
// top-mode peeling induction. Memoizes across calls.
class ModeCertifier {
  public:
    explicit ModeCertifier(int n);
    CertPtr certificate(int N, Parity parity);
    int n() const { return n_; }
    const std::vector<TrigPoly>& basis() const { return basis_; }

  private:
    int n_;
    std::vector<TrigPoly> basis_;
    std::map<std::pair<int, int>, CertPtr> memo_;
};

// ---------------------------------------------------------------------------
// Vector fields and Lie-bracket certificates.
// ---------------------------------------------------------------------------

struct VectorFieldOnTorus {
    TrigPoly coeff;  // the f in f dx
};

// [f dx, g dx] = (f g' - g f') dx
VectorFieldOnTorus lie_bracket(const VectorFieldOnTorus& X, const VectorFieldOnTorus& Y);

struct BracketExpression;
using BracketPtr = std::shared_ptr<const BracketExpression>;

struct BracketExpression {
    enum class Kind { Gen, Lin, Bracket };
    Kind kind;
    TrigPoly phi;                                            // Gen: field is (phi')^2
    std::vector<std::pair<Rational, BracketPtr>> terms;      // Lin
    BracketPtr left, right;                                  // Bracket
};

BracketPtr expr_gen(TrigPoly phi);
BracketPtr expr_lin(std::vector<std::pair<Rational, BracketPtr>> terms);
BracketPtr expr_bracket(BracketPtr l, BracketPtr r);

VectorFieldOnTorus evaluate(const BracketExpression& e);

// Certificates p dx in Lie({(phi')^2 dx}) via the sin^2/cos^2 seed brackets
// and the mode-raising induction. Memoizes per-mode expressions.
class FieldCertifier {
  public:
    FieldCertifier();
    BracketPtr certificate(const TrigPoly& p);

  private:
    BracketPtr dx_, g_;                    // dx and (cos x + cos 3x) dx
    std::map<std::pair<int, int>, BracketPtr> modes_;  // (freq, 0=cos/1=sin)
    BracketPtr mode(int m, Parity parity);
    BracketPtr deriv(const BracketPtr& e) const;  // [dx, e]
};

}  // namespace kdvsch

#endif
