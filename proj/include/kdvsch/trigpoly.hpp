#ifndef KDVSCH_TRIGPOLY_HPP
#define KDVSCH_TRIGPOLY_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

namespace kdvsch {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double r) { return r; }

// Real trigonometric polynomial a0 + sum_m (cs[m-1] cos(mx) + sn[m-1] sin(mx)),
// canonical form: trailing all-zero (cos,sin) pairs trimmed.
template <class C>
struct TrigPolyT {
    C a0{};
    std::vector<C> cs;  // cs[m-1] multiplies cos(mx)
    std::vector<C> sn;  // sn[m-1] multiplies sin(mx)

    TrigPolyT() = default;
    explicit TrigPolyT(C constant) : a0(std::move(constant)) {}

    static TrigPolyT constant(C c) { return TrigPolyT(std::move(c)); }
    static TrigPolyT cosine(int m, C c = C(1)) {
        TrigPolyT p;
        if (m == 0) { p.a0 = std::move(c); return p; }
        p.ensure(m);
        p.cs[m - 1] = std::move(c);
        p.trim();
        return p;
    }
    static TrigPolyT sine(int m, C c = C(1)) {
        TrigPolyT p;
        if (m == 0) return p;
        p.ensure(m);
        p.sn[m - 1] = std::move(c);
        p.trim();
        return p;
    }

    int degree() const { return static_cast<int>(cs.size()); }

    C cos_coeff(int m) const {
        if (m == 0) return a0;
        return m <= degree() ? cs[m - 1] : C(0);
    }
    C sin_coeff(int m) const { return (m >= 1 && m <= degree()) ? sn[m - 1] : C(0); }

    bool is_zero() const { return a0 == C(0) && cs.empty(); }

    void ensure(int m) {
        if (m > degree()) {
            cs.resize(m, C(0));
            sn.resize(m, C(0));
        }
    }

    void trim() {
        while (!cs.empty() && cs.back() == C(0) && sn.back() == C(0)) {
            cs.pop_back();
            sn.pop_back();
        }
    }

    // Accumulate c*cos(kx) / c*sin(kx) allowing k < 0.
    void add_cos(int k, const C& c) {
        if (c == C(0)) return;
        k = std::abs(k);
        if (k == 0) { a0 += c; return; }
        ensure(k);
        cs[k - 1] += c;
    }
    void add_sin(int k, const C& c) {
        if (c == C(0) || k == 0) return;
        if (k < 0) { add_sin(-k, C(-c)); return; }
        ensure(k);
        sn[k - 1] += c;
    }

    TrigPolyT& operator+=(const TrigPolyT& o) {
        a0 += o.a0;
        ensure(o.degree());
        for (int m = 1; m <= o.degree(); ++m) {
            cs[m - 1] += o.cs[m - 1];
            sn[m - 1] += o.sn[m - 1];
        }
        trim();
        return *this;
    }
    TrigPolyT& operator-=(const TrigPolyT& o) {
        a0 -= o.a0;
        ensure(o.degree());
        for (int m = 1; m <= o.degree(); ++m) {
            cs[m - 1] -= o.cs[m - 1];
            sn[m - 1] -= o.sn[m - 1];
        }
        trim();
        return *this;
    }
    TrigPolyT& operator*=(const C& c) {
        a0 *= c;
        for (auto& v : cs) v *= c;
        for (auto& v : sn) v *= c;
        trim();
        return *this;
    }

    friend TrigPolyT operator+(TrigPolyT a, const TrigPolyT& b) { return a += b; }
    friend TrigPolyT operator-(TrigPolyT a, const TrigPolyT& b) { return a -= b; }
    friend TrigPolyT operator*(TrigPolyT a, const C& c) { return a *= c; }
    friend TrigPolyT operator*(const C& c, TrigPolyT a) { return a *= c; }
    friend TrigPolyT operator-(TrigPolyT a) { return a *= C(-1); }

    friend bool operator==(const TrigPolyT& a, const TrigPolyT& b) {
        return a.a0 == b.a0 && a.cs == b.cs && a.sn == b.sn;
    }

    // Term-wise derivative; constant term of the result is zero.
    TrigPolyT derivative() const {
        TrigPolyT d;
        d.ensure(degree());
        for (int m = 1; m <= degree(); ++m) {
            d.cs[m - 1] = C(m) * sn[m - 1];
            d.sn[m - 1] = C(-m) * cs[m - 1];
        }
        d.trim();
        return d;
    }

    double eval(double x) const {
        double v = to_double(a0);
        for (int m = 1; m <= degree(); ++m)
            v += to_double(cs[m - 1]) * std::cos(m * x) + to_double(sn[m - 1]) * std::sin(m * x);
        return v;
    }
};

// Exact product via product-to-sum identities; degree <= deg(a) + deg(b).
template <class C>
TrigPolyT<C> multiply(const TrigPolyT<C>& a, const TrigPolyT<C>& b) {
    TrigPolyT<C> r;
    const C half = C(1) / C(2);
    r += a * b.a0;  // everything times b's constant; the loop handles the rest
    for (int k = 1; k <= b.degree(); ++k) {
        const C& bc = b.cs[k - 1];
        const C& bs = b.sn[k - 1];
        if (bc != C(0)) {
            r.add_cos(k, a.a0 * bc);
            for (int m = 1; m <= a.degree(); ++m) {
                const C& ac = a.cs[m - 1];
                const C& as = a.sn[m - 1];
                if (ac != C(0)) {  // cos(mx)cos(kx)
                    C c = half * ac * bc;
                    r.add_cos(m - k, c);
                    r.add_cos(m + k, c);
                }
                if (as != C(0)) {  // sin(mx)cos(kx)
                    C c = half * as * bc;
                    r.add_sin(m + k, c);
                    r.add_sin(m - k, c);
                }
            }
        }
        if (bs != C(0)) {
            r.add_sin(k, a.a0 * bs);
            for (int m = 1; m <= a.degree(); ++m) {
                const C& ac = a.cs[m - 1];
                const C& as = a.sn[m - 1];
                if (ac != C(0)) {  // cos(mx)sin(kx)
                    C c = half * ac * bs;
                    r.add_sin(m + k, c);
                    r.add_sin(k - m, c);
                }
                if (as != C(0)) {  // sin(mx)sin(kx)
                    C c = half * as * bs;
                    r.add_cos(m - k, c);
                    r.add_cos(m + k, C(-c));
                }
            }
        }
    }
    r.trim();
    return r;
}

template <class C>
TrigPolyT<C> power(const TrigPolyT<C>& p, int n) {
    TrigPolyT<C> r = TrigPolyT<C>::constant(C(1));
    for (int i = 0; i < n; ++i) r = multiply(r, p);
    return r;
}

using TrigPoly = TrigPolyT<Rational>;
using Profile = TrigPolyT<double>;

inline Profile to_profile(const TrigPoly& p) {
    Profile q;
    q.a0 = to_double(p.a0);
    q.cs.resize(p.cs.size());
    q.sn.resize(p.sn.size());
    for (size_t i = 0; i < p.cs.size(); ++i) {
        q.cs[i] = to_double(p.cs[i]);
        q.sn[i] = to_double(p.sn[i]);
    }
    q.trim();
    return q;
}

// |a0| + sum (|a_m| + |b_m|): certified sup-norm bound.
inline double sup_bound(const Profile& p) {
    double s = std::abs(p.a0);
    for (int m = 1; m <= p.degree(); ++m)
        s += std::abs(p.cs[m - 1]) + std::abs(p.sn[m - 1]);
    return s;
}

// sum m(|a_m| + |b_m|): certified bound on sup |p'|.
inline double deriv_sup_bound(const Profile& p) {
    double s = 0;
    for (int m = 1; m <= p.degree(); ++m)
        s += m * (std::abs(p.cs[m - 1]) + std::abs(p.sn[m - 1]));
    return s;
}

}  // namespace kdvsch

#endif
