#include "kdvsch/serialize.hpp"

#include "kdvsch/errors.hpp"

#include <cstdio>
#include <fstream>

namespace kdvsch {

namespace {

Json int_part_to_json(const boost::multiprecision::cpp_int& v) {
    if (v >= std::numeric_limits<int64_t>::min() && v <= std::numeric_limits<int64_t>::max())
        return v.convert_to<int64_t>();
    return v.str();
}

boost::multiprecision::cpp_int int_part_from_json(const Json& j) {
    if (j.is_string()) return boost::multiprecision::cpp_int(j.get<std::string>());
    return boost::multiprecision::cpp_int(j.get<int64_t>());
}

void expect(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

Json rational_to_json(const Rational& r) {
    return Json{{"num", int_part_to_json(numerator(r))},
                {"den", int_part_to_json(denominator(r))}};
}

Rational rational_from_json(const Json& j) {
    expect(j.contains("num") && j.contains("den"), "rational needs num and den");
    Rational r(int_part_from_json(j["num"]), int_part_from_json(j["den"]));
    return r;
}

Json trigpoly_to_json(const TrigPoly& p) {
    Json cs = Json::array(), sn = Json::array();
    for (const auto& c : p.cs) cs.push_back(rational_to_json(c));
    for (const auto& c : p.sn) sn.push_back(rational_to_json(c));
    return Json{{"a0", rational_to_json(p.a0)}, {"cos", cs}, {"sin", sn}};
}

TrigPoly trigpoly_from_json(const Json& j) {
    TrigPoly p;
    p.a0 = rational_from_json(j.at("a0"));
    for (const auto& c : j.at("cos")) p.cs.push_back(rational_from_json(c));
    for (const auto& c : j.at("sin")) p.sn.push_back(rational_from_json(c));
    p.trim();
    return p;
}

Json profile_to_json(const Profile& p) {
    return Json{{"a0", p.a0}, {"cos", p.cs}, {"sin", p.sn}};
}

Profile profile_from_json(const Json& j) {
    Profile p;
    p.a0 = j.at("a0").get<double>();
    p.cs = j.at("cos").get<std::vector<double>>();
    p.sn = j.at("sin").get<std::vector<double>>();
    p.trim();
    return p;
}

Json state_to_json(const SpectralState& s) {
    std::vector<double> re(s.c.size()), im(s.c.size());
    for (size_t i = 0; i < s.c.size(); ++i) {
        re[i] = s.c[i].real();
        im[i] = s.c[i].imag();
    }
    return Json{{"K", s.K}, {"alpha", s.alpha}, {"re", re}, {"im", im}};
}

SpectralState state_from_json(const Json& j) {
    SpectralState s(j.at("K").get<int>(), j.at("alpha").get<double>());
    auto re = j.at("re").get<std::vector<double>>();
    auto im = j.at("im").get<std::vector<double>>();
    expect(re.size() == s.c.size() && im.size() == s.c.size(),
           "state arrays must have 2K+1 entries");
    for (size_t i = 0; i < s.c.size(); ++i) s.c[i] = Complex(re[i], im[i]);
    return s;
}

Json program_to_json(const ControlProgram& p, int q) {
    Json segs = Json::array();
    for (const auto& s : p.segments) {
        expect(static_cast<int>(s.u.size()) == q, "segment control width mismatch");
        segs.push_back(Json{{"tau", s.tau}, {"u", s.u}, {"label", s.label}});
    }
    return Json{{"q", q}, {"segments", segs}};
}

ControlProgram program_from_json(const Json& j, int* q_out) {
    int q = j.at("q").get<int>();
    expect(q >= 1, "program needs q >= 1");
    ControlProgram p;
    for (const auto& s : j.at("segments")) {
        Segment seg;
        seg.tau = s.at("tau").get<double>();
        seg.u = s.at("u").get<std::vector<double>>();
        seg.label = s.value("label", std::string());
        expect(static_cast<int>(seg.u.size()) == q, "segment control width mismatch");
        expect(seg.tau >= 0, "segment duration must be >= 0");
        p.segments.push_back(std::move(seg));
    }
    if (q_out) *q_out = q;
    return p;
}

Json flowmap_to_json(const FlowMap& f) {
    return Json{{"M", f.M}, {"P", f.P}, {"dP", f.dP}};
}

FlowMap flowmap_from_json(const Json& j) {
    FlowMap f;
    f.M = j.at("M").get<int>();
    f.P = j.at("P").get<std::vector<double>>();
    f.dP = j.at("dP").get<std::vector<double>>();
    f.validate();
    return f;
}

Json cert_to_json(const SaturationCertificate& c) {
    switch (c.kind) {
        case SaturationCertificate::Kind::Basis:
            return Json{{"kind", "basis"}, {"index", c.basis_index}};
        case SaturationCertificate::Kind::LinComb: {
            Json terms = Json::array();
            for (const auto& [coef, sub] : c.terms)
                terms.push_back(Json{{"coeff", rational_to_json(coef)}, {"cert", cert_to_json(*sub)}});
            return Json{{"kind", "lincomb"}, {"terms", terms}};
        }
        case SaturationCertificate::Kind::DerivPower: {
            Json j{{"kind", "cubed"}, {"child", cert_to_json(*c.child)}};
            if (c.power != 3) j["n"] = c.power;
            return j;
        }
    }
    throw ValidationError("unknown certificate node");
}

CertPtr cert_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "basis") return cert_basis(j.at("index").get<int>());
    if (kind == "lincomb") {
        std::vector<std::pair<Rational, CertPtr>> terms;
        for (const auto& t : j.at("terms"))
            terms.emplace_back(rational_from_json(t.at("coeff")), cert_from_json(t.at("cert")));
        return cert_lincomb(std::move(terms));
    }
    if (kind == "cubed") return cert_deriv_power(cert_from_json(j.at("child")), j.value("n", 3));
    throw ValidationError("unknown certificate kind: " + kind);
}

Json bracket_to_json(const BracketExpression& e) {
    switch (e.kind) {
        case BracketExpression::Kind::Gen:
            return Json{{"kind", "gen"}, {"phi", trigpoly_to_json(e.phi)}};
        case BracketExpression::Kind::Lin: {
            Json terms = Json::array();
            for (const auto& [coef, sub] : e.terms)
                terms.push_back(
                    Json{{"coeff", rational_to_json(coef)}, {"expr", bracket_to_json(*sub)}});
            return Json{{"kind", "lin"}, {"terms", terms}};
        }
        case BracketExpression::Kind::Bracket:
            return Json{{"kind", "bracket"},
                        {"left", bracket_to_json(*e.left)},
                        {"right", bracket_to_json(*e.right)}};
    }
    throw ValidationError("unknown bracket node");
}

BracketPtr bracket_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gen") return expr_gen(trigpoly_from_json(j.at("phi")));
    if (kind == "lin") {
        std::vector<std::pair<Rational, BracketPtr>> terms;
        for (const auto& t : j.at("terms"))
            terms.emplace_back(rational_from_json(t.at("coeff")), bracket_from_json(t.at("expr")));
        return expr_lin(std::move(terms));
    }
    if (kind == "bracket")
        return expr_bracket(bracket_from_json(j.at("left")), bracket_from_json(j.at("right")));
    throw ValidationError("unknown bracket kind: " + kind);
}

Json word_to_json(const SteeringWord& w) {
    Json atoms = Json::array();
    for (const auto& atom : w.atoms) {
        if (const auto* p = std::get_if<PhaseAtom>(&atom)) {
            atoms.push_back(Json{{"kind", "phase"}, {"theta", profile_to_json(p->theta)}});
        } else if (const auto* tr = std::get_if<TransportAtom>(&atom)) {
            Json terms = Json::array();
            for (const auto& t : tr->terms)
                terms.push_back(Json{{"sign", t.sign},
                                     {"lambda", t.lambda},
                                     {"phi", profile_to_json(t.phi)}});
            atoms.push_back(Json{{"kind", "transport"}, {"t", tr->t}, {"terms", terms}});
        } else if (const auto* sh = std::get_if<TranslateAtom>(&atom)) {
            atoms.push_back(Json{{"kind", "translate"}, {"delta", sh->delta}});
        } else if (const auto* gp = std::get_if<GlobalPhaseAtom>(&atom)) {
            atoms.push_back(Json{{"kind", "gphase"}, {"c", gp->c}});
        }
    }
    return Json{{"atoms", atoms}};
}

SteeringWord word_from_json(const Json& j) {
    SteeringWord w;
    for (const auto& a : j.at("atoms")) {
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "phase") {
            w.atoms.push_back(PhaseAtom{profile_from_json(a.at("theta"))});
        } else if (kind == "transport") {
            TransportAtom tr;
            tr.t = a.at("t").get<double>();
            for (const auto& t : a.at("terms")) {
                ConeTerm c;
                c.sign = t.at("sign").get<int>();
                c.lambda = t.at("lambda").get<double>();
                c.phi = profile_from_json(t.at("phi"));
                expect(c.sign == 1 || c.sign == -1, "cone sign must be +-1");
                tr.terms.push_back(std::move(c));
            }
            w.atoms.push_back(std::move(tr));
        } else if (kind == "translate") {
            w.atoms.push_back(TranslateAtom{a.at("delta").get<double>()});
        } else if (kind == "gphase") {
            w.atoms.push_back(GlobalPhaseAtom{a.at("c").get<double>()});
        } else {
            throw ValidationError("unknown word atom kind: " + kind);
        }
    }
    return w;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw ValidationError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const Json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ValidationError("bad json in " + path.string() + ": " + e.what());
    }
    return j;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw ValidationError("csv row width mismatch");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    atomic_write(path, out);
}

}  // namespace kdvsch
