#ifndef KDVSCH_SERIALIZE_HPP
#define KDVSCH_SERIALIZE_HPP

#include "kdvsch/certificates.hpp"
#include "kdvsch/flows.hpp"
#include "kdvsch/spectral.hpp"
#include "kdvsch/synthesis.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace kdvsch {

using Json = nlohmann::json;

// Rationals become {"num": .., "den": ..}; values outside int64 range are
// emitted as decimal strings.
Json rational_to_json(const Rational& r);
Rational rational_from_json(const Json& j);

Json trigpoly_to_json(const TrigPoly& p);
TrigPoly trigpoly_from_json(const Json& j);
Json profile_to_json(const Profile& p);
Profile profile_from_json(const Json& j);

Json state_to_json(const SpectralState& s);
SpectralState state_from_json(const Json& j);

Json program_to_json(const ControlProgram& p, int q);
ControlProgram program_from_json(const Json& j, int* q_out = nullptr);

Json flowmap_to_json(const FlowMap& f);
FlowMap flowmap_from_json(const Json& j);

Json cert_to_json(const SaturationCertificate& c);
CertPtr cert_from_json(const Json& j);

Json bracket_to_json(const BracketExpression& e);
BracketPtr bracket_from_json(const Json& j);

Json word_to_json(const SteeringWord& w);
SteeringWord word_from_json(const Json& j);

// 17 significant digits, round-trip safe.
std::string format_double(double x);

// Writes to <path>.tmp then renames over <path>.
void atomic_write(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace kdvsch

#endif
