#ifndef KDVSCH_STUDIES_HPP
#define KDVSCH_STUDIES_HPP

#include "kdvsch/synthesis.hpp"
#include "kdvsch/verification.hpp"

#include <map>
#include <string>
#include <vector>

namespace kdvsch {

// One convergence study: a parameter sweep with per-point errors, a summary
// of fitted quantities, and a pass flag for the study's pinned checks.
struct StudyResult {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> summary;
    bool pass = false;
};

// Strang splitting vs the dense matrix-exponential oracle, error vs dt.
StudyResult strang_study(double alpha);

// Phase-conjugated free flow e^{i phi/tau^{1/3}} e^{tau L} e^{-i phi/tau^{1/3}}
// against its tau -> 0 limit e^{i (phi')^3}, phi = sin x.
StudyResult satlimit_study(double alpha);

// Trotter product of exact transports for sin^2 x and cos^2 x against the
// unit translation, error vs 1/n.
StudyResult trotter_study(double alpha);

// W_{tau,n} built from exact factors against the transport e^{T_{3 cos^2 x}},
// error vs n at fixed small tau.
StudyResult wtn_study(double alpha);

// Flow period of 1 + sin^2 x, return-map identity check, and a synthesized
// backward transport compared against the characteristics oracle.
StudyResult period_study(double alpha, const TransportParams* params = nullptr);

StudyResult run_study(const std::string& name, double alpha);

}  // namespace kdvsch

#endif
