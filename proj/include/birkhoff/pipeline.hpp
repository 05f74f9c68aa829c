#pragma once

#include "birkhoff/cells.hpp"
#include "birkhoff/equilibria.hpp"
#include "birkhoff/recurrence.hpp"
#include "birkhoff/structure.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace birkhoff {

/// Scenario plus the census and attractor estimate every later stage needs.
struct Setup {
    Scenario scenario;
    ConeSpec cone;
    IntegratorConfig integrator;
    std::vector<EquilibriumRecord> equilibria;
    AttractorBounds bounds;

    BackwardContext backward(double t_max) const;
    double attractor_diameter() const { return bounds.box.diameter(); }
};

Setup prepare(const Scenario& s, const ConeSpec& cone, std::uint64_t seed, const IntegratorConfig& cfg = {});

struct RecurrenceOptions {
    std::vector<int> depths{3, 4, 5, 6};
    BoxMapOptions map;
    CertifyOptions certify;
    double margin = 1e-6;          // dichotomy margin
    double shell = 1e-3;           // audit shell around joint boundaries
    double tail_time = 100.0;      // omega-limit tails over [T/2, T]
    int tail_samples = 100;
    double backward_time = 50.0;
    bool targets = true;           // targets and B1/B2 evidence for unordered components
};

struct RecurrenceAnalysis {
    SubdivisionResult subdivision;
    std::vector<SpatialComponent> spatial;
    std::vector<ComponentRecord> records;
    double resolution = 0.0;       // box diameter at the final depth
};

RecurrenceAnalysis analyze_recurrence(const Setup& setup, const RecurrenceOptions& opts);

struct AuditSummary {
    AuditReport intersection;
    AuditReport connecting;
    AuditReport absorbing;
    AuditReport omega;
    std::vector<LimitSetReport> limit_sets;
    std::size_t verdict_violations = 0;
    std::size_t inconclusive = 0;

    std::size_t violations() const;
};

AuditSummary audit_components(const Setup& setup, const RecurrenceAnalysis& analysis, const RecurrenceOptions& opts);

void write_audit_summary(std::ostream& os, const AuditSummary& a);
void write_equilibria_csv(std::ostream& os, const std::vector<EquilibriumRecord>& eq);

/// Named scenario with the recurrence settings used for it by `verify`.
struct SuiteEntry {
    std::string label;
    Scenario scenario;
    RecurrenceOptions options;
};

/// linear2, bistable n = 2 and 3, may_leonard and lv_cycle.
std::vector<SuiteEntry> scenario_suite(std::uint64_t seed);

}  // namespace birkhoff
