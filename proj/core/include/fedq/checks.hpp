#pragma once

#include "fedq/fedosov.hpp"
#include "fedq/lattice.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fedq {

inline constexpr int kReportFormatVersion = 1;

// One verified identity. `anchor` is a stable key naming the identity.
struct CheckRecord {
    std::string name;
    std::string anchor;
    std::string mode;
    double residual = 0;
    double threshold = 0;
    bool pass = false;
};

struct Report {
    std::string command;
    std::string mode;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json data = nlohmann::json::object();
    std::vector<CheckRecord> records;

    bool passed() const;
    void add(const std::string& name, const std::string& anchor, double residual, double threshold);
    nlohmann::json to_json() const;
    // Rendered from to_json() only.
    static std::string to_text(const nlohmann::json& report);
};

// NAME=VALUE overrides of per-check thresholds.
struct Tolerances {
    std::map<std::string, double> values;
    double get(const std::string& name, double fallback) const;
    static std::pair<std::string, double> parse(const std::string& assignment);
};

struct SuiteOptions {
    int deg = 4;
    int jet_order = -1; // -1: deg + 2
    std::uint64_t seed = 1;
    Tolerances tol;
    // Test fixture: flips the sign of T-hat before the delta/nabla anticommutator check.
    bool inject_t_hat_sign_error = false;

    int jet() const { return jet_order < 0 ? deg + 2 : jet_order; }
};

// Algebra, geometry and Fedosov identities on random charts, or on `chart` when given.
template <class S>
Report verify_suite(const SuiteOptions& opt, const ChartGeometry<S>* chart = nullptr);

// C_0 .. C_{deg/2} of f * h on the chart plus the star-product axioms (k is the third associativity argument).
template <class S>
Report star_report(const ChartGeometry<S>& chart, const Jet<S>& f, const Jet<S>& h, const Jet<S>& k,
                   const SuiteOptions& opt);

// Lattice structure, alpha^R, bridge identity and causality checks on one model.
Report lattice_report(const LatticeModel& model, const SuiteOptions& opt);

} // namespace fedq
