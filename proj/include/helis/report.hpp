#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "forms.hpp"

namespace helis {

inline constexpr const char* engine_version = "0.1.0";

// Default tolerances: structural identities, derivative-pipeline identities,
// and relative quadrature error.
struct Tolerances {
    double structural = 1e-10;
    double pipeline = 1e-9;
    double quadrature_rel = 1e-3;
};

struct CheckRecord {
    std::string id;   // stable dotted identifier
    std::string eq;   // the identity being checked
    double max = 0;
    double rms = 0;
    double tol = 0;
    bool pass = false;
    long excluded = 0;
};

inline CheckRecord make_check(std::string id, std::string eq, const Residual& r, double tol,
                              long excluded = 0) {
    CheckRecord c;
    c.id = std::move(id);
    c.eq = std::move(eq);
    c.max = r.max;
    c.rms = r.rms;
    c.tol = tol;
    c.pass = r.max <= tol;
    c.excluded = excluded;
    return c;
}

inline CheckRecord failed_check(std::string id, std::string eq, std::string diagnostic) {
    CheckRecord c;
    c.id = std::move(id);
    c.eq = std::move(eq) + " [" + std::move(diagnostic) + "]";
    c.max = 9e99;  // sentinel kept finite so JSON stays numeric
    c.rms = c.max;
    c.tol = 0;
    c.pass = false;
    return c;
}

struct VerificationReport {
    std::string scenario;
    std::string version = engine_version;
    std::uint64_t seed = 0;
    int sign = -1;  // resolved hierarchy orientation
    std::vector<CheckRecord> checks;
    double elapsed_ms = 0;

    void add(CheckRecord c) { checks.push_back(std::move(c)); }
    void add(std::vector<CheckRecord> cs) {
        for (auto& c : cs) checks.push_back(std::move(c));
    }

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

}  // namespace helis
