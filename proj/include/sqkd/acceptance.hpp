#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqkd::acceptance {

struct CriterionResult {
    std::string id;
    std::string description;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the ten release criteria (closed-form reproductions, Monte Carlo
/// consistency, oracle cross-checks, detection statistics, determinism).
/// One result per criterion, in order. `progress`, when non-null, receives a
/// pass/fail line per criterion as it completes.
std::vector<CriterionResult> run_all(std::uint64_t seed, int threads, std::ostream* progress);

bool all_passed(const std::vector<CriterionResult>& results);

void write_report_text(const std::vector<CriterionResult>& results, std::ostream& os);
void write_report_csv(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace sqkd::acceptance
