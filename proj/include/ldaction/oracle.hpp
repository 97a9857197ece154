#pragma once

#include <string>
#include <vector>

namespace ldaction {

/// One comparison of a numerical result against an analytic value.
struct OracleRow {
    std::string name;
    double computed = 0.0;
    double expected = 0.0;
    /// Bound on the error measure described by `measure`.
    double tolerance = 0.0;
    double error = 0.0;
    std::string measure;
    bool passed = false;
};

/// Analytic checks of the saddle, harmonic and proton-transfer results.
/// Takes a few seconds on one core.
std::vector<OracleRow> run_oracle_rows();

std::string oracle_table_text(const std::vector<OracleRow>& rows);
std::string oracle_table_csv(const std::vector<OracleRow>& rows);

}  // namespace ldaction
