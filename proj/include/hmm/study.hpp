#ifndef HMM_STUDY_HPP
#define HMM_STUDY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hmm/metrics.hpp"
#include "hmm/solver.hpp"

namespace hmm {

/// One convergence study: a model, a mesh family, a list of levels and a
/// matching time-step schedule.
struct StudyConfig {
    std::string model = "gbf";   // "gbf" or "heat"
    double p = 2.0;              // GBF exponent
    MeshFamilyTag family = MeshFamilyTag::Triangular;
    std::vector<int> levels = {1, 2, 3, 4};
    std::vector<double> dts = {0.01, 0.005, 0.0025, 0.00125};
    double T = 1.0;
    SolverConfig solver;         // dt/T overridden per level
    std::string out_dir;         // empty: no files written
    bool write_csv = true;
    bool write_md = true;
};

/// Per-level run diagnostics kept alongside the error table.
struct LevelResult {
    int level = 0;
    double h = 0.0;
    double err_c = 0.0;       // relative
    double err_grad = 0.0;    // relative
    int max_picard_iters = 0;
    long long clamp_events = 0;
};

struct StudyResult {
    ConvergenceReport report;
    std::vector<LevelResult> levels;
};

/// Parses key=value lines (comma-separated lists, '#' comments). Unknown keys
/// raise ValidationError. Recognised keys: model, p, family, levels, dts, T,
/// dt_default, picard_tol, picard_max, out_dir, formats.
StudyConfig parse_study_config(std::istream& in);

/// Throws ValidationError on inconsistent level/dt lists or bad values.
void validate(const StudyConfig& cfg);

/// Runs every level sequentially and assembles the error/rate table; writes
/// <out_dir>/study.csv and study.md when requested.
StudyResult run_study(const StudyConfig& cfg);

} // namespace hmm

#endif
