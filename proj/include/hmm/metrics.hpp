#ifndef HMM_METRICS_HPP
#define HMM_METRICS_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hmm/gdm.hpp"

namespace hmm {

/// Quality functionals of one discretisation: the discrete Poincaré constant,
/// the consistency defect on probe functions and the limit-conformity defect
/// on probe fields.
struct QualityReport {
    double coercivity = 0.0;                     // C_D
    std::map<std::string, double> consistency;   // probe tag -> S_D
    std::map<std::string, double> conformity;    // probe tag -> W_D
    double h = 0.0;
};

struct ConvergenceRow {
    double h = 0.0;
    double err_c = 0.0;
    double err_grad = 0.0;
    std::optional<double> rate_c;     // absent on the first row
    std::optional<double> rate_grad;
};

/// Table of relative errors and observed orders across refinement levels.
struct ConvergenceReport {
    std::string model_tag;
    std::string family_tag;
    std::vector<double> dt_schedule;
    std::vector<ConvergenceRow> rows;

    std::string to_csv() const;       // columns: h,err_c,rate_c,err_grad,rate_grad
    std::string to_markdown() const;
};

/// C_D = max ||Pi_D u|| / ||grad_D u|| over the homogeneous space, i.e. the
/// square root of the largest eigenvalue of M u = mu S u (M the cell mass
/// matrix, S the gradient Gram matrix restricted to free dofs). Dense solve
/// on small spaces, inverse power iteration otherwise. Throws EigSolveFailed.
double coercivity_constant(const Discretization& disc);

/// Minimizer over the homogeneous space of
///   ||Pi_D u - w||^2 + ||grad_D u - grad w||^2.
DofVector interpolant_PD(const Discretization& disc, const ScalarField& w,
                         const VectorField& grad_w);

/// S_D(w): sum of the two misfit norms evaluated at interpolant_PD(w).
double consistency_defect(const Discretization& disc, const ScalarField& w,
                          const VectorField& grad_w);

/// W_D(xi): dual norm of u -> <grad_D u, xi> + <Pi_D u, div xi> in the
/// grad_D norm; one SPD solve S z = r, W_D = sqrt(r.z).
double limit_conformity_defect(const Discretization& disc, const VectorField& xi,
                               const ScalarField& div_xi);

/// (absolute, relative) L2 distance between the cell values and the cell
/// averages of `exact`, weighted by cell areas; the denominator is the full
/// quadrature norm of `exact`. See README for why cell averages (and not the
/// raw piecewise-constant mismatch) are compared.
std::pair<double, double> l2_error_solution(const Discretization& disc, const DofVector& dofs,
                                            const ScalarField& exact);

/// (absolute, relative) L2 distance between the stabilized per-half-diamond
/// gradient and the half-diamond averages of `exact_grad`; denominator is the
/// quadrature norm of `exact_grad`.
std::pair<double, double> l2_error_gradient(const Discretization& disc, const DofVector& dofs,
                                            const VectorField& exact_grad);

/// Observed orders: rate_i = ln(e_{i-1}/e_i) / ln(h_{i-1}/h_i), one fewer
/// entry than the inputs. Throws NonPositiveError on non-positive errors,
/// ValidationError on length/monotonicity violations.
std::vector<double> rates(const std::vector<double>& errors, const std::vector<double>& hs);

/// Standard probes: w = sin(pi x) sin(pi y) (zero trace) and
/// xi = curl (xy(1-x)(1-y))^2 (divergence-free, zero tangential trace).
ScalarField probe_bubble();
VectorField probe_bubble_gradient();
VectorField probe_curl_field();

/// C_D, S_D and W_D on the standard probes.
QualityReport quality_report(const Discretization& disc);

} // namespace hmm

#endif
