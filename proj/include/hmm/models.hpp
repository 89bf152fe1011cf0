#ifndef HMM_MODELS_HPP
#define HMM_MODELS_HPP

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <optional>

#include "hmm/geom.hpp"

namespace hmm {

struct GbfParams {
    double p;  // positive exponent
};

/// Problem data of the convection-diffusion-reaction model
///   dc/dt - lambda div(grad c) + A(g(c), grad c) = f(c).
/// All callables must be pure; they may be invoked concurrently.
struct ModelSpec {
    double lambda = 1.0;                                    // diffusion coefficient > 0
    std::function<double(double, const Vec2&)> A;           // nonlinear operator A(u, q)
    std::function<double(double)> g;                        // convection nonlinearity
    std::function<double(double)> f;                        // reaction nonlinearity

    // The assembler needs A linear in its gradient argument:
    //   A(u, q) = u * (conv_dir . q).
    // (0,0) turns convection off entirely.
    Vec2 conv_dir = Vec2::Zero();

    std::optional<std::array<double, 3>> lipschitz;         // (l1, l2, l3), diagnostics only

    // Manufactured data; exact/exact_gradient may be absent.
    std::function<double(const Vec2&, double)> exact;       // (x, t)
    std::function<Vec2(const Vec2&, double)> exact_gradient;
    std::function<double(const Vec2&, double)> boundary_trace;
    std::function<double(const Vec2&)> initial;

    // Clamp events: g/f see max(c, 0) so fractional powers stay defined on
    // transient undershoots; each clamp is counted here.
    std::shared_ptr<std::atomic<long long>> clamp_counter =
        std::make_shared<std::atomic<long long>>(0);

    bool has_exact() const { return static_cast<bool>(exact); }
    long long clamp_events() const { return clamp_counter->load(); }
};

/// Traveling-wave solution of the generalised Burgers-Fisher equation:
///   [1/2 + 1/2 tanh( (-2p/(4(p+1))) (x + y - ((4+2(p+1)^2)/(2(p+1))) t) )]^(1/p)
double gbf_exact(double x, double y, double t, double p);

/// Analytic spatial gradient of gbf_exact; both components are equal by the
/// x<->y symmetry of the wave.
Vec2 gbf_exact_gradient(double x, double y, double t, double p);

/// The GBF instance: A(u,q) = u (q_x + q_y), g(c) = c^p, f(c) = c (1 - c^p),
/// lambda = 1, exact/boundary/initial wired to gbf_exact.
ModelSpec make_gbf(const GbfParams& params);

struct CustomModelData {
    Vec2 conv_dir = Vec2::Zero();
    std::function<double(const Vec2&, double)> exact;
    std::function<Vec2(const Vec2&, double)> exact_gradient;
    std::function<double(const Vec2&, double)> boundary_trace;
    std::function<double(const Vec2&)> initial;
    std::optional<std::array<double, 3>> lipschitz;
};

/// Generic model from user-supplied callables. Throws InvalidLambda.
ModelSpec make_custom(double lambda, std::function<double(double, const Vec2&)> A,
                      std::function<double(double)> g, std::function<double(double)> f,
                      CustomModelData data = {});

/// The zero-data heat equation (A = g = f = 0), handy for linear sanity runs.
ModelSpec make_heat();

} // namespace hmm

#endif
