#include "hmm/models.hpp"

#include <cmath>

#include "hmm/errors.hpp"

namespace hmm {

namespace {

double gbf_phase(double x, double y, double t, double p) {
    const double speed = (4.0 + 2.0 * (p + 1.0) * (p + 1.0)) / (2.0 * (p + 1.0));
    return (-2.0 * p / (4.0 * (p + 1.0))) * (x + y - speed * t);
}

} // namespace

double gbf_exact(double x, double y, double t, double p) {
    const double base = 0.5 + 0.5 * std::tanh(gbf_phase(x, y, t, p));
    return std::pow(base, 1.0 / p);
}

Vec2 gbf_exact_gradient(double x, double y, double t, double p) {
    const double theta = gbf_phase(x, y, t, p);
    const double base = 0.5 + 0.5 * std::tanh(theta);
    const double sech2 = 1.0 / (std::cosh(theta) * std::cosh(theta));
    const double k = -2.0 * p / (4.0 * (p + 1.0));
    const double dcomp = (1.0 / p) * std::pow(base, 1.0 / p - 1.0) * 0.5 * sech2 * k;
    return Vec2(dcomp, dcomp);
}

ModelSpec make_gbf(const GbfParams& params) {
    const double p = params.p;
    if (!(p > 0.0)) throw ValidationError("GBF exponent p must be positive");

    ModelSpec m;
    m.lambda = 1.0;
    m.conv_dir = Vec2(1.0, 1.0);
    auto counter = m.clamp_counter;
    auto clamp = [counter](double c) {
        if (c < 0.0) {
            counter->fetch_add(1, std::memory_order_relaxed);
            return 0.0;
        }
        return c;
    };
    m.g = [p, clamp](double c) { return std::pow(clamp(c), p); };
    m.f = [p, clamp](double c) { return c * (1.0 - std::pow(clamp(c), p)); };
    m.A = [](double u, const Vec2& q) { return u * (q.x() + q.y()); };
    m.lipschitz = std::array<double, 3>{1.0, p, 1.0 + p};
    m.exact = [p](const Vec2& x, double t) { return gbf_exact(x.x(), x.y(), t, p); };
    m.exact_gradient = [p](const Vec2& x, double t) {
        return gbf_exact_gradient(x.x(), x.y(), t, p);
    };
    m.boundary_trace = m.exact;
    m.initial = [p](const Vec2& x) { return gbf_exact(x.x(), x.y(), 0.0, p); };
    return m;
}

ModelSpec make_custom(double lambda, std::function<double(double, const Vec2&)> A,
                      std::function<double(double)> g, std::function<double(double)> f,
                      CustomModelData data) {
    if (!(lambda > 0.0))
        throw InvalidLambda("diffusion coefficient must be positive, got " +
                            std::to_string(lambda));
    ModelSpec m;
    m.lambda = lambda;
    m.A = std::move(A);
    m.g = std::move(g);
    m.f = std::move(f);
    m.conv_dir = data.conv_dir;
    m.exact = std::move(data.exact);
    m.exact_gradient = std::move(data.exact_gradient);
    m.boundary_trace = std::move(data.boundary_trace);
    m.initial = std::move(data.initial);
    m.lipschitz = data.lipschitz;
    if (!m.boundary_trace) m.boundary_trace = [](const Vec2&, double) { return 0.0; };
    if (!m.initial) m.initial = [](const Vec2&) { return 0.0; };
    return m;
}

ModelSpec make_heat() {
    return make_custom(
        1.0, [](double, const Vec2&) { return 0.0; }, [](double) { return 0.0; },
        [](double) { return 0.0; });
}

} // namespace hmm
