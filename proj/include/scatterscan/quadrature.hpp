#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace scatterscan {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule of the given order (order >= 1).
const GaussRule& gauss_legendre(int order);

/// Integral of f over [a, b] with a fixed Gauss-Legendre rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, int order = 8)
{
    const GaussRule& rule = gauss_legendre(order);
    double half = 0.5 * (b - a);
    double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 48);

/// Adaptive bisection driven by an 8-point Gauss-Legendre rule; recursion stops
/// when the two halves agree with the whole to `tol` (absolute).
double adaptive_gauss(const std::function<double(double)>& f, double a, double b, double tol,
                      int max_depth = 30);

} // namespace scatterscan
