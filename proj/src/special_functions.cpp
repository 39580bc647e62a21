#include "tik/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace tik {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

// Lanczos g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
}  // namespace

double ln_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("ln_gamma: argument must be positive");
    const double z = x - 1.0;
    double a = kLanczos[0];
    for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
    const double t = z + 7.5;
    return 0.5 * std::log(kTwoPi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
    double result = 0.0;
    while (x < 8.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^2n)
    const double r = 1.0 / (x * x);
    const double series = r * (1.0 / 12.0 +
                          r * (-1.0 / 120.0 +
                          r * (1.0 / 252.0 +
                          r * (-1.0 / 240.0 +
                          r * (1.0 / 132.0 +
                          r * (-691.0 / 32760.0 +
                          r * (1.0 / 12.0)))))));
    return result + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("trigamma: argument must be positive");
    double result = 0.0;
    while (x < 8.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    // psi'(x) ~ 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
    const double r = 1.0 / (x * x);
    const double series = (1.0 +
                          r * (1.0 / 6.0 +
                          r * (-1.0 / 30.0 +
                          r * (1.0 / 42.0 +
                          r * (-1.0 / 30.0 +
                          r * (5.0 / 66.0 +
                          r * (-691.0 / 2730.0 +
                          r * (7.0 / 6.0)))))))) / x;
    return result + 0.5 * r + series;
}

}  // namespace tik
