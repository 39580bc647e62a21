#pragma once

// Log-gamma, digamma and trigamma for strictly positive arguments (only
// x >= 1/2 arises here, so no reflection formulas). Digamma and trigamma use
// upward recurrence to x >= 8 followed by Bernoulli asymptotic series;
// log-gamma uses a Lanczos approximation.

namespace tik {

double ln_gamma(double x);
double digamma(double x);
double trigamma(double x);

}  // namespace tik
