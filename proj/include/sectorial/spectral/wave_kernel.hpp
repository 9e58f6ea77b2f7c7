#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sectorial/spectral/spectral.hpp"

namespace sectorial::spectral {

// B(t, tau, k) = (e^{-it tau} - e^{itk})/(tau + k) - (e^{-it tau} - e^{-itk})/(tau - k),
// evaluated without the removable singularities at tau = -k and tau = k.
std::complex<double> wave_b(double t, double tau, double k);

// dB/dk at k = 0.
std::complex<double> wave_b_slope(double t, double tau);

// F(t, x, tau, xi) of the harmonizable wave representation (xi != 0).
std::complex<double> wave_f(double t, double x, double tau, double xi);

// Covariances of v over the boxes {|tau| < c, |xi| < c}, one matrix per entry
// of `cutoffs` (finite, positive). Points are in (eta, theta).
std::vector<Eigen::MatrixXd> wave_box_moments(const std::vector<Point>& points, std::vector<double> cutoffs,
                                              double beta, const SpectralDiscretization& disc = {});

}  // namespace sectorial::spectral
