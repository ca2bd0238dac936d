#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "chiralprop/medium_params.hpp"

namespace chiralprop {

bool is_power_of_two(std::size_t n);

/// Signed probe detunings conjugate to a time grid of n samples spaced dtau:
/// dp_k = 2 pi k / (n dtau), k = 0..n/2-1, -n/2..-1 (FFT order).
std::vector<double> detuning_grid(std::size_t n, double dtau);

/**
 * Discrete Fourier pair for envelopes varying as exp(-i dp tau):
 *
 *   F(dp_k) = sum_j E(tau_j) exp(+i dp_k tau_j),
 *   E(tau_j) = (1/n) sum_k F(dp_k) exp(-i dp_k tau_j).
 *
 * Owns FFTW plans and scratch buffers; one instance per thread.
 */
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }

    std::vector<complex> to_spectrum(const std::vector<complex>& envelope);
    std::vector<complex> to_envelope(const std::vector<complex>& spectrum);

private:
    struct Plans;
    std::size_t n_;
    std::unique_ptr<Plans> plans_;
};

/// Spectral amplitudes of both probe components on the detuning grid.
struct Spectrum {
    std::vector<double> dp;
    std::vector<complex> omegaE;
    std::vector<complex> omegaB;
    double k0 = 0.0;      ///< carrier wavenumber [gamma/c]
    double omega0 = 0.0;  ///< carrier frequency [gamma]
};

}  // namespace chiralprop
