#include "chiralprop/spectral.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace chiralprop {

namespace {
// FFTW's planner is not reentrant.
std::mutex planner_mutex;
}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> detuning_grid(std::size_t n, double dtau)
{
    if (n == 0 || !(dtau > 0.0)) throw std::invalid_argument("detuning_grid: need n > 0 and dtau > 0");
    std::vector<double> dp(n);
    const double step = 2.0 * std::numbers::pi / (static_cast<double>(n) * dtau);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    for (std::size_t k = 0; k < n; ++k) {
        auto ks = static_cast<std::ptrdiff_t>(k);
        if (ks >= half && n > 1) ks -= static_cast<std::ptrdiff_t>(n);
        dp[k] = step * static_cast<double>(ks);
    }
    return dp;
}

struct Fft::Plans {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan backward = nullptr;  // exp(+i ...), used for to_spectrum
    fftw_plan forward = nullptr;   // exp(-i ...), used for to_envelope
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>())
{
    if (n == 0) throw std::invalid_argument("Fft: empty grid");
    const int len = static_cast<int>(n);
    std::lock_guard<std::mutex> lock(planner_mutex);
    plans_->in = fftw_alloc_complex(n);
    plans_->out = fftw_alloc_complex(n);
    plans_->backward = fftw_plan_dft_1d(len, plans_->in, plans_->out, FFTW_BACKWARD, FFTW_ESTIMATE);
    plans_->forward = fftw_plan_dft_1d(len, plans_->in, plans_->out, FFTW_FORWARD, FFTW_ESTIMATE);
}

Fft::~Fft()
{
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plans_->backward);
    fftw_destroy_plan(plans_->forward);
    fftw_free(plans_->in);
    fftw_free(plans_->out);
}

std::vector<complex> Fft::to_spectrum(const std::vector<complex>& envelope)
{
    if (envelope.size() != n_) throw std::invalid_argument("Fft: size mismatch");
    std::copy(envelope.begin(), envelope.end(), reinterpret_cast<complex*>(plans_->in));
    fftw_execute(plans_->backward);
    const auto* out = reinterpret_cast<const complex*>(plans_->out);
    return std::vector<complex>(out, out + n_);
}

std::vector<complex> Fft::to_envelope(const std::vector<complex>& spectrum)
{
    if (spectrum.size() != n_) throw std::invalid_argument("Fft: size mismatch");
    std::copy(spectrum.begin(), spectrum.end(), reinterpret_cast<complex*>(plans_->in));
    fftw_execute(plans_->forward);
    const auto* out = reinterpret_cast<const complex*>(plans_->out);
    std::vector<complex> e(out, out + n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (complex& v : e) v *= scale;
    return e;
}

}  // namespace chiralprop
