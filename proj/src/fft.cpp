#include "fujita/fft.hpp"

#include "fujita/errors.hpp"

#include <fftw3.h>

#include <algorithm>

namespace fujita {

Fft::Fft(int n, int N) {
    if (n < 1 || n > 2) throw ValidationError("FFT supports dimension 1 or 2");
    if (N < 2) throw ValidationError("FFT needs N >= 2");
    total_ = n == 1 ? N : N * N;
    buf_in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * total_));
    buf_out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * total_));
    auto* in = reinterpret_cast<fftw_complex*>(buf_in_);
    auto* out = reinterpret_cast<fftw_complex*>(buf_out_);
    if (n == 1) {
        plan_fwd_ = fftw_plan_dft_1d(N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_inv_ = fftw_plan_dft_1d(N, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        plan_fwd_ = fftw_plan_dft_2d(N, N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_inv_ = fftw_plan_dft_2d(N, N, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
}

Fft::~Fft() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(buf_in_);
    fftw_free(buf_out_);
}

void Fft::execute(void* plan, const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
    if (static_cast<int>(in.size()) != total_) throw ValidationError("FFT input has wrong size");
    std::copy(in.begin(), in.end(), buf_in_);
    fftw_execute(static_cast<fftw_plan>(plan));
    out.assign(buf_out_, buf_out_ + total_);
}

void Fft::forward(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
    execute(plan_fwd_, in, out);
}

void Fft::inverse(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
    execute(plan_inv_, in, out);
    const double scale = 1.0 / total_;
    for (auto& v : out) v *= scale;
}

}  // namespace fujita
