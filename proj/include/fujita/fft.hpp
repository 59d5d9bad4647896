#pragma once

#include <complex>
#include <vector>

namespace fujita {

/// Complex-to-complex FFT on an N^n periodic grid (n = 1 or 2), row-major.
/// forward() is unnormalized; inverse() divides by N^n so inverse(forward(x)) = x.
class Fft {
public:
    Fft(int n, int N);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const noexcept { return total_; }

    void forward(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out);
    void inverse(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out);

private:
    void execute(void* plan, const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out);

    int total_;
    std::complex<double>* buf_in_;
    std::complex<double>* buf_out_;
    void* plan_fwd_;
    void* plan_inv_;
};

}  // namespace fujita
