#ifndef MELPROJ_FFT_HPP
#define MELPROJ_FFT_HPP

#include <complex>
#include <vector>

namespace melproj {

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// One-sided spectrum of a real frame: bins 0..n/2 of the DFT.
/// Frame length must be a power of two.
std::vector<std::complex<double>> real_fft_onesided(const std::vector<double>& frame);

}  // namespace melproj

#endif
