#pragma once

#include <complex>
#include <vector>

namespace svskit {

/// In-place iterative radix-2 FFT. Size must be a power of two. The inverse
/// transform includes the 1/N scaling.
void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse);

} // namespace svskit
