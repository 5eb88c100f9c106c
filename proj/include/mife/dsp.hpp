#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mife::dsp {

// Low-level filter primitives over plain sample buffers. Frequencies are
// normalized to the sampling rate (cycles/sample, Nyquist = 0.5).

// Windowed-sinc (Hamming) lowpass. The tap count is odd and chosen from the
// Hamming transition-width rule (3.3 / transition). Unit DC gain.
std::vector<double> fir_lowpass(double cutoff, double transition);

// Spectral inversion of fir_lowpass; zero DC gain.
std::vector<double> fir_highpass(double cutoff, double transition);

// Applies a symmetric odd-length FIR forward and backward (zero net phase)
// with odd-reflection padding at both ends. Requires x.size() > taps.size().
std::vector<double> filtfilt_fir(std::span<const double> x, std::span<const double> taps);

// Direct-form II transposed second-order section, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2;
  double a1, a2;
};

// Digital Butterworth lowpass of even order via the bilinear transform with
// frequency prewarping. `wn` is the cutoff as a fraction of Nyquist, (0, 1).
std::vector<Biquad> butterworth_lowpass(int order, double wn);

// Forward-backward cascade filtering with odd-reflection padding and
// steady-state initial conditions.
std::vector<double> filtfilt_sos(std::span<const double> x, std::span<const Biquad> sections,
                                 std::size_t padlen);

}  // namespace mife::dsp
