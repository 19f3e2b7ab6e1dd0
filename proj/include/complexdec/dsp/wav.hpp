// wav.hpp
// Minimal RIFF/WAVE IO: PCM 16- and 24-bit, mono.

#pragma once

#include <string>

#include "complexdec/dsp/stft.hpp"

namespace complexdec::dsp {

// Reads mono PCM16/PCM24. Rates other than 48 kHz are accepted with a
// warning on stderr and stored as-is (no resampling).
WaveSegment read_wav(const std::string& path);

void write_wav(const std::string& path, const WaveSegment& wave, int bits_per_sample = 16);

}  // namespace complexdec::dsp
