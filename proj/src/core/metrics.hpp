#pragma once

#include "core/render.hpp"

namespace mmt {

/// Peak signal-to-noise ratio in dB over all channels, capped at 99.0 so the
/// metric stays finite on identical frames.
double psnr(const Frame& a, const Frame& b);

/// Single-scale SSIM on the luma channel: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 255, averaged over all fully-interior
/// windows. Frames must be at least 11 pixels on each side.
double ssim(const Frame& a, const Frame& b);

}  // namespace mmt
