#pragma once

#include "uqband/image.hpp"

namespace uqband {

/// PSNR for unit-range images: 10 log10(1 / MSE). Identical inputs give +inf.
double psnr(const ImageGrid &reference, const ImageGrid &candidate);

/// Mean SSIM with the standard 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 on unit dynamic range. Windows are evaluated where they fit
/// entirely inside the image; images smaller than the window fall back to a
/// single global window.
double ssim(const ImageGrid &reference, const ImageGrid &candidate);

}  // namespace uqband
