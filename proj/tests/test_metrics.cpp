#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "uqband/metrics.hpp"
#include "uqband/rng.hpp"

using namespace uqband;

namespace {

ImageGrid smooth_image(int h, int w) {
  ImageGrid g(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      g.at(i, j) = 0.5 + 0.3 * std::sin(0.31 * i) * std::cos(0.17 * j);
  return g;
}

}  // namespace

TEST_CASE("identical images give infinite psnr and unit ssim") {
  const ImageGrid x = smooth_image(32, 32);
  CHECK(std::isinf(psnr(x, x)));
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psnr of a known mse") {
  ImageGrid a(16, 16, 0.5);
  ImageGrid b(16, 16, 0.6);  // mse = 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr and ssim are symmetric and degrade with noise") {
  const ImageGrid x = smooth_image(32, 32);
  NormalSampler rng(1);
  ImageGrid noisy = x;
  for (auto &v : noisy.data()) v += 0.05 * rng();
  CHECK(psnr(x, noisy) == doctest::Approx(psnr(noisy, x)));
  CHECK(ssim(x, noisy) == doctest::Approx(ssim(noisy, x)));
  CHECK(ssim(x, noisy) < 1.0);
  CHECK(ssim(x, noisy) > 0.0);

  ImageGrid noisier = x;
  for (auto &v : noisier.data()) v += 0.2 * rng();
  CHECK(psnr(x, noisier) < psnr(x, noisy));
  CHECK(ssim(x, noisier) < ssim(x, noisy));
}

TEST_CASE("psnr of a sigma=15/255 corruption sits near its expectation") {
  // E[mse] = sigma^2 -> psnr ~ 10 log10(1/sigma^2) = 24.61
  const ImageGrid x = smooth_image(64, 64);
  NormalSampler rng(2);
  ImageGrid noisy = x;
  const double sigma = 15.0 / 255.0;
  for (auto &v : noisy.data()) v += sigma * rng();
  CHECK(psnr(x, noisy) == doctest::Approx(10.0 * std::log10(1.0 / (sigma * sigma))).epsilon(0.02));
}

TEST_CASE("tiny images fall back to the global ssim window") {
  const ImageGrid x = smooth_image(8, 8);
  CHECK(ssim(x, x) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ssim(x, ImageGrid(9, 8)), ShapeError);
}
