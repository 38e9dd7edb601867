#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace mmt {

namespace {

void check_same_size(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::DimensionMismatch,
                "frames are " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                    " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> luma_of(const Frame& f) {
  std::vector<double> out(size_t(f.width) * size_t(f.height));
  for (size_t p = 0; p < out.size(); ++p)
    out[p] = 0.299 * f.rgb[p * 3] + 0.587 * f.rgb[p * 3 + 1] + 0.114 * f.rgb[p * 3 + 2];
  return out;
}

/// Valid-region Gaussian filter (separable); output is (w-10) x (h-10).
std::vector<double> gaussian_valid(const std::vector<double>& img, int w, int h,
                                   const double* kernel) {
  int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(size_t(ow) * size_t(h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += kernel[k] * img[size_t(y) * size_t(w) + size_t(x + k)];
      rows[size_t(y) * size_t(ow) + size_t(x)] = acc;
    }
  std::vector<double> out(size_t(ow) * size_t(oh));
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k)
        acc += kernel[k] * rows[size_t(y + k) * size_t(ow) + size_t(x)];
      out[size_t(y) * size_t(ow) + size_t(x)] = acc;
    }
  return out;
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  check_same_size(a, b);
  if (a.rgb.empty()) throw Error(ErrorCode::InvalidArgument, "empty frames");
  double sq = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i) {
    double d = double(a.rgb[i]) - double(b.rgb[i]);
    sq += d * d;
  }
  double mse = sq / double(a.rgb.size());
  if (mse == 0.0) return 99.0;
  return std::min(10.0 * std::log10(255.0 * 255.0 / mse), 99.0);
}

double ssim(const Frame& a, const Frame& b) {
  check_same_size(a, b);
  if (a.width < kWindow || a.height < kWindow)
    throw Error(ErrorCode::TooSmall, "SSIM needs frames of at least " + std::to_string(kWindow) +
                                         " pixels per side");

  double kernel[kWindow];
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    double d = double(i - kWindow / 2);
    kernel[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += kernel[i];
  }
  for (double& k : kernel) k /= total;

  const int w = a.width, h = a.height;
  std::vector<double> la = luma_of(a), lb = luma_of(b);
  std::vector<double> laa(la.size()), lbb(la.size()), lab(la.size());
  for (size_t i = 0; i < la.size(); ++i) {
    laa[i] = la[i] * la[i];
    lbb[i] = lb[i] * lb[i];
    lab[i] = la[i] * lb[i];
  }

  auto mu_a = gaussian_valid(la, w, h, kernel);
  auto mu_b = gaussian_valid(lb, w, h, kernel);
  auto m_aa = gaussian_valid(laa, w, h, kernel);
  auto m_bb = gaussian_valid(lbb, w, h, kernel);
  auto m_ab = gaussian_valid(lab, w, h, kernel);

  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

  double acc = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    double va = m_aa[i] - mu_a[i] * mu_a[i];
    double vb = m_bb[i] - mu_b[i] * mu_b[i];
    double cov = m_ab[i] - mu_a[i] * mu_b[i];
    double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
    double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
    acc += num / den;
  }
  return acc / double(mu_a.size());
}

}  // namespace mmt
