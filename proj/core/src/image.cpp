#include "multistitch/image.hpp"

#include "multistitch/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multistitch {

Image::Image(int width, int height, float fill)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
              fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image size");
}

Image Image::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
    throw std::out_of_range("crop rectangle outside image");
  }
  Image out(w, h);
  out.max_value_ = max_value_;
  for (int y = 0; y < h; ++y) {
    const auto src = row(y0 + y).subspan(static_cast<std::size_t>(x0), static_cast<std::size_t>(w));
    std::copy(src.begin(), src.end(), out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.index(0, y)));
  }
  return out;
}

double Image::sample_bilinear(double x, double y) const {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, std::max(width_ - 2, 0));
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, std::max(height_ - 2, 0));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * (*this)(x0, y0) + fx * (*this)(x1, y0);
  const double bottom = (1.0 - fx) * (*this)(x0, y1) + fx * (*this)(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

Image load_image(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw IoError("cannot read image '" + path + "'");

  float max_value = 255.0f;
  switch (mat.depth()) {
    case CV_8U: break;
    case CV_16U: max_value = 65535.0f; break;
    default: throw IoError("unsupported bit depth in '" + path + "' (expected 8 or 16 bit)");
  }
  cv::Mat f;
  mat.convertTo(f, CV_MAKETYPE(CV_32F, mat.channels()));

  Image out(f.cols, f.rows);
  out.set_max_value(max_value);
  const int channels = f.channels();
  if (channels != 1 && channels != 3 && channels != 4) {
    throw IoError("unsupported channel count in '" + path + "'");
  }
  for (int y = 0; y < f.rows; ++y) {
    const float* src = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      if (channels == 1) {
        out(x, y) = src[x];
      } else {
        // OpenCV stores colour as BGR(A).
        const float* px = src + static_cast<std::ptrdiff_t>(x) * channels;
        out(x, y) = kLumaB * px[0] + kLumaG * px[1] + kLumaR * px[2];
      }
    }
  }
  return out;
}

void save_png8(const Image& image, const std::string& path) {
  cv::Mat mat(image.height(), image.width(), CV_8UC1);
  const float scale = 255.0f / image.max_value();
  for (int y = 0; y < image.height(); ++y) {
    auto* dst = mat.ptr<unsigned char>(y);
    const auto src = image.row(y);
    for (int x = 0; x < image.width(); ++x) {
      dst[x] = static_cast<unsigned char>(std::clamp(std::lround(src[static_cast<std::size_t>(x)] * scale), 0L, 255L));
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path, mat);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write image '" + path + "': " + e.what());
  }
  if (!ok) throw IoError("cannot write image '" + path + "'");
}

}  // namespace multistitch
