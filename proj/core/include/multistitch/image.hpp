#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace multistitch {

/// Row-major single-channel image in native intensity units.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  float operator()(int x, int y) const { return pixels_[index(x, y)]; }
  float& operator()(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const float> row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_),
            static_cast<std::size_t>(width_)};
  }
  std::span<const float> pixels() const { return pixels_; }
  std::span<float> pixels() { return pixels_; }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  /// Copy of the rectangle [x0, x0+w) x [y0, y0+h); must lie inside the image.
  Image crop(int x0, int y0, int w, int h) const;

  /// Bilinear sample; coordinates must lie in [0, width-1] x [0, height-1].
  double sample_bilinear(double x, double y) const;

  /// Largest representable intensity of the source format (255 or 65535).
  float max_value() const { return max_value_; }
  void set_max_value(float v) { max_value_ = v; }

  bool operator==(const Image& other) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  float max_value_ = 255.0f;
  std::vector<float> pixels_;
};

/// Luma weights applied to RGB input.
inline constexpr float kLumaR = 0.299f;
inline constexpr float kLumaG = 0.587f;
inline constexpr float kLumaB = 0.114f;

/// Loads an 8/16-bit grayscale or RGB(A) PNG/TIFF as grayscale. Throws IoError.
Image load_image(const std::string& path);

/// Writes an 8-bit grayscale PNG; intensities are scaled by 255/max_value,
/// rounded and clamped. Throws IoError.
void save_png8(const Image& image, const std::string& path);

}  // namespace multistitch
