#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace embedkit {

// Decoded H x W x 3 pixel buffer, channel-interleaved row-major.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), data(h * w * 3, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return data[(r * width + c) * 3 + ch];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * width + c) * 3 + ch];
  }
};

// Channel statistics used by CLIP-style image encoders.
inline constexpr std::array<double, 3> kImageNormMean = {0.48145466, 0.4578275,
                                                         0.40821073};
inline constexpr std::array<double, 3> kImageNormStd = {0.26862954, 0.26130258,
                                                        0.27577711};

// Fits a [0,255] pixel array to the encoder input size: center-crop each axis
// longer than `target_side`, zero-pad each axis shorter (extra pixel goes to
// the bottom/right when the padding is odd), rescale to [0,1], then normalize
// per channel with kImageNormMean / kImageNormStd.
Image preprocess_image(const Image& pixels, std::size_t target_side);

}  // namespace embedkit
