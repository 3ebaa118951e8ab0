#include "embedkit/image.hpp"

#include <algorithm>

#include "embedkit/errors.hpp"

namespace embedkit {

Image preprocess_image(const Image& pixels, std::size_t target_side) {
  if (pixels.height < 1 || pixels.width < 1) {
    throw ValidationError("preprocess_image: image dimensions must be positive");
  }
  if (target_side < 1) {
    throw ValidationError("preprocess_image: target side must be positive");
  }
  if (pixels.data.size() != pixels.height * pixels.width * 3) {
    throw ValidationError("preprocess_image: pixel buffer size mismatch");
  }

  const std::size_t s = target_side;
  // Crop window in the source, pad offset in the destination; crop and pad
  // are mutually exclusive per axis.
  const std::size_t crop_h = std::min(pixels.height, s);
  const std::size_t crop_w = std::min(pixels.width, s);
  const std::size_t src_r0 = (pixels.height - crop_h) / 2;
  const std::size_t src_c0 = (pixels.width - crop_w) / 2;
  const std::size_t dst_r0 = (s - crop_h) / 2;
  const std::size_t dst_c0 = (s - crop_w) / 2;

  Image out(s, s, 0.0);
  for (std::size_t r = 0; r < crop_h; ++r) {
    for (std::size_t c = 0; c < crop_w; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out.at(dst_r0 + r, dst_c0 + c, ch) = pixels.at(src_r0 + r, src_c0 + c, ch);
      }
    }
  }

  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < s; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double scaled = out.at(r, c, ch) / 255.0;
        out.at(r, c, ch) = (scaled - kImageNormMean[ch]) / kImageNormStd[ch];
      }
    }
  }
  return out;
}

}  // namespace embedkit
