#pragma once

#include <array>
#include <vector>

#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

// Pixel-aligned rectangle, inclusive-exclusive: rows [top, bottom), cols
// [left, right).
struct BBox {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;

  int height() const { return bottom - top; }
  int width() const { return right - left; }
};

// Tight bounding box of the set pixels. Throws std::invalid_argument on an
// empty mask.
BBox mask_bbox(const BinaryMask& mask);

// Moves each side outward by round(factor * extent) of its own dimension,
// then clips to the image. factor must be >= 0 and b must lie inside the
// image.
BBox expand_bbox(const BBox& b, double factor, int image_w, int image_h);

struct OccludedSample {
  RgbImage image;
  BinaryMask visible_mask;
  BinaryMask full_mask;
  BinaryMask occluder_mask;
  int paste_row = 0;
  int paste_col = 0;
  int donor_id = -1;  // index into the donor pool, -1 when no occluder pasted
  double occluded_fraction = 0.0;
};

// Pastes the donor's masked segment over `image` at a location drawn
// uniformly from the admissible range around the object's bounding box
// (each side extended by the donor segment's own bbox extent), clipped to
// the image. Locations hiding more than half of the object are rejected and
// redrawn; after max_attempts rejections this throws std::runtime_error
// ("cannot satisfy 50% coverage rule"). Each attempt consumes exactly two
// rng draws (row, col).
OccludedSample cut_and_paste(const RgbImage& image, const BinaryMask& object_mask,
                             const RgbImage& donor, const BinaryMask& donor_mask, SeededRng& rng,
                             int max_attempts = 50);

struct Donor {
  RgbImage image;
  BinaryMask mask;
};

// Full training-sample synthesis: with probability p_occlude pastes a
// uniformly drawn donor (cut_and_paste), and with probability p_background
// replaces every pixel outside full_mask and outside the pasted occluder
// with the corresponding pixel of a uniformly drawn background image.
// Draw order: occlusion coin, donor index, cut_and_paste location(s),
// background coin, background index. A pool may be empty only if its
// probability is zero.
OccludedSample compose_sample(const RgbImage& image, const BinaryMask& object_mask,
                              const std::vector<Donor>& donor_pool,
                              const std::vector<RgbImage>& background_pool, double p_occlude,
                              double p_background, SeededRng& rng, int max_attempts = 50);

struct PhotometricParams {
  double gamma = 1.0;
  double min_intensity = 0.0;          // output black level; range becomes [m, 255]
  std::array<double, 3> channel_factors{1.0, 1.0, 1.0};
};

// Applies, in order: gamma correction on [0,1]-normalized intensities,
// linear rescale of [0,255] onto [min_intensity, 255], per-channel
// multiplication, then one final round-and-clamp to [0,255]. All arithmetic
// up to the final quantization is in double.
RgbImage photometric_augment(const RgbImage& image, const PhotometricParams& params);

// Draws gamma ~ U[0.5, 2], min_intensity ~ U[0, 127], then the three channel
// factors ~ U[0.8, 1.2] (r, g, b), and applies them.
RgbImage photometric_augment(const RgbImage& image, SeededRng& rng);

struct GeometricParams {
  double crop_top = 0.0;  // per-side crop ratios, fraction of that dimension
  double crop_bottom = 0.0;
  double crop_left = 0.0;
  double crop_right = 0.0;
  bool flip = false;      // left-right mirror
  double angle_deg = 0.0; // rotation about the image center
};

struct GeometricResult {
  RgbImage image;
  std::vector<BinaryMask> masks;
};

// Applies crop, then flip, then rotation, identically to the image and every
// mask. Rotation uses nearest-neighbor resampling about the center
// ((W-1)/2, (H-1)/2) of the cropped image; source pixels falling outside the
// image become black (image) or background (masks). A crop that leaves no
// pixels throws std::invalid_argument.
GeometricResult geometric_augment(const RgbImage& image, const std::vector<BinaryMask>& masks,
                                  const GeometricParams& params);

// Draws crop ratios ~ U[0.2, 0.4] (top, bottom, left, right), a flip with
// probability 0.5, and an angle ~ U[-5, 5] degrees, and applies them.
GeometricResult geometric_augment(const RgbImage& image, const std::vector<BinaryMask>& masks,
                                  SeededRng& rng);

}  // namespace pcrk
