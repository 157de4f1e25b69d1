#include "pcrk/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcrk {

namespace {

void require_pair(const RgbImage& image, const BinaryMask& mask, const char* what) {
  if (image.width != mask.width || image.height != mask.height)
    throw std::invalid_argument(std::string(what) + ": image and mask dimensions differ");
  if (image.width <= 0 || image.height <= 0)
    throw std::invalid_argument(std::string(what) + ": empty image");
  if (image.data.size() != static_cast<std::size_t>(3) * image.width * image.height)
    throw std::invalid_argument(std::string(what) + ": image buffer size mismatch");
}

}  // namespace

BBox mask_bbox(const BinaryMask& mask) {
  BBox b{mask.height, mask.width, 0, 0};
  bool any = false;
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      any = true;
      b.top = std::min(b.top, r);
      b.left = std::min(b.left, c);
      b.bottom = std::max(b.bottom, r + 1);
      b.right = std::max(b.right, c + 1);
    }
  if (!any) throw std::invalid_argument("mask_bbox: empty mask");
  return b;
}

BBox expand_bbox(const BBox& b, double factor, int image_w, int image_h) {
  if (!(factor >= 0.0)) throw std::invalid_argument("expand_bbox: factor must be >= 0");
  if (b.top < 0 || b.left < 0 || b.bottom > image_h || b.right > image_w || b.bottom <= b.top ||
      b.right <= b.left)
    throw std::invalid_argument("expand_bbox: box must lie inside the image");
  const int dh = static_cast<int>(std::llround(factor * b.height()));
  const int dw = static_cast<int>(std::llround(factor * b.width()));
  BBox out;
  out.top = std::max(0, b.top - dh);
  out.bottom = std::min(image_h, b.bottom + dh);
  out.left = std::max(0, b.left - dw);
  out.right = std::min(image_w, b.right + dw);
  return out;
}

OccludedSample cut_and_paste(const RgbImage& image, const BinaryMask& object_mask,
                             const RgbImage& donor, const BinaryMask& donor_mask, SeededRng& rng,
                             int max_attempts) {
  require_pair(image, object_mask, "cut_and_paste");
  require_pair(donor, donor_mask, "cut_and_paste");
  if (!image.same_shape(donor))
    throw std::invalid_argument("cut_and_paste: donor image dimensions differ from target");
  if (max_attempts < 1) throw std::invalid_argument("cut_and_paste: max_attempts must be >= 1");

  const BBox obj = mask_bbox(object_mask);        // throws if object mask empty
  const BBox seg = mask_bbox(donor_mask);         // throws if donor mask empty
  const int H = image.height, W = image.width;

  // Admissible paste locations for the donor segment's top-left corner:
  // the object bbox extended by the segment extent on every side, clipped.
  const int row_lo = std::max(0, obj.top - seg.height());
  const int row_hi = std::min(H - 1, (obj.bottom - 1) + seg.height());
  const int col_lo = std::max(0, obj.left - seg.width());
  const int col_hi = std::min(W - 1, (obj.right - 1) + seg.width());

  const std::size_t full_count = object_mask.count();

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const int pr = row_lo + static_cast<int>(rng.below(row_hi - row_lo + 1));
    const int pc = col_lo + static_cast<int>(rng.below(col_hi - col_lo + 1));
    const int dr = pr - seg.top;
    const int dc = pc - seg.left;

    BinaryMask occluder = BinaryMask::zeros(W, H);
    std::size_t hidden = 0;
    for (int r = seg.top; r < seg.bottom; ++r) {
      const int tr = r + dr;
      if (tr < 0 || tr >= H) continue;
      for (int c = seg.left; c < seg.right; ++c) {
        const int tc = c + dc;
        if (tc < 0 || tc >= W) continue;
        if (!donor_mask.at(r, c)) continue;
        occluder.set(tr, tc, true);
        if (object_mask.at(tr, tc)) ++hidden;
      }
    }

    const double fraction = static_cast<double>(hidden) / static_cast<double>(full_count);
    if (fraction > 0.5) continue;

    OccludedSample out;
    out.image = image;
    out.full_mask = object_mask;
    out.occluder_mask = occluder;
    out.visible_mask = object_mask;
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        if (!occluder.at(r, c)) continue;
        out.visible_mask.set(r, c, false);
        const std::uint8_t* src = donor.pixel(r - dr, c - dc);
        std::uint8_t* dst = out.image.pixel(r, c);
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
      }
    out.paste_row = pr;
    out.paste_col = pc;
    out.occluded_fraction = fraction;
    return out;
  }
  throw std::runtime_error("cut_and_paste: cannot satisfy 50% coverage rule");
}

OccludedSample compose_sample(const RgbImage& image, const BinaryMask& object_mask,
                              const std::vector<Donor>& donor_pool,
                              const std::vector<RgbImage>& background_pool, double p_occlude,
                              double p_background, SeededRng& rng, int max_attempts) {
  require_pair(image, object_mask, "compose_sample");
  if (!(p_occlude >= 0.0 && p_occlude <= 1.0) || !(p_background >= 0.0 && p_background <= 1.0))
    throw std::invalid_argument("compose_sample: probabilities must be in [0, 1]");
  if (p_occlude > 0.0 && donor_pool.empty())
    throw std::invalid_argument("compose_sample: donor pool is empty but p_occlude > 0");
  if (p_background > 0.0 && background_pool.empty())
    throw std::invalid_argument("compose_sample: background pool is empty but p_background > 0");

  OccludedSample out;
  if (rng.uniform() < p_occlude) {
    const std::size_t di = rng.below(donor_pool.size());
    out = cut_and_paste(image, object_mask, donor_pool[di].image, donor_pool[di].mask, rng,
                        max_attempts);
    out.donor_id = static_cast<int>(di);
  } else {
    out.image = image;
    out.full_mask = object_mask;
    out.visible_mask = object_mask;
    out.occluder_mask = BinaryMask::zeros(image.width, image.height);
  }

  if (rng.uniform() < p_background) {
    const std::size_t bi = rng.below(background_pool.size());
    const RgbImage& bg = background_pool[bi];
    if (!bg.same_shape(image))
      throw std::invalid_argument("compose_sample: background dimensions differ from target");
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c) {
        if (out.full_mask.at(r, c) || out.occluder_mask.at(r, c)) continue;
        const std::uint8_t* src = bg.pixel(r, c);
        std::uint8_t* dst = out.image.pixel(r, c);
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
      }
  }
  return out;
}

RgbImage photometric_augment(const RgbImage& image, const PhotometricParams& params) {
  if (!(params.gamma > 0.0)) throw std::invalid_argument("photometric_augment: gamma must be > 0");
  if (!(params.min_intensity >= 0.0 && params.min_intensity <= 255.0))
    throw std::invalid_argument("photometric_augment: min_intensity must be in [0, 255]");
  for (double f : params.channel_factors)
    if (!(f >= 0.0) || !std::isfinite(f))
      throw std::invalid_argument("photometric_augment: channel factors must be finite and >= 0");

  RgbImage out = image;
  const double m = params.min_intensity;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double normalized = image.data[i] / 255.0;
    const double corrected = std::pow(normalized, params.gamma);
    const double rescaled = m + corrected * (255.0 - m);
    const double jittered = rescaled * params.channel_factors[i % 3];
    out.data[i] =
        static_cast<std::uint8_t>(std::clamp(std::llround(jittered), 0ll, 255ll));
  }
  return out;
}

RgbImage photometric_augment(const RgbImage& image, SeededRng& rng) {
  PhotometricParams params;
  params.gamma = rng.uniform(0.5, 2.0);
  params.min_intensity = rng.uniform(0.0, 127.0);
  for (int c = 0; c < 3; ++c) params.channel_factors[c] = rng.uniform(0.8, 1.2);
  return photometric_augment(image, params);
}

GeometricResult geometric_augment(const RgbImage& image, const std::vector<BinaryMask>& masks,
                                  const GeometricParams& params) {
  if (image.width <= 0 || image.height <= 0)
    throw std::invalid_argument("geometric_augment: empty image");
  for (const auto& m : masks)
    if (m.width != image.width || m.height != image.height)
      throw std::invalid_argument("geometric_augment: mask dimensions differ from image");
  for (double r : {params.crop_top, params.crop_bottom, params.crop_left, params.crop_right})
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("geometric_augment: crop ratios must be finite and >= 0");

  const int H = image.height, W = image.width;
  const int ct = static_cast<int>(std::llround(params.crop_top * H));
  const int cb = static_cast<int>(std::llround(params.crop_bottom * H));
  const int cl = static_cast<int>(std::llround(params.crop_left * W));
  const int cr = static_cast<int>(std::llround(params.crop_right * W));
  const int nh = H - ct - cb;
  const int nw = W - cl - cr;
  if (nh <= 0 || nw <= 0)
    throw std::invalid_argument("geometric_augment: crop collapses the image to zero area");

  // Source pixel for output (r, c): undo rotation about the center, then
  // undo the flip, then offset into the crop window.
  const double rad = params.angle_deg * 3.14159265358979323846 / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cx = (nw - 1) / 2.0, cy = (nh - 1) / 2.0;
  const bool rotate = params.angle_deg != 0.0;

  auto source_of = [&](int r, int c, int* sr, int* sc) {
    double x = c, y = r;
    if (rotate) {
      const double dx = c - cx, dy = r - cy;
      x = cs * dx - sn * dy + cx;
      y = sn * dx + cs * dy + cy;
    }
    const int ri = static_cast<int>(std::llround(y));
    int ci = static_cast<int>(std::llround(x));
    if (ri < 0 || ri >= nh || ci < 0 || ci >= nw) return false;
    if (params.flip) ci = nw - 1 - ci;
    *sr = ri + ct;
    *sc = ci + cl;
    return true;
  };

  GeometricResult out;
  out.image = RgbImage::filled(nw, nh, 0, 0, 0);
  for (int r = 0; r < nh; ++r)
    for (int c = 0; c < nw; ++c) {
      int sr, sc;
      if (!source_of(r, c, &sr, &sc)) continue;
      const std::uint8_t* src = image.pixel(sr, sc);
      std::uint8_t* dst = out.image.pixel(r, c);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  out.masks.reserve(masks.size());
  for (const auto& m : masks) {
    BinaryMask nm = BinaryMask::zeros(nw, nh);
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nw; ++c) {
        int sr, sc;
        if (source_of(r, c, &sr, &sc) && m.at(sr, sc)) nm.set(r, c, true);
      }
    out.masks.push_back(std::move(nm));
  }
  return out;
}

GeometricResult geometric_augment(const RgbImage& image, const std::vector<BinaryMask>& masks,
                                  SeededRng& rng) {
  GeometricParams params;
  params.crop_top = rng.uniform(0.2, 0.4);
  params.crop_bottom = rng.uniform(0.2, 0.4);
  params.crop_left = rng.uniform(0.2, 0.4);
  params.crop_right = rng.uniform(0.2, 0.4);
  params.flip = rng.uniform() < 0.5;
  params.angle_deg = rng.uniform(-5.0, 5.0);
  return geometric_augment(image, masks, params);
}

}  // namespace pcrk
