#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "pcrk/occlusion.hpp"

using namespace pcrk;

namespace {

RgbImage coord_image(int w, int h, std::uint8_t tag = 0) {
  RgbImage img = RgbImage::filled(w, h, 0, 0, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::uint8_t* px = img.pixel(r, c);
      px[0] = static_cast<std::uint8_t>(r % 256);
      px[1] = static_cast<std::uint8_t>(c % 256);
      px[2] = tag;
    }
  }
  return img;
}

bool same_bytes(const RgbImage& a, const RgbImage& b) {
  return a.same_shape(b) && a.data == b.data;
}

}  // namespace

TEST_SUITE("occlusion") {

TEST_CASE("mask_bbox is tight") {
  BinaryMask mask = BinaryMask::zeros(10, 8);
  mask.set(2, 3, true);
  mask.set(5, 6, true);
  mask.set(4, 1, true);
  const BBox b = mask_bbox(mask);
  CHECK(b.top == 2);
  CHECK(b.bottom == 6);
  CHECK(b.left == 1);
  CHECK(b.right == 7);
  CHECK(b.height() == 4);
  CHECK(b.width() == 6);

  const BinaryMask empty = BinaryMask::zeros(4, 4);
  CHECK_THROWS_AS(mask_bbox(empty), std::invalid_argument);
}

TEST_CASE("expand_bbox grows each side and clips") {
  const BBox b{10, 10, 20, 20};
  const BBox grown = expand_bbox(b, 0.3, 100, 100);
  CHECK(grown.top == 7);
  CHECK(grown.left == 7);
  CHECK(grown.bottom == 23);
  CHECK(grown.right == 23);

  const BBox same = expand_bbox(b, 0.0, 100, 100);
  CHECK(same.top == 10);
  CHECK(same.bottom == 20);
  CHECK(same.left == 10);
  CHECK(same.right == 20);

  const BBox edge{0, 0, 4, 4};
  const BBox clipped = expand_bbox(edge, 1.0, 6, 6);
  CHECK(clipped.top == 0);
  CHECK(clipped.left == 0);
  CHECK(clipped.bottom == 6);
  CHECK(clipped.right == 6);

  CHECK_THROWS_AS(expand_bbox(b, -0.1, 100, 100), std::invalid_argument);
  CHECK_THROWS_AS(expand_bbox(b, 0.3, 15, 100), std::invalid_argument);
}

TEST_CASE("cut_and_paste invariants hold across many seeds") {
  const RgbImage image = coord_image(64, 64, 10);
  const RgbImage donor = coord_image(64, 64, 200);
  const BinaryMask object = testutil::disk_mask(64, 64, 32.0, 32.0, 14.0);
  const BinaryMask donor_mask = testutil::disk_mask(64, 64, 20.0, 20.0, 5.0);
  const BBox seg = mask_bbox(donor_mask);
  const BBox obj = mask_bbox(object);

  std::size_t disjoint = 0, overlapping = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SeededRng rng(seed);
    const OccludedSample s = cut_and_paste(image, object, donor, donor_mask, rng);

    CHECK(s.full_mask.bits == object.bits);
    CHECK(s.occluded_fraction <= 0.5);
    CHECK(s.paste_row >= std::max(0, obj.top - seg.height()));
    CHECK(s.paste_row <= std::min(63, obj.bottom - 1 + seg.height()));
    CHECK(s.paste_col >= std::max(0, obj.left - seg.width()));
    CHECK(s.paste_col <= std::min(63, obj.right - 1 + seg.width()));

    const double want_fraction =
        static_cast<double>(s.full_mask.count() - s.visible_mask.count()) /
        static_cast<double>(s.full_mask.count());
    CHECK(s.occluded_fraction == want_fraction);

    const int dr = s.paste_row - seg.top;
    const int dc = s.paste_col - seg.left;
    bool pixels_ok = true, masks_ok = true;
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const bool occ = s.occluder_mask.at(r, c);
        const bool vis = s.visible_mask.at(r, c);
        const bool full = s.full_mask.at(r, c);
        if (vis != (full && !occ)) masks_ok = false;
        if (vis && !full) masks_ok = false;
        const std::uint8_t* got = s.image.pixel(r, c);
        if (occ) {
          if (!donor_mask.at(r - dr, c - dc)) masks_ok = false;
          const std::uint8_t* want = donor.pixel(r - dr, c - dc);
          if (got[0] != want[0] || got[1] != want[1] || got[2] != want[2]) pixels_ok = false;
        } else {
          const std::uint8_t* want = image.pixel(r, c);
          if (got[0] != want[0] || got[1] != want[1] || got[2] != want[2]) pixels_ok = false;
        }
      }
    }
    CHECK(pixels_ok);
    CHECK(masks_ok);

    if (s.occluded_fraction == 0.0) {
      ++disjoint;
      CHECK(s.visible_mask.bits == s.full_mask.bits);
    } else {
      ++overlapping;
    }
  }
  // the paste range reaches well past the object, so both outcomes occur
  CHECK(disjoint > 0);
  CHECK(overlapping > 0);
}

TEST_CASE("cut_and_paste gives up when no placement passes the coverage rule") {
  RgbImage image = RgbImage::filled(10, 10, 50, 50, 50);
  RgbImage donor = RgbImage::filled(10, 10, 250, 0, 0);
  BinaryMask all = BinaryMask::zeros(10, 10);
  for (auto& b : all.bits) b = 1;

  std::size_t throws = 0, successes = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng rng(seed);
    try {
      const OccludedSample s = cut_and_paste(image, all, donor, all, rng, 1);
      (void)s;
      ++successes;
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("cannot satisfy 50% coverage rule") !=
            std::string::npos);
      ++throws;
    }
  }
  CHECK(throws > 0);
  CHECK(successes > 0);
}

TEST_CASE("cut_and_paste validates shapes") {
  const RgbImage image = coord_image(16, 16);
  const RgbImage wrong = coord_image(8, 8);
  const BinaryMask object = testutil::disk_mask(16, 16, 8.0, 8.0, 4.0);
  const BinaryMask small_mask = testutil::disk_mask(8, 8, 4.0, 4.0, 2.0);
  SeededRng rng(1);
  CHECK_THROWS_AS(cut_and_paste(image, object, wrong, small_mask, rng),
                  std::invalid_argument);
  const BinaryMask empty = BinaryMask::zeros(16, 16);
  const RgbImage donor = coord_image(16, 16, 99);
  const BinaryMask donor_mask = testutil::disk_mask(16, 16, 8.0, 8.0, 3.0);
  CHECK_THROWS_AS(cut_and_paste(image, empty, donor, donor_mask, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(cut_and_paste(image, object, donor, empty, rng), std::invalid_argument);
  CHECK_THROWS_AS(cut_and_paste(image, object, donor, donor_mask, rng, 0),
                  std::invalid_argument);
}

TEST_CASE("compose_sample with zero probabilities is a passthrough") {
  const RgbImage image = coord_image(24, 24, 5);
  const BinaryMask object = testutil::disk_mask(24, 24, 12.0, 12.0, 6.0);
  SeededRng rng(3);
  const OccludedSample s = compose_sample(image, object, {}, {}, 0.0, 0.0, rng);
  CHECK(same_bytes(s.image, image));
  CHECK(s.full_mask.bits == object.bits);
  CHECK(s.visible_mask.bits == object.bits);
  CHECK(s.occluder_mask.count() == 0);
  CHECK(s.donor_id == -1);
  CHECK(s.occluded_fraction == 0.0);
}

TEST_CASE("compose_sample refuses an empty pool with positive probability") {
  const RgbImage image = coord_image(24, 24);
  const BinaryMask object = testutil::disk_mask(24, 24, 12.0, 12.0, 6.0);
  SeededRng rng(4);
  CHECK_THROWS_AS(compose_sample(image, object, {}, {}, 0.5, 0.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(compose_sample(image, object, {}, {}, 0.0, 0.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(compose_sample(image, object, {}, {}, -0.1, 0.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(compose_sample(image, object, {}, {}, 0.0, 1.5, rng),
                  std::invalid_argument);
}

TEST_CASE("compose_sample swaps the background outside the object") {
  const RgbImage image = coord_image(24, 24, 5);
  const BinaryMask object = testutil::disk_mask(24, 24, 12.0, 12.0, 6.0);
  const RgbImage bg = RgbImage::filled(24, 24, 7, 99, 201);
  SeededRng rng(5);
  const OccludedSample s = compose_sample(image, object, {}, {bg}, 0.0, 1.0, rng);
  for (int r = 0; r < 24; ++r) {
    for (int c = 0; c < 24; ++c) {
      const std::uint8_t* got = s.image.pixel(r, c);
      const std::uint8_t* want = object.at(r, c) ? image.pixel(r, c) : bg.pixel(r, c);
      REQUIRE(got[0] == want[0]);
      REQUIRE(got[1] == want[1]);
      REQUIRE(got[2] == want[2]);
    }
  }
}

TEST_CASE("compose_sample takes the occlusion branch at its stated rate") {
  const RgbImage image = coord_image(8, 8, 1);
  BinaryMask object = BinaryMask::zeros(8, 8);
  for (auto& b : object.bits) b = 1;
  Donor donor;
  donor.image = coord_image(8, 8, 2);
  donor.mask = BinaryMask::zeros(8, 8);
  donor.mask.set(3, 3, true);

  SeededRng rng(6);
  std::size_t occluded = 0;
  for (int i = 0; i < 10000; ++i) {
    const OccludedSample s = compose_sample(image, object, {donor}, {}, 0.5, 0.0, rng);
    if (s.donor_id >= 0) ++occluded;
  }
  CHECK(occluded >= 4800);
  CHECK(occluded <= 5200);
}

TEST_CASE("compose_sample is seed-deterministic") {
  const RgbImage image = coord_image(32, 32, 9);
  const BinaryMask object = testutil::disk_mask(32, 32, 16.0, 16.0, 8.0);
  Donor donor;
  donor.image = coord_image(32, 32, 77);
  donor.mask = testutil::disk_mask(32, 32, 10.0, 10.0, 3.0);
  const RgbImage bg = RgbImage::filled(32, 32, 1, 2, 3);

  SeededRng a(55), b(55);
  const OccludedSample sa = compose_sample(image, object, {donor}, {bg}, 0.7, 0.5, a);
  const OccludedSample sb = compose_sample(image, object, {donor}, {bg}, 0.7, 0.5, b);
  CHECK(same_bytes(sa.image, sb.image));
  CHECK(sa.visible_mask.bits == sb.visible_mask.bits);
  CHECK(sa.occluder_mask.bits == sb.occluder_mask.bits);
  CHECK(sa.paste_row == sb.paste_row);
  CHECK(sa.paste_col == sb.paste_col);
  CHECK(sa.donor_id == sb.donor_id);
  CHECK(sa.occluded_fraction == sb.occluded_fraction);
}

TEST_CASE("photometric_augment with identity parameters copies the image") {
  const RgbImage image = coord_image(17, 13, 42);
  const PhotometricParams identity;
  CHECK(same_bytes(photometric_augment(image, identity), image));
}

TEST_CASE("photometric_augment squares mid-gray down to 64") {
  const RgbImage gray = RgbImage::filled(5, 4, 128, 128, 128);
  PhotometricParams p;
  p.gamma = 2.0;
  const RgbImage out = photometric_augment(gray, p);
  for (const std::uint8_t v : out.data) CHECK(v == 64);
}

TEST_CASE("photometric_augment lifts the black level") {
  const RgbImage black = RgbImage::filled(3, 3, 0, 0, 0);
  PhotometricParams p;
  p.min_intensity = 40.0;
  const RgbImage out = photometric_augment(black, p);
  for (const std::uint8_t v : out.data) CHECK(v == 40);
}

TEST_CASE("photometric_augment channel factors act per channel") {
  const RgbImage img = RgbImage::filled(2, 2, 100, 100, 100);
  PhotometricParams p;
  p.channel_factors = {0.5, 1.0, 2.0};
  const RgbImage out = photometric_augment(img, p);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const std::uint8_t* px = out.pixel(r, c);
      CHECK(px[0] == 50);
      CHECK(px[1] == 100);
      CHECK(px[2] == 200);
    }
  }
}

TEST_CASE("photometric_augment clamps to the byte range") {
  const RgbImage img = RgbImage::filled(2, 2, 200, 200, 200);
  PhotometricParams p;
  p.channel_factors = {5.0, 5.0, 5.0};
  const RgbImage out = photometric_augment(img, p);
  for (const std::uint8_t v : out.data) CHECK(v == 255);
}

TEST_CASE("photometric_augment parameter validation") {
  const RgbImage img = RgbImage::filled(2, 2, 10, 10, 10);
  PhotometricParams p;
  p.gamma = 0.0;
  CHECK_THROWS_AS(photometric_augment(img, p), std::invalid_argument);
  p = {};
  p.min_intensity = -1.0;
  CHECK_THROWS_AS(photometric_augment(img, p), std::invalid_argument);
  p = {};
  p.min_intensity = 256.0;
  CHECK_THROWS_AS(photometric_augment(img, p), std::invalid_argument);
  p = {};
  p.channel_factors = {1.0, -0.5, 1.0};
  CHECK_THROWS_AS(photometric_augment(img, p), std::invalid_argument);
}

TEST_CASE("photometric_augment rng wrapper is deterministic") {
  const RgbImage img = coord_image(9, 9, 3);
  SeededRng a(77), b(77);
  CHECK(same_bytes(photometric_augment(img, a), photometric_augment(img, b)));
}

TEST_CASE("geometric_augment with defaults is the identity") {
  const RgbImage img = coord_image(11, 7, 8);
  const BinaryMask mask = testutil::disk_mask(11, 7, 5.0, 3.0, 2.5);
  const GeometricResult out = geometric_augment(img, {mask}, GeometricParams{});
  CHECK(same_bytes(out.image, img));
  REQUIRE(out.masks.size() == 1);
  CHECK(out.masks[0].bits == mask.bits);
}

TEST_CASE("geometric_augment crop offsets rows and columns") {
  const RgbImage img = coord_image(8, 10, 1);
  BinaryMask mask = BinaryMask::zeros(8, 10);
  mask.set(4, 3, true);
  GeometricParams p;
  p.crop_top = 0.2;   // 2 of 10 rows
  p.crop_left = 0.25; // 2 of 8 cols
  const GeometricResult out = geometric_augment(img, {mask}, p);
  REQUIRE(out.image.height == 8);
  REQUIRE(out.image.width == 6);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 6; ++c) {
      const std::uint8_t* got = out.image.pixel(r, c);
      const std::uint8_t* want = img.pixel(r + 2, c + 2);
      REQUIRE(got[0] == want[0]);
      REQUIRE(got[1] == want[1]);
    }
  }
  CHECK(out.masks[0].count() == 1);
  CHECK(out.masks[0].at(2, 1));
}

TEST_CASE("geometric_augment flip mirrors and is an involution") {
  const RgbImage img = coord_image(9, 6, 2);
  const BinaryMask mask = testutil::disk_mask(9, 6, 3.0, 3.0, 2.0);
  GeometricParams p;
  p.flip = true;
  const GeometricResult once = geometric_augment(img, {mask}, p);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 9; ++c) {
      const std::uint8_t* got = once.image.pixel(r, c);
      const std::uint8_t* want = img.pixel(r, 8 - c);
      REQUIRE(got[0] == want[0]);
      REQUIRE(got[1] == want[1]);
    }
  }
  const GeometricResult twice = geometric_augment(once.image, once.masks, p);
  CHECK(same_bytes(twice.image, img));
  CHECK(twice.masks[0].bits == mask.bits);
}

TEST_CASE("small rotations nearly preserve a centered disk") {
  const BinaryMask disk = testutil::disk_mask(64, 64, 32.0, 32.0, 20.0);
  const RgbImage img = coord_image(64, 64, 4);
  for (const double angle : {-5.0, 5.0}) {
    GeometricParams p;
    p.angle_deg = angle;
    const GeometricResult out = geometric_augment(img, {disk}, p);
    const double before = static_cast<double>(disk.count());
    const double after = static_cast<double>(out.masks[0].count());
    CHECK(std::abs(after - before) / before < 0.05);
  }
}

TEST_CASE("geometric_augment rejects a crop that removes everything") {
  const RgbImage img = coord_image(10, 10, 6);
  GeometricParams p;
  p.crop_top = 0.5;
  p.crop_bottom = 0.5;
  CHECK_THROWS_AS(geometric_augment(img, {}, p), std::invalid_argument);
  GeometricParams neg;
  neg.crop_left = -0.2;
  CHECK_THROWS_AS(geometric_augment(img, {}, neg), std::invalid_argument);
  const BinaryMask wrong = BinaryMask::zeros(4, 4);
  CHECK_THROWS_AS(geometric_augment(img, {wrong}, GeometricParams{}),
                  std::invalid_argument);
}

TEST_CASE("geometric_augment rng wrapper is deterministic") {
  const RgbImage img = coord_image(20, 20, 7);
  const BinaryMask mask = testutil::disk_mask(20, 20, 10.0, 10.0, 6.0);
  SeededRng a(91), b(91);
  const GeometricResult ra = geometric_augment(img, {mask}, a);
  const GeometricResult rb = geometric_augment(img, {mask}, b);
  CHECK(same_bytes(ra.image, rb.image));
  CHECK(ra.masks[0].bits == rb.masks[0].bits);
}

}  // TEST_SUITE
