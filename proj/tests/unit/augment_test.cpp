/* Copyright 2026 The LoadForge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "loadforge/augment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "test_support.hpp"

namespace loadforge {
namespace {

using testing::code_of;

ImageTensor gray_row(std::vector<std::uint8_t> v) {
  const auto w = static_cast<std::uint32_t>(v.size());
  return ImageTensor(1, w, 1, std::move(v));
}

std::vector<float> values(const ImageTensor& t) {
  const auto f = t.to_f32();
  return std::vector<float>(f.f32().begin(), f.f32().end());
}

// Double-precision bilinear with the half-pixel convention, written directly
// from the coordinate formula.
std::vector<double> oracle_resize(const ImageTensor& img, std::uint32_t oh, std::uint32_t ow) {
  const auto in = values(img);
  const std::uint32_t h = img.height(), w = img.width(), c = img.channels();
  std::vector<double> out;
  for (std::uint32_t y = 0; y < oh; ++y) {
    double sy = (y + 0.5) * (static_cast<double>(h) / oh) - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const auto y0 = static_cast<std::uint32_t>(std::floor(sy));
    const std::uint32_t y1 = std::min(y0 + 1, h - 1);
    for (std::uint32_t x = 0; x < ow; ++x) {
      double sx = (x + 0.5) * (static_cast<double>(w) / ow) - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const auto x0 = static_cast<std::uint32_t>(std::floor(sx));
      const std::uint32_t x1 = std::min(x0 + 1, w - 1);
      const double fy = sy - y0, fx = sx - x0;
      for (std::uint32_t k = 0; k < c; ++k) {
        auto at = [&](std::uint32_t yy, std::uint32_t xx) { return in[(yy * w + xx) * c + k]; };
        out.push_back((1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                      fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1)));
      }
    }
  }
  return out;
}

TEST(Resize, IdentityAtEqualDims) {
  std::mt19937_64 gen(1);
  const ImageTensor img = testing::random_u8_image(gen, 7, 9);
  EXPECT_EQ(resize_bilinear(img, 7, 9), img.to_f32());
}

TEST(Resize, ConstantStaysConstant) {
  const ImageTensor img(5, 3, 3, std::vector<std::uint8_t>(45, 77));
  for (auto [h, w] : {std::pair{1u, 1u}, {9u, 4u}, {13u, 17u}}) {
    for (float v : values(resize_bilinear(img, h, w))) ASSERT_EQ(v, 77.0f);
  }
}

TEST(Resize, TwoPixelsToOne) {
  EXPECT_EQ(values(resize_bilinear(gray_row({0, 255}), 1, 1)), std::vector<float>{127.5f});
}

TEST(Resize, MatchesDoubleOracle) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 40; ++t) {
    const ImageTensor img = testing::random_u8_image(gen, 1 + gen() % 20, 1 + gen() % 20);
    const std::uint32_t oh = 1 + gen() % 30, ow = 1 + gen() % 30;
    const auto got = values(resize_bilinear(img, oh, ow));
    const auto want = oracle_resize(img, oh, ow);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-3);
  }
}

// Single-precision per-pixel evaluation of the kernel's interpolation
// expressions, without the row cache.
std::vector<float> direct_float_resize(const ImageTensor& img, std::uint32_t oh,
                                       std::uint32_t ow) {
  const auto in = values(img);
  const std::uint32_t h = img.height(), w = img.width(), c = img.channels();
  auto tap = [](std::uint32_t i, std::uint32_t src, std::uint32_t dst) {
    const double s = std::clamp((i + 0.5) * (static_cast<double>(src) / dst) - 0.5, 0.0,
                                static_cast<double>(src - 1));
    const auto lo = static_cast<std::uint32_t>(std::floor(s));
    return std::tuple{lo, std::min(lo + 1, src - 1), static_cast<float>(s - lo)};
  };
  std::vector<float> out;
  for (std::uint32_t y = 0; y < oh; ++y) {
    const auto [y0, y1, fy] = tap(y, h, oh);
    for (std::uint32_t x = 0; x < ow; ++x) {
      const auto [x0, x1, fx] = tap(x, w, ow);
      for (std::uint32_t k = 0; k < c; ++k) {
        auto at = [&](std::uint32_t yy, std::uint32_t xx) { return in[(yy * w + xx) * c + k]; };
        const float top = at(y0, x0) + (at(y0, x1) - at(y0, x0)) * fx;
        const float bottom = at(y1, x0) + (at(y1, x1) - at(y1, x0)) * fx;
        out.push_back(top + (bottom - top) * fy);
      }
    }
  }
  return out;
}

TEST(Resize, BitwiseMatchesDirectFloatEvaluation) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t h = 1 + gen() % 24, w = 1 + gen() % 24;
    const std::uint32_t ch = t % 3 == 0 ? 1 : 3;
    const ImageTensor img = t % 2 == 0 ? testing::random_u8_image(gen, h, w, ch)
                                       : testing::random_f32_image(gen, h, w, ch);
    const std::uint32_t oh = 1 + gen() % 40, ow = 1 + gen() % 40;
    ASSERT_EQ(values(resize_bilinear(img, oh, ow)), direct_float_resize(img, oh, ow))
        << h << "x" << w << " -> " << oh << "x" << ow;
  }
}

TEST(Resize, Errors) {
  const ImageTensor img = gray_row({1, 2});
  EXPECT_EQ(code_of([&] { resize_bilinear(img, 0, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { resize_short_side(img, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { resize_bilinear(ImageTensor(), 2, 2); }), ErrorCode::kInvalidArgument);
}

TEST(ResizeShortSide, Shapes) {
  const auto check = [](std::uint32_t h, std::uint32_t w, std::uint32_t t, std::uint32_t eh,
                        std::uint32_t ew) {
    const ImageTensor out = resize_short_side(ImageTensor::zeros_u8(h, w, 3), t);
    EXPECT_EQ(out.height(), eh) << h << "x" << w << " -> " << t;
    EXPECT_EQ(out.width(), ew) << h << "x" << w << " -> " << t;
  };
  check(256, 512, 256, 256, 512);
  check(100, 200, 50, 50, 100);
  check(99, 200, 50, 50, 101);
  check(200, 99, 50, 101, 50);
  std::mt19937_64 gen(3);
  const ImageTensor img = testing::random_u8_image(gen, 256, 300);
  EXPECT_EQ(resize_short_side(img, 256), img.to_f32());
}

TEST(RandomCrop, FullSizeIsIdentityAndUsesTwoDraws) {
  std::mt19937_64 gen(4);
  const ImageTensor img = testing::random_u8_image(gen, 6, 5);
  SampleRng rng(99);
  EXPECT_EQ(random_crop(img, rng, 6, 5), img);
  SampleRng expect(99);
  expect.next_u64();
  expect.next_u64();
  EXPECT_EQ(rng, expect);
}

TEST(RandomCrop, PinnedStatePicksPixel) {
  // From state 0 the draws are 0xE220A8397B1DCDAF (odd) then
  // 0x6E789E6AA1B965F4 (even): top = 1, left = 0.
  const ImageTensor img(2, 2, 1, std::vector<std::uint8_t>{10, 11, 20, 21});
  SampleRng rng(0);
  EXPECT_EQ(values(random_crop(img, rng, 1, 1)), std::vector<float>{20.0f});
}

TEST(RandomCrop, TooLarge) {
  SampleRng rng(0);
  const ImageTensor img = ImageTensor::zeros_u8(4, 4, 3);
  EXPECT_EQ(code_of([&] { random_crop(img, rng, 5, 4); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { random_crop(img, rng, 0, 4); }), ErrorCode::kInvalidArgument);
}

TEST(Flip, Basics) {
  EXPECT_EQ(hflip(gray_row({1})), gray_row({1}));
  EXPECT_EQ(hflip(gray_row({1, 2})), gray_row({2, 1}));
  std::mt19937_64 gen(5);
  const ImageTensor img = testing::random_u8_image(gen, 4, 7);
  EXPECT_EQ(hflip(hflip(img)), img);
  const ImageTensor rgb(1, 2, 3, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(hflip(rgb), ImageTensor(1, 2, 3, std::vector<std::uint8_t>{4, 5, 6, 1, 2, 3}));
}

TEST(Flip, RandomFlipProbabilityAndDraws) {
  std::mt19937_64 gen(6);
  const ImageTensor img = testing::random_u8_image(gen, 3, 4);
  for (std::uint64_t s = 0; s < 50; ++s) {
    SampleRng never(s), always(s), ref(s);
    EXPECT_EQ(random_hflip(img, never, 0.0), img);
    EXPECT_EQ(random_hflip(img, always, 1.0), hflip(img));
    ref.next_u64();
    EXPECT_EQ(never, ref);
    EXPECT_EQ(always, ref);
  }
  // State 0: u = 0.8833... -> no flip at p = 0.5. State 3: u = 0.1134... -> flip.
  SampleRng s0(0), s3(3);
  EXPECT_EQ(random_hflip(img, s0, 0.5), img);
  EXPECT_EQ(random_hflip(img, s3, 0.5), hflip(img));
}

TEST(ColorJitter, ZeroStrengthIsIdentityWithThreeDraws) {
  std::mt19937_64 gen(7);
  const ImageTensor img = testing::random_f32_image(gen, 5, 5);
  SampleRng rng(42), ref(42);
  EXPECT_EQ(color_jitter(img, rng, 0, 0, 0), img);
  for (int i = 0; i < 3; ++i) ref.next_u64();
  EXPECT_EQ(rng, ref);
}

TEST(ColorJitter, Stages) {
  std::mt19937_64 gen(8);
  const ImageTensor img = testing::random_f32_image(gen, 4, 4);
  for (float v : values(adjust_brightness(img, 0.0f))) ASSERT_EQ(v, 0.0f);
  std::vector<float> gray;
  for (int i = 0; i < 16; ++i) gray.insert(gray.end(), 3, static_cast<float>(i * 10));
  const ImageTensor g(4, 4, 3, gray);
  EXPECT_EQ(adjust_saturation(g, 1.7f), g);
  EXPECT_EQ(adjust_saturation(g, 0.2f), g);
  // Contrast 0 collapses every channel value to the mean luma.
  const auto c0 = values(adjust_contrast(img, 0.0f));
  for (float v : c0) ASSERT_EQ(v, c0[0]);
  EXPECT_EQ(code_of([&] { adjust_contrast(ImageTensor::zeros_f32(2, 2, 1), 0.5f); }),
            ErrorCode::kInvalidArgument);
}

TEST(ColorJitter, MatchesStageComposition) {
  std::mt19937_64 gen(9);
  const ImageTensor img = testing::random_f32_image(gen, 6, 6);
  SampleRng rng(5), draws(5);
  const float fb = static_cast<float>(jitter_factor(draws, 0.4));
  const float fc = static_cast<float>(jitter_factor(draws, 0.3));
  const float fs = static_cast<float>(jitter_factor(draws, 0.2));
  const ImageTensor want = adjust_saturation(adjust_contrast(adjust_brightness(img, fb), fc), fs);
  EXPECT_EQ(color_jitter(img, rng, 0.4, 0.3, 0.2), want);
  EXPECT_EQ(rng, draws);
}

TEST(ColorJitter, FactorRange) {
  SampleRng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double f = jitter_factor(rng, 0.4);
    ASSERT_GE(f, 0.6);
    ASSERT_LE(f, 1.4);
    const double g = jitter_factor(rng, 1.5);
    ASSERT_GE(g, 0.0);
    ASSERT_LE(g, 2.5);
  }
  EXPECT_EQ(code_of([&] { jitter_factor(rng, -0.1); }), ErrorCode::kInvalidArgument);
}

TEST(Normalize, Examples) {
  const ImageTensor white(1, 1, 3, std::vector<std::uint8_t>{255, 255, 255});
  EXPECT_EQ(values(normalize(white, {1, 1, 1}, {1, 1, 1})), (std::vector<float>{0, 0, 0}));
  const ImageTensor black(1, 1, 3, std::vector<std::uint8_t>{0, 0, 0});
  EXPECT_EQ(values(normalize(black, {0.5f, 0.5f, 0.5f}, {0.5f, 0.5f, 0.5f})),
            (std::vector<float>{-1, -1, -1}));
  std::mt19937_64 gen(10);
  const ImageTensor img = testing::random_u8_image(gen, 3, 3);
  const auto in = values(img);
  const auto out = values(normalize(img, {0, 0, 0}, {1, 1, 1}));
  for (std::size_t i = 0; i < in.size(); ++i) ASSERT_EQ(out[i], in[i] / 255.0f);
  EXPECT_EQ(code_of([&] { normalize(img, {0, 0, 0}, {1, 0, 1}); }), ErrorCode::kInvalidArgument);
}

TEST(Fusion, BitwiseEqualsComposedOps) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 1000; ++t) {
    const std::uint32_t h = 1 + gen() % 24, w = 1 + gen() % 24;
    const ImageTensor img = (t % 2 == 0) ? testing::random_u8_image(gen, h, w)
                                         : testing::random_f32_image(gen, h, w);
    const std::uint32_t oh = 1 + gen() % h, ow = 1 + gen() % w;
    const Rgb mean = {static_cast<float>(gen() % 1000) / 1000.0f, 0.456f, 0.406f};
    const Rgb std = {0.229f, 0.05f + static_cast<float>(gen() % 100) / 100.0f, 0.225f};
    const std::uint64_t seed = gen();
    SampleRng a(seed), b(seed);
    const ImageTensor fused = fused_crop_normalize(img, a, oh, ow, mean, std);
    const ImageTensor composed = normalize(random_crop(img, b, oh, ow), mean, std);
    ASSERT_EQ(fused, composed) << "case " << t;
    ASSERT_EQ(a, b);
  }
}

TEST(Fusion, FullCropWithUnitStd) {
  std::mt19937_64 gen(12);
  const ImageTensor img = testing::random_u8_image(gen, 4, 4);
  SampleRng rng(0);
  const auto out = values(fused_crop_normalize(img, rng, 4, 4, {0, 0, 0}, {1, 1, 1}));
  const auto in = values(img);
  for (std::size_t i = 0; i < in.size(); ++i) ASSERT_EQ(out[i], in[i] / 255.0f);
}

TEST(Chain, Validation) {
  EXPECT_NO_THROW(make_preset(AugmentPreset::kFew).validate());
  AugmentChain two_norm{{Normalize{}, Normalize{}}};
  EXPECT_EQ(code_of([&] { two_norm.validate(); }), ErrorCode::kInvalidArgument);
  AugmentChain norm_first{{Normalize{}, RandomHFlip{}}};
  EXPECT_EQ(code_of([&] { norm_first.validate(); }), ErrorCode::kInvalidArgument);
  AugmentChain bad_p{{RandomHFlip{1.5}}};
  EXPECT_EQ(code_of([&] { bad_p.validate(); }), ErrorCode::kInvalidArgument);
  AugmentChain bad_jitter{{ColorJitter{-1, 0, 0}}};
  EXPECT_EQ(code_of([&] { bad_jitter.validate(); }), ErrorCode::kInvalidArgument);
  AugmentChain bad_std{{Normalize{kDefaultMean, {1, 0, 1}}}};
  EXPECT_EQ(code_of([&] { bad_std.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Chain, Presets) {
  const AugmentChain few = make_preset(AugmentPreset::kFew);
  ASSERT_EQ(few.ops.size(), 4u);
  EXPECT_EQ(few.ops[0], AugmentOp(ResizeShortSide{256}));
  EXPECT_EQ(few.ops[1], AugmentOp(RandomCrop{224, 224}));
  EXPECT_EQ(few.ops[2], AugmentOp(RandomHFlip{0.5}));
  EXPECT_EQ(few.ops[3], AugmentOp(Normalize{kDefaultMean, kDefaultStd}));
  const AugmentChain ext = make_preset(AugmentPreset::kExtensive);
  ASSERT_EQ(ext.ops.size(), 5u);
  EXPECT_EQ(ext.ops[3], AugmentOp(ColorJitter{0.4, 0.4, 0.4}));
  EXPECT_EQ(parse_preset("few"), AugmentPreset::kFew);
  EXPECT_EQ(parse_preset("extensive"), AugmentPreset::kExtensive);
  EXPECT_FALSE(parse_preset("lots").has_value());
  EXPECT_EQ(preset_name(AugmentPreset::kExtensive), "extensive");
}

TEST(Chain, ApplyChainContracts) {
  std::mt19937_64 gen(13);
  const ImageTensor img = testing::random_u8_image(gen, 5, 6);
  EXPECT_EQ(apply_chain(img, AugmentChain{}, 1), img.to_f32());

  const ImageTensor big = testing::random_u8_image(gen, 256, 256);
  for (auto p : {AugmentPreset::kFew, AugmentPreset::kExtensive}) {
    const ImageTensor out = apply_chain(big, make_preset(p), 77);
    EXPECT_EQ(out.height(), 224u);
    EXPECT_EQ(out.width(), 224u);
    EXPECT_EQ(out.channels(), 3u);
    EXPECT_EQ(out.dtype(), DType::kF32);
    EXPECT_EQ(out, apply_chain(big, make_preset(p), 77));
  }
  // Short side >= 224 but not 256: still 224x224.
  const ImageTensor odd = testing::random_u8_image(gen, 230, 400);
  EXPECT_EQ(apply_chain(odd, make_preset(AugmentPreset::kExtensive), 3).height(), 224u);
}

TEST(Chain, ErrorsCarryOpPosition) {
  const AugmentChain chain{{RandomHFlip{0.5}, RandomCrop{10, 10}}};
  try {
    apply_chain(ImageTensor::zeros_u8(4, 4, 3), chain, 0);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("op #1"), std::string::npos) << e.what();
  }
}

TEST(Chain, DrawCountsAreFixed) {
  std::mt19937_64 gen(14);
  const ImageTensor img = testing::random_u8_image(gen, 40, 50);
  const std::vector<std::pair<AugmentOp, int>> ops = {
      {ResizeShortSide{30}, 0}, {RandomCrop{20, 20}, 2},  {RandomHFlip{0.5}, 1},
      {ColorJitter{}, 3},       {Normalize{}, 0},         {FusedCropNormalize{8, 8}, 2},
  };
  for (const auto& [op, draws] : ops) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      SampleRng rng(s), ref(s);
      apply_op(img.to_f32(), op, rng);
      for (int i = 0; i < draws; ++i) ref.next_u64();
      ASSERT_EQ(rng, ref) << op_name(op);
    }
  }
}

}  // namespace
}  // namespace loadforge
