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

// Image augmentation operators.
//
// Every random op draws a fixed number of SampleRng values regardless of the
// values drawn, so a chain's output depends only on (image, chain, seed):
//
//   ResizeShortSide     0 draws
//   RandomCrop          2 (top, then left)
//   RandomHFlip         1
//   ColorJitter         3 (brightness, contrast, saturation)
//   Normalize           0
//   FusedCropNormalize  2 (same as RandomCrop)

#ifndef LOADFORGE_AUGMENT_HPP_
#define LOADFORGE_AUGMENT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loadforge/image.hpp"
#include "loadforge/rng.hpp"

namespace loadforge {

using Rgb = std::array<float, 3>;

inline constexpr Rgb kDefaultMean = {0.485f, 0.456f, 0.406f};
inline constexpr Rgb kDefaultStd = {0.229f, 0.224f, 0.225f};

struct ResizeShortSide {
  std::uint32_t target = 256;
  friend bool operator==(const ResizeShortSide&, const ResizeShortSide&) = default;
};
struct RandomCrop {
  std::uint32_t out_h = 224;
  std::uint32_t out_w = 224;
  friend bool operator==(const RandomCrop&, const RandomCrop&) = default;
};
struct RandomHFlip {
  double p = 0.5;
  friend bool operator==(const RandomHFlip&, const RandomHFlip&) = default;
};
struct ColorJitter {
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  friend bool operator==(const ColorJitter&, const ColorJitter&) = default;
};
struct Normalize {
  Rgb mean = kDefaultMean;
  Rgb std = kDefaultStd;
  friend bool operator==(const Normalize&, const Normalize&) = default;
};
struct FusedCropNormalize {
  std::uint32_t out_h = 224;
  std::uint32_t out_w = 224;
  Rgb mean = kDefaultMean;
  Rgb std = kDefaultStd;
  friend bool operator==(const FusedCropNormalize&, const FusedCropNormalize&) = default;
};

using AugmentOp = std::variant<ResizeShortSide, RandomCrop, RandomHFlip, ColorJitter,
                               Normalize, FusedCropNormalize>;

std::string op_name(const AugmentOp& op);

struct AugmentChain {
  std::vector<AugmentOp> ops;

  // Checks op parameters and that at most one Normalize-family op exists and
  // it is last. Throws InvalidArgument.
  void validate() const;
  friend bool operator==(const AugmentChain&, const AugmentChain&) = default;
};

enum class AugmentPreset { kFew, kExtensive };

std::optional<AugmentPreset> parse_preset(std::string_view name);
std::string_view preset_name(AugmentPreset preset);

struct PresetParams {
  std::uint32_t short_side = 256;
  std::uint32_t crop = 224;
  double flip_p = 0.5;
  double jitter = 0.4;
  Rgb mean = kDefaultMean;
  Rgb std = kDefaultStd;
};

// Few: [ResizeShortSide, RandomCrop, RandomHFlip, Normalize].
// Extensive: Few with ColorJitter inserted before Normalize.
AugmentChain make_preset(AugmentPreset preset, const PresetParams& params = {});

// --- individual operators -------------------------------------------------

// Half-pixel-center bilinear resize; f32 output, no rounding.
ImageTensor resize_bilinear(const ImageTensor& img, std::uint32_t out_h, std::uint32_t out_w);
ImageTensor resize_short_side(const ImageTensor& img, std::uint32_t target);
ImageTensor random_crop(const ImageTensor& img, SampleRng& rng, std::uint32_t out_h,
                        std::uint32_t out_w);
ImageTensor hflip(const ImageTensor& img);
ImageTensor random_hflip(const ImageTensor& img, SampleRng& rng, double p);
ImageTensor color_jitter(const ImageTensor& img, SampleRng& rng, double brightness,
                         double contrast, double saturation);
ImageTensor normalize(const ImageTensor& img, const Rgb& mean, const Rgb& std);
ImageTensor fused_crop_normalize(const ImageTensor& img, SampleRng& rng,
                                 std::uint32_t out_h, std::uint32_t out_w,
                                 const Rgb& mean, const Rgb& std);

// Deterministic jitter stages with explicit factors. A factor of exactly 1
// returns the input unchanged. Inputs are widened to f32; RGB only.
ImageTensor adjust_brightness(const ImageTensor& img, float factor);
ImageTensor adjust_contrast(const ImageTensor& img, float factor);
ImageTensor adjust_saturation(const ImageTensor& img, float factor);

// Jitter factor from one draw: uniform in [max(0, 1 - s), 1 + s].
double jitter_factor(SampleRng& rng, double strength);

// --- chains ---------------------------------------------------------------

ImageTensor apply_op(const ImageTensor& img, const AugmentOp& op, SampleRng& rng);

// Applies ops in order sharing `rng`. Errors carry the op position, offset by
// `first_position` when `ops` is a slice of a longer chain.
ImageTensor apply_ops(ImageTensor img, std::span<const AugmentOp> ops, SampleRng& rng,
                      std::size_t first_position = 0);

// Whole chain from a fresh SampleRng(seed); output always f32.
ImageTensor apply_chain(const ImageTensor& img, const AugmentChain& chain, std::uint64_t seed);

}  // namespace loadforge

#endif  // LOADFORGE_AUGMENT_HPP_
