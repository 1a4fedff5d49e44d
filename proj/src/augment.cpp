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

#include <algorithm>
#include <cmath>

#include "loadforge/error.hpp"

namespace loadforge {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string dims(std::uint32_t h, std::uint32_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

// Shared by normalize and the fused op; both must evaluate exactly this.
inline float normalize_value(float v, float mean, float std) {
  return (v / 255.0f - mean) / std;
}

// Evaluated in double so that R == G == B gives back exactly that value.
inline float luma(float r, float g, float b) {
  return static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b);
}

void require_rgb(const ImageTensor& img, const char* op) {
  if (img.channels() != 3) {
    fail(ErrorCode::kInvalidArgument,
         std::string(op) + " needs 3 channels, got " + std::to_string(img.channels()));
  }
}

void check_crop(const ImageTensor& img, std::uint32_t out_h, std::uint32_t out_w) {
  if (out_h == 0 || out_w == 0) fail(ErrorCode::kInvalidArgument, "crop size must be >= 1");
  if (out_h > img.height() || out_w > img.width()) {
    fail(ErrorCode::kInvalidArgument, "crop " + dims(out_h, out_w) + " larger than image " +
                                          dims(img.height(), img.width()));
  }
}

void check_std(const Rgb& std) {
  for (float s : std) {
    if (!(s > 0.0f) || !std::isfinite(s)) {
      fail(ErrorCode::kInvalidArgument, "normalize std components must be positive");
    }
  }
}

// Runs `fn(span<const T>)` over the tensor's storage as its element type.
template <class Fn>
auto with_pixels(const ImageTensor& img, Fn&& fn) {
  if (img.dtype() == DType::kU8) return fn(img.u8());
  return fn(img.f32());
}

template <class T>
ImageTensor make_tensor(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                        std::vector<T> data) {
  return ImageTensor(h, w, c, std::move(data));
}

struct AxisTap {
  std::uint32_t lo;
  std::uint32_t hi;
  float frac;
};

std::vector<AxisTap> bilinear_taps(std::uint32_t src, std::uint32_t dst) {
  std::vector<AxisTap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  const double max_coord = static_cast<double>(src - 1);
  for (std::uint32_t i = 0; i < dst; ++i) {
    const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, max_coord);
    const auto lo = static_cast<std::uint32_t>(std::floor(s));
    taps[i] = {lo, std::min(lo + 1, src - 1), static_cast<float>(s - lo)};
  }
  return taps;
}

}  // namespace

std::string op_name(const AugmentOp& op) {
  return std::visit(Overloaded{
                        [](const ResizeShortSide&) { return "ResizeShortSide"; },
                        [](const RandomCrop&) { return "RandomCrop"; },
                        [](const RandomHFlip&) { return "RandomHFlip"; },
                        [](const ColorJitter&) { return "ColorJitter"; },
                        [](const Normalize&) { return "Normalize"; },
                        [](const FusedCropNormalize&) { return "FusedCropNormalize"; },
                    },
                    op);
}

void AugmentChain::validate() const {
  std::size_t normalizers = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    const std::string where = "op #" + std::to_string(i) + " (" + op_name(op) + "): ";
    std::visit(
        Overloaded{
            [&](const ResizeShortSide& o) {
              if (o.target == 0) fail(ErrorCode::kInvalidArgument, where + "target must be >= 1");
            },
            [&](const RandomCrop& o) {
              if (o.out_h == 0 || o.out_w == 0) {
                fail(ErrorCode::kInvalidArgument, where + "crop size must be >= 1");
              }
            },
            [&](const RandomHFlip& o) {
              if (!(o.p >= 0.0 && o.p <= 1.0)) {
                fail(ErrorCode::kInvalidArgument, where + "p must be in [0, 1]");
              }
            },
            [&](const ColorJitter& o) {
              for (double s : {o.brightness, o.contrast, o.saturation}) {
                if (!(s >= 0.0) || !std::isfinite(s)) {
                  fail(ErrorCode::kInvalidArgument, where + "strengths must be >= 0");
                }
              }
            },
            [&](const Normalize& o) {
              check_std(o.std);
              ++normalizers;
            },
            [&](const FusedCropNormalize& o) {
              if (o.out_h == 0 || o.out_w == 0) {
                fail(ErrorCode::kInvalidArgument, where + "crop size must be >= 1");
              }
              check_std(o.std);
              ++normalizers;
            },
        },
        op);
  }
  if (normalizers > 1) fail(ErrorCode::kInvalidArgument, "chain has more than one normalize op");
  if (normalizers == 1 && !std::holds_alternative<Normalize>(ops.back()) &&
      !std::holds_alternative<FusedCropNormalize>(ops.back())) {
    fail(ErrorCode::kInvalidArgument, "normalize must be the last op of a chain");
  }
}

std::optional<AugmentPreset> parse_preset(std::string_view name) {
  if (name == "few") return AugmentPreset::kFew;
  if (name == "extensive") return AugmentPreset::kExtensive;
  return std::nullopt;
}

std::string_view preset_name(AugmentPreset preset) {
  return preset == AugmentPreset::kFew ? "few" : "extensive";
}

AugmentChain make_preset(AugmentPreset preset, const PresetParams& params) {
  AugmentChain chain;
  chain.ops.push_back(ResizeShortSide{params.short_side});
  chain.ops.push_back(RandomCrop{params.crop, params.crop});
  chain.ops.push_back(RandomHFlip{params.flip_p});
  if (preset == AugmentPreset::kExtensive) {
    chain.ops.push_back(ColorJitter{params.jitter, params.jitter, params.jitter});
  }
  chain.ops.push_back(Normalize{params.mean, params.std});
  chain.validate();
  return chain;
}

ImageTensor resize_bilinear(const ImageTensor& img, std::uint32_t out_h,
                            std::uint32_t out_w) {
  if (out_h == 0 || out_w == 0) fail(ErrorCode::kInvalidArgument, "resize target must be >= 1");
  if (img.empty()) fail(ErrorCode::kInvalidArgument, "cannot resize an empty image");
  const std::uint32_t c = img.channels();
  const std::size_t in_row = std::size_t{img.width()} * c;
  // Same size: every tap has weight 0, so each output is its source pixel.
  if (out_h == img.height() && out_w == img.width()) return img.to_f32();
  const auto ys = bilinear_taps(img.height(), out_h);
  const auto xs = bilinear_taps(img.width(), out_w);
  const std::size_t out_row = std::size_t{out_w} * c;
  std::vector<float> out(std::size_t{out_h} * out_row);
  // Horizontal pass per source row, cached for the two rows in use.
  std::vector<float> rows(2 * out_row);
  std::uint32_t cached[2] = {UINT32_MAX, UINT32_MAX};
  with_pixels(img, [&](auto px) {
    auto horizontal = [&](std::uint32_t src_row) -> const float* {
      for (int slot = 0; slot < 2; ++slot) {
        if (cached[slot] == src_row) return rows.data() + slot * out_row;
      }
      // Source rows only move forward, so the smaller cached row is stale.
      const int slot =
          cached[0] == UINT32_MAX || (cached[1] != UINT32_MAX && cached[0] < cached[1]) ? 0 : 1;
      cached[slot] = src_row;
      float* dst = rows.data() + slot * out_row;
      const auto* r = px.data() + src_row * in_row;
      for (const AxisTap& tx : xs) {
        const std::size_t a0 = std::size_t{tx.lo} * c;
        const std::size_t a1 = std::size_t{tx.hi} * c;
        for (std::uint32_t k = 0; k < c; ++k) {
          const float a = static_cast<float>(r[a0 + k]);
          const float b = static_cast<float>(r[a1 + k]);
          *dst++ = a + (b - a) * tx.frac;
        }
      }
      return rows.data() + slot * out_row;
    };
    float* dst = out.data();
    for (const AxisTap& ty : ys) {
      const float* top = horizontal(ty.lo);
      const float* bottom = horizontal(ty.hi);
      const float f = ty.frac;
      for (std::size_t i = 0; i < out_row; ++i) dst[i] = top[i] + (bottom[i] - top[i]) * f;
      dst += out_row;
    }
    return 0;
  });
  return ImageTensor(out_h, out_w, c, std::move(out));
}

ImageTensor resize_short_side(const ImageTensor& img, std::uint32_t target) {
  if (target == 0) fail(ErrorCode::kInvalidArgument, "resize target must be >= 1");
  if (img.empty()) fail(ErrorCode::kInvalidArgument, "cannot resize an empty image");
  const std::uint32_t h = img.height();
  const std::uint32_t w = img.width();
  const std::uint32_t short_side = std::min(h, w);
  auto scaled = [&](std::uint32_t side) {
    return static_cast<std::uint32_t>(
        std::max<long long>(1, std::llround(static_cast<double>(side) * target / short_side)));
  };
  const std::uint32_t out_h = h == short_side ? target : scaled(h);
  const std::uint32_t out_w = h == short_side ? scaled(w) : target;
  return resize_bilinear(img, out_h, out_w);
}

ImageTensor random_crop(const ImageTensor& img, SampleRng& rng, std::uint32_t out_h,
                        std::uint32_t out_w) {
  check_crop(img, out_h, out_w);
  const std::uint64_t top = rng.next_u64() % (img.height() - out_h + 1);
  const std::uint64_t left = rng.next_u64() % (img.width() - out_w + 1);
  const std::uint32_t c = img.channels();
  const std::size_t in_row = std::size_t{img.width()} * c;
  const std::size_t out_row = std::size_t{out_w} * c;
  return with_pixels(img, [&](auto px) {
    using T = std::remove_cv_t<typename decltype(px)::element_type>;
    std::vector<T> out(out_row * out_h);
    for (std::uint32_t y = 0; y < out_h; ++y) {
      const auto* src = px.data() + (top + y) * in_row + left * c;
      std::copy(src, src + out_row, out.begin() + static_cast<std::ptrdiff_t>(y * out_row));
    }
    return make_tensor(out_h, out_w, c, std::move(out));
  });
}

ImageTensor hflip(const ImageTensor& img) {
  const std::uint32_t w = img.width();
  const std::uint32_t c = img.channels();
  return with_pixels(img, [&](auto px) {
    using T = std::remove_cv_t<typename decltype(px)::element_type>;
    std::vector<T> out(px.size());
    const std::size_t row = std::size_t{w} * c;
    for (std::uint32_t y = 0; y < img.height(); ++y) {
      const auto* src = px.data() + y * row;
      T* dst = out.data() + y * row;
      for (std::uint32_t x = 0; x < w; ++x) {
        const auto* from = src + std::size_t{w - 1 - x} * c;
        for (std::uint32_t k = 0; k < c; ++k) dst[std::size_t{x} * c + k] = from[k];
      }
    }
    return make_tensor(img.height(), w, c, std::move(out));
  });
}

ImageTensor random_hflip(const ImageTensor& img, SampleRng& rng, double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kInvalidArgument, "flip probability must be in [0, 1]");
  const double u = rng.next_unit();
  return u < p ? hflip(img) : img;
}

double jitter_factor(SampleRng& rng, double strength) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    fail(ErrorCode::kInvalidArgument, "jitter strength must be >= 0");
  }
  const double lo = std::max(0.0, 1.0 - strength);
  const double hi = 1.0 + strength;
  return lo + rng.next_unit() * (hi - lo);
}

ImageTensor adjust_brightness(const ImageTensor& img, float factor) {
  require_rgb(img, "brightness");
  ImageTensor out = img.to_f32();
  if (factor == 1.0f) return out;
  for (float& v : out.f32()) v *= factor;
  return out;
}

ImageTensor adjust_contrast(const ImageTensor& img, float factor) {
  require_rgb(img, "contrast");
  ImageTensor out = img.to_f32();
  if (factor == 1.0f) return out;
  auto px = out.f32();
  const std::size_t pixels = px.size() / 3;
  double sum = 0.0;
  for (std::size_t i = 0; i < pixels; ++i) sum += luma(px[3 * i], px[3 * i + 1], px[3 * i + 2]);
  const float mean = pixels == 0 ? 0.0f : static_cast<float>(sum / static_cast<double>(pixels));
  for (float& v : px) v = mean + (v - mean) * factor;
  return out;
}

ImageTensor adjust_saturation(const ImageTensor& img, float factor) {
  require_rgb(img, "saturation");
  ImageTensor out = img.to_f32();
  if (factor == 1.0f) return out;
  auto px = out.f32();
  for (std::size_t i = 0; i + 2 < px.size(); i += 3) {
    const float l = luma(px[i], px[i + 1], px[i + 2]);
    for (std::size_t k = 0; k < 3; ++k) px[i + k] = l + (px[i + k] - l) * factor;
  }
  return out;
}

ImageTensor color_jitter(const ImageTensor& img, SampleRng& rng, double brightness,
                         double contrast, double saturation) {
  require_rgb(img, "color jitter");
  const double fb = jitter_factor(rng, brightness);
  const double fc = jitter_factor(rng, contrast);
  const double fs = jitter_factor(rng, saturation);
  ImageTensor out = adjust_brightness(img, static_cast<float>(fb));
  out = adjust_contrast(out, static_cast<float>(fc));
  return adjust_saturation(out, static_cast<float>(fs));
}

ImageTensor normalize(const ImageTensor& img, const Rgb& mean, const Rgb& std) {
  require_rgb(img, "normalize");
  check_std(std);
  std::vector<float> out(img.element_count());
  with_pixels(img, [&](auto px) {
    for (std::size_t i = 0; i + 2 < px.size(); i += 3) {
      out[i] = normalize_value(static_cast<float>(px[i]), mean[0], std[0]);
      out[i + 1] = normalize_value(static_cast<float>(px[i + 1]), mean[1], std[1]);
      out[i + 2] = normalize_value(static_cast<float>(px[i + 2]), mean[2], std[2]);
    }
    return 0;
  });
  return ImageTensor(img.height(), img.width(), 3, std::move(out));
}

ImageTensor fused_crop_normalize(const ImageTensor& img, SampleRng& rng,
                                 std::uint32_t out_h, std::uint32_t out_w,
                                 const Rgb& mean, const Rgb& std) {
  check_crop(img, out_h, out_w);
  require_rgb(img, "fused crop-normalize");
  check_std(std);
  const std::uint64_t top = rng.next_u64() % (img.height() - out_h + 1);
  const std::uint64_t left = rng.next_u64() % (img.width() - out_w + 1);
  const std::size_t in_row = std::size_t{img.width()} * 3;
  std::vector<float> out(std::size_t{out_h} * out_w * 3);
  with_pixels(img, [&](auto px) {
    float* dst = out.data();
    for (std::uint32_t y = 0; y < out_h; ++y) {
      const auto* src = px.data() + (top + y) * in_row + left * 3;
      for (std::uint32_t x = 0; x < out_w; ++x, src += 3) {
        *dst++ = normalize_value(static_cast<float>(src[0]), mean[0], std[0]);
        *dst++ = normalize_value(static_cast<float>(src[1]), mean[1], std[1]);
        *dst++ = normalize_value(static_cast<float>(src[2]), mean[2], std[2]);
      }
    }
    return 0;
  });
  return ImageTensor(out_h, out_w, 3, std::move(out));
}

ImageTensor apply_op(const ImageTensor& img, const AugmentOp& op, SampleRng& rng) {
  return std::visit(
      Overloaded{
          [&](const ResizeShortSide& o) { return resize_short_side(img, o.target); },
          [&](const RandomCrop& o) { return random_crop(img, rng, o.out_h, o.out_w); },
          [&](const RandomHFlip& o) { return random_hflip(img, rng, o.p); },
          [&](const ColorJitter& o) {
            return color_jitter(img, rng, o.brightness, o.contrast, o.saturation);
          },
          [&](const Normalize& o) { return normalize(img, o.mean, o.std); },
          [&](const FusedCropNormalize& o) {
            return fused_crop_normalize(img, rng, o.out_h, o.out_w, o.mean, o.std);
          },
      },
      op);
}

ImageTensor apply_ops(ImageTensor img, std::span<const AugmentOp> ops, SampleRng& rng,
                      std::size_t first_position) {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      img = apply_op(img, ops[i], rng);
    } catch (const Error& e) {
      throw e.with_context("op #" + std::to_string(first_position + i) + " (" +
                           op_name(ops[i]) + ")");
    }
  }
  return img;
}

ImageTensor apply_chain(const ImageTensor& img, const AugmentChain& chain, std::uint64_t seed) {
  chain.validate();
  SampleRng rng(seed);
  ImageTensor out = apply_ops(img, chain.ops, rng);
  return out.dtype() == DType::kF32 ? out : out.to_f32();
}

}  // namespace loadforge
