#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace motsmine {

using PixelCount = std::uint64_t;

// Binary pixel mask over an H x W frame, stored as uncompressed run lengths.
//
// Runs are taken in column-major order and alternate between background and
// foreground, starting with a (possibly empty) background run. Masks built by
// any of the factories below are canonical: the only zero-length run that can
// appear is the leading one, so two masks are equal iff their pixels are.
class Mask {
 public:
  Mask() = default;
  // All-background mask.
  Mask(std::int64_t height, std::int64_t width);

  // Throws ValidationError unless the runs sum to height * width and no two
  // consecutive runs are empty (the leading run excepted).
  static Mask from_runs(std::int64_t height, std::int64_t width,
                        std::vector<std::uint32_t> runs);
  // `pixels` is column-major, nonzero meaning foreground.
  static Mask from_pixels(std::int64_t height, std::int64_t width,
                          std::span<const std::uint8_t> pixels);
  // Foreground rows [row0, row1) x columns [col0, col1), clipped to the frame.
  static Mask rectangle(std::int64_t height, std::int64_t width,
                        std::int64_t row0, std::int64_t col0,
                        std::int64_t row1, std::int64_t col1);

  template <typename Pred>
  static Mask from_predicate(std::int64_t height, std::int64_t width,
                             Pred&& is_foreground) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(height * width));
    std::size_t k = 0;
    for (std::int64_t col = 0; col < width; ++col) {
      for (std::int64_t row = 0; row < height; ++row) {
        pixels[k++] = is_foreground(row, col) ? 1 : 0;
      }
    }
    return from_pixels(height, width, pixels);
  }

  std::int64_t height() const { return height_; }
  std::int64_t width() const { return width_; }
  const std::vector<std::uint32_t>& runs() const { return runs_; }

  // Column-major 0/1 pixels.
  std::vector<std::uint8_t> to_pixels() const;
  bool same_shape(const Mask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::int64_t height_ = 0;
  std::int64_t width_ = 0;
  std::vector<std::uint32_t> runs_;
};

// Axis-aligned box with top-left (u1, v1) and bottom-right (u2, v2) corners;
// u runs along columns, v along rows. Degenerate boxes are representable.
struct BBox {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;

  bool is_empty() const { return u2 <= u1 || v2 <= v1; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Largest and second-largest overlap of a segment with the warped masks of its
// class, and the part of the segment none of them cover.
struct IntersectionStats {
  PixelCount b1 = 0;
  PixelCount b2 = 0;
  PixelCount r = 0;

  friend bool operator==(const IntersectionStats&,
                         const IntersectionStats&) = default;
};

PixelCount mask_area(const Mask& m);
PixelCount intersection_area(const Mask& a, const Mask& b);
Mask mask_and(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);

// |a ∩ b| / |a ∪ b|, 0 when both are empty. Throws on shape mismatch.
double mask_iou(const Mask& a, const Mask& b);

IntersectionStats intersection_stats(const Mask& s,
                                     std::span<const Mask> warped_same_class);

// Tightest box around the foreground with exclusive u2/v2; (0,0,0,0) if empty.
BBox mask_bbox(const Mask& m);

// Standard IoU of the proper parts of two boxes; 0 when the union is empty.
double box_iou(const BBox& a, const BBox& b);

}  // namespace motsmine
