#include "motsmine/mask.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include "motsmine/errors.hpp"

namespace motsmine {
namespace {

// Appends runs while keeping the encoding canonical.
class RunBuilder {
 public:
  void push(bool value, std::uint64_t count) {
    if (count == 0) return;
    if (runs_.empty() && value) runs_.push_back(0);
    bool last_value = !runs_.empty() && (runs_.size() - 1) % 2 == 1;
    if (!runs_.empty() && last_value == value) {
      runs_.back() += static_cast<std::uint32_t>(count);
    } else {
      runs_.push_back(static_cast<std::uint32_t>(count));
    }
  }
  std::vector<std::uint32_t> take() { return std::move(runs_); }

 private:
  std::vector<std::uint32_t> runs_;
};

// Cursor over a run list that skips empty runs.
class RunCursor {
 public:
  explicit RunCursor(const std::vector<std::uint32_t>& runs) : runs_(runs) {
    settle();
  }
  bool done() const { return index_ >= runs_.size(); }
  bool value() const { return index_ % 2 == 1; }
  std::uint64_t remaining() const { return runs_[index_] - offset_; }
  void advance(std::uint64_t n) {
    offset_ += n;
    if (offset_ == runs_[index_]) {
      ++index_;
      offset_ = 0;
      settle();
    }
  }

 private:
  void settle() {
    while (index_ < runs_.size() && runs_[index_] == 0) ++index_;
  }
  const std::vector<std::uint32_t>& runs_;
  std::size_t index_ = 0;
  std::uint64_t offset_ = 0;
};

void require_same_shape(const Mask& a, const Mask& b, const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << what << ": mask shape mismatch (" << a.height() << "x" << a.width()
        << " vs " << b.height() << "x" << b.width() << ")";
    throw ValidationError(msg.str());
  }
}

template <typename Op>
Mask merge(const Mask& a, const Mask& b, Op op, const char* what) {
  require_same_shape(a, b, what);
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  RunBuilder out;
  while (!ca.done() && !cb.done()) {
    std::uint64_t n = std::min(ca.remaining(), cb.remaining());
    out.push(op(ca.value(), cb.value()), n);
    ca.advance(n);
    cb.advance(n);
  }
  return Mask::from_runs(a.height(), a.width(), out.take());
}

void check_dimensions(std::int64_t height, std::int64_t width) {
  if (height < 0 || width < 0) {
    throw ValidationError("mask dimensions must be non-negative");
  }
  if (height * width > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("mask too large for 32-bit run lengths");
  }
}

}  // namespace

Mask::Mask(std::int64_t height, std::int64_t width)
    : height_(height), width_(width) {
  check_dimensions(height, width);
  if (height * width > 0) runs_.push_back(static_cast<std::uint32_t>(height * width));
}

Mask Mask::from_runs(std::int64_t height, std::int64_t width,
                     std::vector<std::uint32_t> runs) {
  check_dimensions(height, width);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    total += runs[i];
    if (i >= 1 && i + 1 < runs.size() && runs[i] == 0 && runs[i + 1] == 0) {
      std::ostringstream msg;
      msg << "RLE counts have consecutive empty runs at index " << i;
      throw ValidationError(msg.str());
    }
  }
  auto expected = static_cast<std::uint64_t>(height * width);
  if (total != expected) {
    std::ostringstream msg;
    msg << "RLE counts sum to " << total << " but size is " << height << "x"
        << width << " = " << expected;
    throw ValidationError(msg.str());
  }
  RunBuilder builder;
  for (std::size_t i = 0; i < runs.size(); ++i) builder.push(i % 2 == 1, runs[i]);
  Mask m;
  m.height_ = height;
  m.width_ = width;
  m.runs_ = builder.take();
  return m;
}

Mask Mask::from_pixels(std::int64_t height, std::int64_t width,
                       std::span<const std::uint8_t> pixels) {
  check_dimensions(height, width);
  if (pixels.size() != static_cast<std::size_t>(height * width)) {
    throw ValidationError("pixel buffer size does not match mask dimensions");
  }
  RunBuilder builder;
  for (std::uint8_t p : pixels) builder.push(p != 0, 1);
  Mask m;
  m.height_ = height;
  m.width_ = width;
  m.runs_ = builder.take();
  return m;
}

Mask Mask::rectangle(std::int64_t height, std::int64_t width, std::int64_t row0,
                     std::int64_t col0, std::int64_t row1, std::int64_t col1) {
  check_dimensions(height, width);
  row0 = std::clamp<std::int64_t>(row0, 0, height);
  row1 = std::clamp<std::int64_t>(row1, 0, height);
  col0 = std::clamp<std::int64_t>(col0, 0, width);
  col1 = std::clamp<std::int64_t>(col1, 0, width);
  RunBuilder builder;
  for (std::int64_t col = 0; col < width; ++col) {
    bool active = col >= col0 && col < col1 && row1 > row0;
    if (!active) {
      builder.push(false, static_cast<std::uint64_t>(height));
      continue;
    }
    builder.push(false, static_cast<std::uint64_t>(row0));
    builder.push(true, static_cast<std::uint64_t>(row1 - row0));
    builder.push(false, static_cast<std::uint64_t>(height - row1));
  }
  Mask m;
  m.height_ = height;
  m.width_ = width;
  m.runs_ = builder.take();
  return m;
}

std::vector<std::uint8_t> Mask::to_pixels() const {
  std::vector<std::uint8_t> pixels;
  pixels.reserve(static_cast<std::size_t>(height_ * width_));
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    pixels.insert(pixels.end(), runs_[i], static_cast<std::uint8_t>(i % 2));
  }
  return pixels;
}

PixelCount mask_area(const Mask& m) {
  PixelCount area = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 1; i < runs.size(); i += 2) area += runs[i];
  return area;
}

Mask mask_and(const Mask& a, const Mask& b) {
  return merge(a, b, [](bool x, bool y) { return x && y; }, "mask_and");
}

Mask mask_or(const Mask& a, const Mask& b) {
  return merge(a, b, [](bool x, bool y) { return x || y; }, "mask_or");
}

PixelCount intersection_area(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "intersection_area");
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  PixelCount area = 0;
  while (!ca.done() && !cb.done()) {
    std::uint64_t n = std::min(ca.remaining(), cb.remaining());
    if (ca.value() && cb.value()) area += n;
    ca.advance(n);
    cb.advance(n);
  }
  return area;
}

double mask_iou(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_iou");
  PixelCount inter = intersection_area(a, b);
  PixelCount uni = mask_area(a) + mask_area(b) - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

IntersectionStats intersection_stats(const Mask& s,
                                     std::span<const Mask> warped_same_class) {
  IntersectionStats stats;
  Mask covered(s.height(), s.width());
  for (const Mask& w : warped_same_class) {
    PixelCount overlap = intersection_area(s, w);
    if (overlap > stats.b1) {
      stats.b2 = stats.b1;
      stats.b1 = overlap;
    } else if (overlap > stats.b2) {
      stats.b2 = overlap;
    }
    covered = mask_or(covered, w);
  }
  stats.r = mask_area(s) - intersection_area(s, covered);
  return stats;
}

BBox mask_bbox(const Mask& m) {
  const auto height = static_cast<std::uint64_t>(m.height());
  std::uint64_t min_row = height, max_row = 0, min_col = 0, max_col = 0;
  bool found = false;
  std::uint64_t pos = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::uint64_t len = runs[i];
    if (i % 2 == 1 && len > 0) {
      std::uint64_t first = pos;
      std::uint64_t last = pos + len - 1;
      std::uint64_t first_col = first / height;
      std::uint64_t last_col = last / height;
      if (!found) min_col = first_col;
      max_col = last_col;
      found = true;
      if (last_col > first_col) {
        // Crossing a column boundary touches the bottom row of one column and
        // the top row of the next.
        min_row = 0;
        max_row = height - 1;
      } else {
        min_row = std::min(min_row, first % height);
        max_row = std::max(max_row, last % height);
      }
    }
    pos += len;
  }
  if (!found) return BBox{};
  return BBox{static_cast<double>(min_col), static_cast<double>(min_row),
              static_cast<double>(max_col + 1), static_cast<double>(max_row + 1)};
}

double box_iou(const BBox& a, const BBox& b) {
  auto area = [](const BBox& x) {
    return x.is_empty() ? 0.0 : (x.u2 - x.u1) * (x.v2 - x.v1);
  };
  double iw = std::min(a.u2, b.u2) - std::max(a.u1, b.u1);
  double ih = std::min(a.v2, b.v2) - std::max(a.v1, b.v1);
  double inter = (iw > 0.0 && ih > 0.0 && !a.is_empty() && !b.is_empty()) ? iw * ih : 0.0;
  double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace motsmine
