#include "motsmine/flow.hpp"

#include <cmath>
#include <sstream>

#include "motsmine/errors.hpp"

namespace motsmine {

Mask warp_mask(const Mask& m, const FlowField& flow) {
  if (flow.height != m.height() || flow.width != m.width()) {
    std::ostringstream msg;
    msg << "warp_mask: flow is " << flow.height << "x" << flow.width
        << " but mask is " << m.height() << "x" << m.width();
    throw ValidationError(msg.str());
  }
  const std::int64_t height = m.height();
  const std::int64_t width = m.width();
  const std::vector<std::uint8_t> source = m.to_pixels();
  return Mask::from_predicate(height, width, [&](std::int64_t row, std::int64_t col) {
    const FlowVector& f = flow.at(row, col);
    double su = static_cast<double>(col) + static_cast<double>(f.du);
    double sv = static_cast<double>(row) + static_cast<double>(f.dv);
    if (!std::isfinite(su) || !std::isfinite(sv)) return false;
    // std::round breaks ties away from zero.
    double ru = std::round(su);
    double rv = std::round(sv);
    if (ru < 0.0 || rv < 0.0 || ru >= static_cast<double>(width) ||
        rv >= static_cast<double>(height)) {
      return false;
    }
    auto src_col = static_cast<std::int64_t>(ru);
    auto src_row = static_cast<std::int64_t>(rv);
    return source[static_cast<std::size_t>(src_col * height + src_row)] != 0;
  });
}

}  // namespace motsmine
