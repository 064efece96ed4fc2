#pragma once

#include <array>
#include <future>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chanvese/image.hpp"
#include "chanvese/solver.hpp"

namespace chanvese {

enum class AggregationRule { And, Or, Majority };

inline std::string_view to_string(AggregationRule rule) {
  switch (rule) {
    case AggregationRule::And: return "AND";
    case AggregationRule::Or: return "OR";
    case AggregationRule::Majority: return "MAJORITY";
  }
  return "?";
}

/// Accepts AND / OR / MAJORITY in any letter case.
inline AggregationRule parse_rule(std::string_view text) {
  std::string up(text);
  for (char& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (up == "AND") return AggregationRule::And;
  if (up == "OR") return AggregationRule::Or;
  if (up == "MAJORITY") return AggregationRule::Majority;
  throw std::invalid_argument("rule: expected AND, OR or MAJORITY, got '" + std::string(text) + "'");
}

struct ChannelMasks {
  BinaryMask r, g, b;

  ChannelMasks(BinaryMask red, BinaryMask green, BinaryMask blue)
      : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {
    require_same_shape(r, g, "ChannelMasks r/g");
    require_same_shape(r, b, "ChannelMasks r/b");
  }
};

inline BinaryMask aggregate(const ChannelMasks& m, AggregationRule rule) {
  require_same_shape(m.r, m.g, "aggregate");
  require_same_shape(m.r, m.b, "aggregate");
  BinaryMask out(m.r.rows(), m.r.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int votes = (m.r[i] != 0) + (m.g[i] != 0) + (m.b[i] != 0);
    switch (rule) {
      case AggregationRule::And: out[i] = votes == 3; break;
      case AggregationRule::Or: out[i] = votes >= 1; break;
      case AggregationRule::Majority: out[i] = votes >= 2; break;
    }
  }
  return out;
}

struct RgbSegResult {
  BinaryMask mask;
  ChannelMasks channels;
  std::array<SegResult, 3> per_channel;
};

/// Segments each channel independently from the same initial level set, then
/// aggregates the three masks. Channels run concurrently.
inline RgbSegResult segment_rgb(const RgbImage& img, const LevelSet& init, const CvParams& p,
                                AggregationRule rule) {
  require_same_shape(img.r().grid(), init.phi, "segment_rgb");
  p.validate();
  std::array<std::future<SegResult>, 3> jobs;
  for (std::size_t c = 0; c < 3; ++c) {
    jobs[c] = std::async(std::launch::async, [&img, &init, &p, c] { return segment(img.channel(c), init, p); });
  }
  std::array<SegResult, 3> results{jobs[0].get(), jobs[1].get(), jobs[2].get()};
  ChannelMasks masks(results[0].mask, results[1].mask, results[2].mask);
  BinaryMask combined = aggregate(masks, rule);
  return RgbSegResult{std::move(combined), std::move(masks), std::move(results)};
}

}  // namespace chanvese
