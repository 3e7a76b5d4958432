#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace shearsep {

/// Gauss-Legendre nodes and weights mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Cached rule with `n` nodes; the reference stays valid for the program lifetime.
const GaussRule& gauss_rule(int n);

/// Every block integral is cut into at least this many equal pieces, so the
/// bump's flat ends are resolved even when the noise grid is coarse.
inline constexpr int kMinPieces = 8;

/// Composite Gauss rule on [a, b], cut at the grid points t0 + i dt and into
/// `min_pieces` equal parts. Calls f(t, weight, cell) where cell is the grid
/// cell holding the piece (clamped to [0, cells - 1]).
template <class F>
void composite_gauss(double a, double b, double t0, double dt, std::size_t cells, const GaussRule& rule,
                     int min_pieces, F&& f) {
  const double width = (b - a) / min_pieces;
  for (int p = 0; p < min_pieces; ++p) {
    const double pa = a + p * width;
    const double pb = p + 1 == min_pieces ? b : a + (p + 1) * width;
    auto cell_at = [&](double t) {
      const double u = std::floor((t - t0) / dt);
      if (u <= 0.0) return std::size_t{0};
      return std::min(static_cast<std::size_t>(u), cells - 1);
    };
    const std::size_t c0 = cell_at(pa);
    const std::size_t c1 = cell_at(pb);
    for (std::size_t c = c0; c <= c1; ++c) {
      const double lo = std::max(pa, t0 + static_cast<double>(c) * dt);
      const double hi = std::min(pb, t0 + static_cast<double>(c + 1) * dt);
      const double lo_eff = c == c0 ? pa : lo;
      const double hi_eff = c == c1 ? pb : hi;
      const double len = hi_eff - lo_eff;
      if (!(len > 0.0)) continue;
      for (int q = 0; q < rule.size(); ++q) f(lo_eff + rule.nodes[q] * len, rule.weights[q] * len, c);
    }
  }
}

}  // namespace shearsep
