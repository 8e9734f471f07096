#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "broja2pid/errors.hpp"
#include "broja2pid/symbol.hpp"

namespace broja2pid {

/// Caller-facing form of a distribution: outcome -> weight.
using RawDistribution = std::map<Outcome, double>;

/// Sorted alphabets of X, Y and Z. Position in each vector is the variable
/// index used everywhere else.
struct Alphabets {
  std::vector<Symbol> x;
  std::vector<Symbol> y;
  std::vector<Symbol> z;
};

/// A probability attached to an index triple.
struct Entry {
  int x = 0;
  int y = 0;
  int z = 0;
  double p = 0.0;
};

inline constexpr double kInputNormTolerance = 1e-9;
inline constexpr double kNormTolerance = 1e-12;

class JointDistribution;
JointDistribution build_distribution(const RawDistribution& raw);

/// Finite joint distribution of (X, Y, Z) with strictly positive entries.
/// Immutable; entries are kept in lexicographic (x, y, z) index order.
class JointDistribution {
 public:
  const Alphabets& alphabets() const { return *alphabets_; }
  const std::shared_ptr<const Alphabets>& shared_alphabets() const {
    return alphabets_;
  }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  int nx() const { return static_cast<int>(alphabets_->x.size()); }
  int ny() const { return static_cast<int>(alphabets_->y.size()); }
  int nz() const { return static_cast<int>(alphabets_->z.size()); }

  Outcome outcome(const Entry& e) const {
    return {alphabets_->x[e.x], alphabets_->y[e.y], alphabets_->z[e.z]};
  }

  /// Probability of an outcome; 0 for anything not stored.
  double probability(const Outcome& o) const {
    auto find = [](const std::vector<Symbol>& v, const Symbol& s) {
      auto it = std::lower_bound(v.begin(), v.end(), s);
      return (it != v.end() && *it == s) ? static_cast<int>(it - v.begin()) : -1;
    };
    const int ix = find(alphabets_->x, o.x);
    const int iy = find(alphabets_->y, o.y);
    const int iz = find(alphabets_->z, o.z);
    if (ix < 0 || iy < 0 || iz < 0) return 0.0;
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), std::tuple{ix, iy, iz},
        [](const Entry& e, const std::tuple<int, int, int>& k) {
          return std::tuple{e.x, e.y, e.z} < k;
        });
    if (it != entries_.end() && it->x == ix && it->y == iy && it->z == iz) {
      return it->p;
    }
    return 0.0;
  }

  RawDistribution to_map() const {
    RawDistribution out;
    for (const auto& e : entries_) out.emplace(outcome(e), e.p);
    return out;
  }

 private:
  friend JointDistribution build_distribution(const RawDistribution& raw);
  JointDistribution() = default;

  std::shared_ptr<const Alphabets> alphabets_;
  std::vector<Entry> entries_;
};

/// Validates and normalizes a raw weight map. Zero-weight outcomes are
/// dropped. A total within 1e-9 of one is rescaled to one; anything further
/// off is rejected.
inline JointDistribution build_distribution(const RawDistribution& raw) {
  double total = 0.0;
  for (const auto& [o, w] : raw) {
    if (!(w >= 0.0)) {
      throw NegativeProbability("weight " + std::to_string(w) + " at (" +
                                o.x.to_string() + "," + o.y.to_string() + "," +
                                o.z.to_string() + ")");
    }
    total += w;
  }
  if (total <= 0.0) throw EmptyDistribution("no outcome has positive weight");
  if (std::abs(total - 1.0) > kInputNormTolerance) {
    throw NotNormalized("weights sum to " + std::to_string(total));
  }

  auto alpha = std::make_shared<Alphabets>();
  for (const auto& [o, w] : raw) {
    if (w > 0.0) {
      alpha->x.push_back(o.x);
      alpha->y.push_back(o.y);
      alpha->z.push_back(o.z);
    }
  }
  for (auto* v : {&alpha->x, &alpha->y, &alpha->z}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  auto index_of = [](const std::vector<Symbol>& v, const Symbol& s) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
  };

  JointDistribution d;
  // std::map iteration is already lexicographic in (x, y, z), and the index
  // maps are monotone, so entries come out sorted.
  for (const auto& [o, w] : raw) {
    if (w > 0.0) {
      d.entries_.push_back({index_of(alpha->x, o.x), index_of(alpha->y, o.y),
                            index_of(alpha->z, o.z), w / total});
    }
  }
  d.alphabets_ = std::move(alpha);
  return d;
}

/// Positive cell of a pairwise marginal: (x, other) -> probability, where
/// "other" is a Y index for b_y and a Z index for b_z.
struct MarginalCell {
  int x = 0;
  int other = 0;
  double p = 0.0;
};

/// The (X,Y) and (X,Z) marginals that fix the feasible set.
struct MarginalPair {
  std::shared_ptr<const Alphabets> alphabets;
  Eigen::MatrixXd b_y;  // nx x ny
  Eigen::MatrixXd b_z;  // nx x nz

  int nx() const { return static_cast<int>(b_y.rows()); }
  int ny() const { return static_cast<int>(b_y.cols()); }
  int nz() const { return static_cast<int>(b_z.cols()); }

  /// Positive cells of b_y in (x, y) order.
  std::vector<MarginalCell> cells_y() const { return cells(b_y); }
  /// Positive cells of b_z in (x, z) order.
  std::vector<MarginalCell> cells_z() const { return cells(b_z); }

 private:
  static std::vector<MarginalCell> cells(const Eigen::MatrixXd& m) {
    std::vector<MarginalCell> out;
    for (int x = 0; x < m.rows(); ++x) {
      for (int k = 0; k < m.cols(); ++k) {
        if (m(x, k) > 0.0) out.push_back({x, k, m(x, k)});
      }
    }
    return out;
  }
};

inline MarginalPair marginals(const JointDistribution& p) {
  MarginalPair m;
  m.alphabets = p.shared_alphabets();
  m.b_y = Eigen::MatrixXd::Zero(p.nx(), p.ny());
  m.b_z = Eigen::MatrixXd::Zero(p.nx(), p.nz());
  for (const auto& e : p.entries()) {
    m.b_y(e.x, e.y) += e.p;
    m.b_z(e.x, e.z) += e.p;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Information measures, in nats. They accept any span of entries with
// nonnegative probabilities; zero entries contribute nothing.

namespace detail {

using Key2 = std::pair<int, int>;

struct Projections {
  std::map<int, double> x, y, z;
  std::map<Key2, double> xy, xz, yz;
};

inline Projections project(std::span<const Entry> q) {
  Projections pr;
  for (const auto& e : q) {
    if (e.p <= 0.0) continue;
    pr.x[e.x] += e.p;
    pr.y[e.y] += e.p;
    pr.z[e.z] += e.p;
    pr.xy[{e.x, e.y}] += e.p;
    pr.xz[{e.x, e.z}] += e.p;
    pr.yz[{e.y, e.z}] += e.p;
  }
  return pr;
}

}  // namespace detail

/// H(X | Y, Z) = -sum q ln(q / q_{*,y,z}).
inline double conditional_entropy_x_given_yz(std::span<const Entry> q) {
  std::map<detail::Key2, double> yz;
  for (const auto& e : q) {
    if (e.p > 0.0) yz[{e.y, e.z}] += e.p;
  }
  double h = 0.0;
  for (const auto& e : q) {
    if (e.p > 0.0) h -= e.p * std::log(e.p / yz[{e.y, e.z}]);
  }
  return std::max(h, 0.0);
}

inline double conditional_entropy_x_given_yz(const JointDistribution& q) {
  return conditional_entropy_x_given_yz(q.entries());
}

enum class Grouping {
  kXwithYZ,       // MI(X; (Y,Z))
  kXwithY,        // MI(X; Y)
  kXwithZ,        // MI(X; Z)
  kYwithZ,        // MI(Y; Z)
  kXwithYgivenZ,  // MI(X; Y | Z)
  kXwithZgivenY,  // MI(X; Z | Y)
};

/// Accepts "X;YZ", "X;(Y,Z)", "X;Y", "X;Z", "Y;Z", "X;Y|Z", "X;Z|Y"
/// (whitespace ignored).
inline Grouping parse_grouping(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s.push_back(c);
  }
  if (s == "X;YZ" || s == "X;(Y,Z)" || s == "X;Y,Z") return Grouping::kXwithYZ;
  if (s == "X;Y") return Grouping::kXwithY;
  if (s == "X;Z") return Grouping::kXwithZ;
  if (s == "Y;Z") return Grouping::kYwithZ;
  if (s == "X;Y|Z") return Grouping::kXwithYgivenZ;
  if (s == "X;Z|Y") return Grouping::kXwithZgivenY;
  throw UnknownGrouping("'" + std::string(text) + "'");
}

inline double mutual_information(std::span<const Entry> q, Grouping g) {
  const auto pr = detail::project(q);
  double mi = 0.0;
  switch (g) {
    case Grouping::kXwithYZ:
      for (const auto& e : q) {
        if (e.p <= 0.0) continue;
        mi += e.p * std::log(e.p / (pr.x.at(e.x) * pr.yz.at({e.y, e.z})));
      }
      break;
    case Grouping::kXwithY:
      for (const auto& [k, v] : pr.xy) {
        mi += v * std::log(v / (pr.x.at(k.first) * pr.y.at(k.second)));
      }
      break;
    case Grouping::kXwithZ:
      for (const auto& [k, v] : pr.xz) {
        mi += v * std::log(v / (pr.x.at(k.first) * pr.z.at(k.second)));
      }
      break;
    case Grouping::kYwithZ:
      for (const auto& [k, v] : pr.yz) {
        mi += v * std::log(v / (pr.y.at(k.first) * pr.z.at(k.second)));
      }
      break;
    case Grouping::kXwithYgivenZ:
      for (const auto& e : q) {
        if (e.p <= 0.0) continue;
        mi += e.p * std::log(e.p * pr.z.at(e.z) /
                             (pr.xz.at({e.x, e.z}) * pr.yz.at({e.y, e.z})));
      }
      break;
    case Grouping::kXwithZgivenY:
      for (const auto& e : q) {
        if (e.p <= 0.0) continue;
        mi += e.p * std::log(e.p * pr.y.at(e.y) /
                             (pr.xy.at({e.x, e.y}) * pr.yz.at({e.y, e.z})));
      }
      break;
  }
  return mi;
}

inline double mutual_information(const JointDistribution& p, Grouping g) {
  return mutual_information(p.entries(), g);
}

/// Shannon entropy of X alone, in nats.
inline double entropy_x(std::span<const Entry> q) {
  std::map<int, double> px;
  for (const auto& e : q) {
    if (e.p > 0.0) px[e.x] += e.p;
  }
  double h = 0.0;
  for (const auto& [k, v] : px) h -= v * std::log(v);
  return h;
}

}  // namespace broja2pid
