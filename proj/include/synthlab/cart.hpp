#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/design.hpp"
#include "synthlab/method.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/stats.hpp"

namespace synthlab {

// Predictor view for tree fitting: dummy groups are folded back into single
// categorical features so splits can use level subsets.
struct Feature {
  bool categorical = false;
  std::vector<double> num;  // numeric feature values
  std::vector<int> lev;     // categorical level ids
  int n_levels = 0;
  std::string name;
};

struct FeatureTable {
  std::vector<Feature> features;
  std::size_t n_rows = 0;
};

inline FeatureTable make_features(const DesignMatrix& dm) {
  FeatureTable ft;
  ft.n_rows = static_cast<std::size_t>(dm.rows());
  std::size_t j = 0;
  while (j < dm.cols.size()) {
    const DesignColumn& dc = dm.cols[j];
    if (dc.kind == DesignColKind::Intercept) {
      ++j;
      continue;
    }
    if (dc.kind == DesignColKind::Continuous ||
        dc.kind == DesignColKind::MissingIndicator) {
      Feature f;
      f.name = dc.name;
      f.num.resize(ft.n_rows);
      for (std::size_t r = 0; r < ft.n_rows; ++r)
        f.num[r] = dm.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      ft.features.push_back(std::move(f));
      ++j;
      continue;
    }
    // consecutive dummy columns of one source variable
    std::size_t j0 = j;
    int max_level = dc.level;
    while (j + 1 < dm.cols.size() &&
           dm.cols[j + 1].kind == DesignColKind::Dummy &&
           dm.cols[j + 1].var_index == dc.var_index) {
      ++j;
      max_level = std::max(max_level, dm.cols[j].level);
    }
    ++j;
    Feature f;
    f.categorical = true;
    f.n_levels = max_level + 1;
    f.name = dc.name.substr(0, dc.name.rfind('.'));
    f.lev.assign(ft.n_rows, 0);  // reference level when all dummies are 0
    for (std::size_t r = 0; r < ft.n_rows; ++r)
      for (std::size_t c = j0; c < j; ++c)
        if (dm.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) > 0.5) {
          f.lev[r] = dm.cols[c].level;
          break;
        }
    ft.features.push_back(std::move(f));
  }
  return ft;
}

struct CartNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  std::vector<char> go_left;  // categorical splits: level id -> side
  int left = -1, right = -1;
  std::vector<int> donors;  // leaf only: training row indices
};

struct CartFit {
  std::vector<CartNode> nodes;
  bool categorical_target = false;
  int n_classes = 0;
  std::vector<double> y_num;
  std::vector<int> y_cat;
  FeatureTable train;  // kept for the bootstrap refit of proper synthesis
  CartControls controls;
  bool is_bootstrap_refit = false;

  bool is_leaf(int id) const { return nodes[static_cast<std::size_t>(id)].feature < 0; }
};

namespace detail {

struct NodeStats {
  // continuous target
  double sum = 0.0, sum2 = 0.0;
  // categorical target
  std::vector<long> counts;
  long n = 0;

  double impurity(bool categorical) const {
    if (n == 0) return 0.0;
    if (!categorical) return sum2 - sum * sum / static_cast<double>(n);
    double s = 0.0;
    for (long c : counts) s += static_cast<double>(c) * static_cast<double>(c);
    return static_cast<double>(n) - s / static_cast<double>(n);
  }
};

struct CartBuilder {
  const FeatureTable& ft;
  const CartFit& fit;
  const CartControls& ctl;
  std::vector<CartNode>& nodes;

  double y_of(int r) const {
    return fit.categorical_target
               ? static_cast<double>(fit.y_cat[static_cast<std::size_t>(r)])
               : fit.y_num[static_cast<std::size_t>(r)];
  }

  void add_row(NodeStats& s, int r) const {
    ++s.n;
    if (fit.categorical_target) {
      ++s.counts[static_cast<std::size_t>(fit.y_cat[static_cast<std::size_t>(r)])];
    } else {
      double y = fit.y_num[static_cast<std::size_t>(r)];
      s.sum += y;
      s.sum2 += y * y;
    }
  }
  void remove_row(NodeStats& s, int r) const {
    --s.n;
    if (fit.categorical_target) {
      --s.counts[static_cast<std::size_t>(fit.y_cat[static_cast<std::size_t>(r)])];
    } else {
      double y = fit.y_num[static_cast<std::size_t>(r)];
      s.sum -= y;
      s.sum2 -= y * y;
    }
  }
  NodeStats empty_stats() const {
    NodeStats s;
    if (fit.categorical_target)
      s.counts.assign(static_cast<std::size_t>(fit.n_classes), 0);
    return s;
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::vector<char> go_left;
    double improvement = -1.0;
  };

  // scan an ordering of node rows for the best prefix/suffix cut
  void scan_ordered(const std::vector<int>& ordered, int fi, bool categorical,
                    double parent_imp, Split& best) const {
    NodeStats left = empty_stats(), right = empty_stats();
    for (int r : ordered) add_row(right, r);
    const Feature& f = ft.features[static_cast<std::size_t>(fi)];
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
      add_row(left, ordered[i]);
      remove_row(right, ordered[i]);
      if (categorical) {
        // only cut between distinct ordered groups; handled by caller
      } else {
        double a = f.num[static_cast<std::size_t>(ordered[i])];
        double b = f.num[static_cast<std::size_t>(ordered[i + 1])];
        if (a == b) continue;
        if (left.n < ctl.min_leaf_size || right.n < ctl.min_leaf_size) continue;
        double imp = parent_imp - left.impurity(fit.categorical_target) -
                     right.impurity(fit.categorical_target);
        if (imp > best.improvement) {
          best.improvement = imp;
          best.feature = fi;
          best.threshold = a + (b - a) / 2.0;
          best.go_left.clear();
        }
      }
    }
  }

  Split find_split(const std::vector<int>& rows, double parent_imp) const {
    Split best;
    for (std::size_t fi = 0; fi < ft.features.size(); ++fi) {
      const Feature& f = ft.features[fi];
      if (!f.categorical) {
        std::vector<int> ordered = rows;
        std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
          return f.num[static_cast<std::size_t>(a)] < f.num[static_cast<std::size_t>(b)];
        });
        scan_ordered(ordered, static_cast<int>(fi), false, parent_imp, best);
      } else {
        // order levels by outcome mean, then scan prefix subsets
        std::vector<double> lsum(static_cast<std::size_t>(f.n_levels), 0.0);
        std::vector<long> lcnt(static_cast<std::size_t>(f.n_levels), 0);
        for (int r : rows) {
          auto l = static_cast<std::size_t>(f.lev[static_cast<std::size_t>(r)]);
          lsum[l] += y_of(r);
          ++lcnt[l];
        }
        std::vector<int> present;
        for (int l = 0; l < f.n_levels; ++l)
          if (lcnt[static_cast<std::size_t>(l)] > 0) present.push_back(l);
        if (present.size() < 2) continue;
        std::sort(present.begin(), present.end(), [&](int a, int b) {
          double ma = lsum[static_cast<std::size_t>(a)] /
                      static_cast<double>(lcnt[static_cast<std::size_t>(a)]);
          double mb = lsum[static_cast<std::size_t>(b)] /
                      static_cast<double>(lcnt[static_cast<std::size_t>(b)]);
          if (ma != mb) return ma < mb;
          return a < b;
        });
        // prefix cuts over the level ordering
        NodeStats left = empty_stats(), right = empty_stats();
        for (int r : rows) add_row(right, r);
        std::vector<char> in_left(static_cast<std::size_t>(f.n_levels), 0);
        for (std::size_t i = 0; i + 1 < present.size(); ++i) {
          int lv = present[i];
          in_left[static_cast<std::size_t>(lv)] = 1;
          for (int r : rows)
            if (f.lev[static_cast<std::size_t>(r)] == lv) {
              add_row(left, r);
              remove_row(right, r);
            }
          if (left.n < ctl.min_leaf_size || right.n < ctl.min_leaf_size) continue;
          double imp = parent_imp - left.impurity(fit.categorical_target) -
                       right.impurity(fit.categorical_target);
          if (imp > best.improvement) {
            best.improvement = imp;
            best.feature = static_cast<int>(fi);
            best.go_left = in_left;
          }
        }
      }
    }
    return best;
  }

  int build(std::vector<int> rows, int depth) {
    NodeStats stats = empty_stats();
    for (int r : rows) add_row(stats, r);
    double imp = stats.impurity(fit.categorical_target);

    int id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    bool stop = static_cast<int>(rows.size()) < 2 * ctl.min_leaf_size ||
                depth >= ctl.max_depth || imp <= 0.0;
    if (!stop) {
      Split sp = find_split(rows, imp);
      if (sp.feature >= 0 && sp.improvement >= ctl.min_split_improvement) {
        const Feature& f = ft.features[static_cast<std::size_t>(sp.feature)];
        std::vector<int> lrows, rrows;
        for (int r : rows) {
          bool go_left;
          if (f.categorical)
            go_left = sp.go_left[static_cast<std::size_t>(
                          f.lev[static_cast<std::size_t>(r)])] != 0;
          else
            go_left = f.num[static_cast<std::size_t>(r)] < sp.threshold;
          (go_left ? lrows : rrows).push_back(r);
        }
        nodes[static_cast<std::size_t>(id)].feature = sp.feature;
        nodes[static_cast<std::size_t>(id)].threshold = sp.threshold;
        nodes[static_cast<std::size_t>(id)].go_left = sp.go_left;
        int lid = build(std::move(lrows), depth + 1);
        int rid = build(std::move(rrows), depth + 1);
        nodes[static_cast<std::size_t>(id)].left = lid;
        nodes[static_cast<std::size_t>(id)].right = rid;
        return id;
      }
    }
    nodes[static_cast<std::size_t>(id)].donors = std::move(rows);
    return id;
  }
};

}  // namespace detail

inline CartFit fit_cart_impl(CartFit fit) {
  if (fit.train.n_rows < 2 * static_cast<std::size_t>(fit.controls.min_leaf_size) &&
      !fit.is_bootstrap_refit)
    throw std::invalid_argument("fit_cart: need at least 2*min_leaf_size rows");
  detail::CartBuilder builder{fit.train, fit, fit.controls, fit.nodes};
  std::vector<int> all(fit.train.n_rows);
  std::iota(all.begin(), all.end(), 0);
  builder.build(std::move(all), 0);
  return fit;
}

inline CartFit fit_cart(const std::vector<double>& y, const DesignMatrix& dm,
                        const CartControls& controls = {}) {
  CartFit fit;
  fit.categorical_target = false;
  fit.y_num = y;
  fit.train = make_features(dm);
  fit.controls = controls;
  if (fit.train.n_rows != y.size())
    throw std::invalid_argument("fit_cart: y length does not match design rows");
  return fit_cart_impl(std::move(fit));
}

inline CartFit fit_cart(const std::vector<int>& y, int n_classes,
                        const DesignMatrix& dm,
                        const CartControls& controls = {}) {
  CartFit fit;
  fit.categorical_target = true;
  fit.n_classes = n_classes;
  fit.y_cat = y;
  fit.train = make_features(dm);
  fit.controls = controls;
  if (fit.train.n_rows != y.size())
    throw std::invalid_argument("fit_cart: y length does not match design rows");
  return fit_cart_impl(std::move(fit));
}

// Proper CART: refit on a with-replacement bootstrap resample of the rows.
inline CartFit draw_posterior(const CartFit& fit, RngStream& rng) {
  std::vector<std::size_t> idx = rng.bootstrap_indices(fit.train.n_rows);
  CartFit boot;
  boot.categorical_target = fit.categorical_target;
  boot.n_classes = fit.n_classes;
  boot.controls = fit.controls;
  boot.is_bootstrap_refit = true;
  boot.train.n_rows = idx.size();
  boot.train.features.reserve(fit.train.features.size());
  for (const Feature& f : fit.train.features) {
    Feature g;
    g.categorical = f.categorical;
    g.n_levels = f.n_levels;
    g.name = f.name;
    if (f.categorical) {
      g.lev.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) g.lev[i] = f.lev[idx[i]];
    } else {
      g.num.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) g.num[i] = f.num[idx[i]];
    }
    boot.train.features.push_back(std::move(g));
  }
  if (fit.categorical_target) {
    boot.y_cat.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) boot.y_cat[i] = fit.y_cat[idx[i]];
  } else {
    boot.y_num.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) boot.y_num[i] = fit.y_num[idx[i]];
  }
  return fit_cart_impl(std::move(boot));
}

inline int cart_route(const CartFit& fit, const FeatureTable& ft, std::size_t row) {
  int id = 0;
  while (!fit.is_leaf(id)) {
    const CartNode& nd = fit.nodes[static_cast<std::size_t>(id)];
    const Feature& f = ft.features[static_cast<std::size_t>(nd.feature)];
    bool go_left;
    if (f.categorical) {
      int lv = f.lev[row];
      go_left = lv < static_cast<int>(nd.go_left.size()) &&
                nd.go_left[static_cast<std::size_t>(lv)] != 0;
    } else {
      go_left = f.num[row] < nd.threshold;
    }
    id = go_left ? nd.left : nd.right;
  }
  return id;
}

// Route each new row to its leaf and emit a uniformly sampled donor value.
inline std::vector<double> cart_generate(const CartFit& fit,
                                         const DesignMatrix& xnew,
                                         RngStream& rng,
                                         bool smoothing = false) {
  FeatureTable ft = make_features(xnew);
  if (ft.features.size() != fit.train.features.size())
    throw std::invalid_argument("cart_generate: feature layout mismatch");
  std::vector<double> out(ft.n_rows);
  for (std::size_t r = 0; r < ft.n_rows; ++r) {
    int leaf = cart_route(fit, ft, r);
    const auto& donors = fit.nodes[static_cast<std::size_t>(leaf)].donors;
    int pick = donors[rng.uniform_index(donors.size())];
    out[r] = fit.categorical_target
                 ? static_cast<double>(fit.y_cat[static_cast<std::size_t>(pick)])
                 : fit.y_num[static_cast<std::size_t>(pick)];
  }
  if (smoothing && !fit.categorical_target) {
    double bw = smoothing_bandwidth(fit.y_num);
    if (bw > 0.0)
      for (double& v : out) v += rng.normal(0.0, bw);
  }
  return out;
}

inline int cart_depth(const CartFit& fit, int id = 0) {
  if (fit.is_leaf(id)) return 0;
  const CartNode& nd = fit.nodes[static_cast<std::size_t>(id)];
  return 1 + std::max(cart_depth(fit, nd.left), cart_depth(fit, nd.right));
}

inline std::size_t cart_leaf_count(const CartFit& fit) {
  std::size_t n = 0;
  for (const auto& nd : fit.nodes)
    if (nd.feature < 0) ++n;
  return n;
}

}  // namespace synthlab
