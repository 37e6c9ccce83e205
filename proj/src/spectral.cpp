#include "erg/spectral.hpp"

#include <cmath>

namespace erg {

std::vector<Index> index_set(const std::vector<int>& per_dim_counts) {
  const int nu = static_cast<int>(per_dim_counts.size());
  if (nu < 1 || nu > 3) {
    throw std::invalid_argument("index_set: need 1..3 dimensions");
  }
  long total = 1;
  for (int c : per_dim_counts) {
    if (c < 1) throw std::invalid_argument("index_set: counts must be >= 1");
    total *= c;
  }
  std::vector<Index> out;
  out.reserve(static_cast<size_t>(total));
  Index k{0, 0, 0};
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int o = nu - 1; o >= 0; --o) {
      k[o] = static_cast<int>(rem % per_dim_counts[o]);
      rem /= per_dim_counts[o];
    }
    out.push_back(k);
  }
  return out;
}

double normalizer(const Index& k, const Workspace& ws) {
  double sq = 1.0;
  for (int o = 0; o < ws.dim(); ++o) {
    if (k[o] < 0) throw std::invalid_argument("normalizer: negative index");
    sq *= ws.length(o) * (k[o] == 0 ? 1.0 : 0.5);
  }
  return std::sqrt(sq);
}

double coeff_weight(const Index& k, int nu) {
  if (nu != 2 && nu != 3) throw std::invalid_argument("coeff_weight: nu must be 2 or 3");
  double nsq = 0.0;
  for (int o = 0; o < nu; ++o) nsq += static_cast<double>(k[o]) * k[o];
  return std::pow(1.0 + nsq, -0.5 * (nu + 1));
}

SpectralBasis::SpectralBasis(Workspace ws, std::vector<int> per_dim_counts)
    : ws_(std::move(ws)), counts_(std::move(per_dim_counts)) {
  if (static_cast<int>(counts_.size()) != ws_.dim()) {
    throw std::invalid_argument("SpectralBasis: counts/workspace dim mismatch");
  }
  indices_ = index_set(counts_);
  normalizers_.reserve(indices_.size());
  weights_.reserve(indices_.size());
  for (const Index& k : indices_) {
    normalizers_.push_back(erg::normalizer(k, ws_));
    weights_.push_back(coeff_weight(k, ws_.dim()));
  }
}

double SpectralBasis::eval(int i, const Eigen::VectorXd& w) const {
  const Index& k = indices_[i];
  double p = 1.0;
  for (int o = 0; o < dim(); ++o) {
    p *= std::cos(k[o] * M_PI * w[o] / ws_.length(o));
  }
  return p / normalizers_[i];
}

Eigen::VectorXd SpectralBasis::grad(int i, const Eigen::VectorXd& w) const {
  const int nu = dim();
  const Index& k = indices_[i];
  Eigen::VectorXd c(nu), s(nu);
  for (int o = 0; o < nu; ++o) {
    const double a = k[o] * M_PI / ws_.length(o);
    c[o] = std::cos(a * w[o]);
    s[o] = std::sin(a * w[o]);
  }
  Eigen::VectorXd g(nu);
  for (int o = 0; o < nu; ++o) {
    double p = -(k[o] * M_PI / ws_.length(o)) * s[o];
    for (int p2 = 0; p2 < nu; ++p2) {
      if (p2 != o) p *= c[p2];
    }
    g[o] = p / normalizers_[i];
  }
  return g;
}

void SpectralBasis::eval_all(const Eigen::VectorXd& w, double* out) const {
  const int nu = dim();
  // per-dimension cosine tables
  double tab[3][64];
  std::vector<double> heap_tab;
  int heap_total = 0;
  for (int o = 0; o < nu; ++o) {
    if (counts_[o] > 64) heap_total += counts_[o];
  }
  if (heap_total > 0) heap_tab.resize(heap_total);
  int heap_used = 0;
  double* tabp[3];
  for (int o = 0; o < nu; ++o) {
    const int c = counts_[o];
    if (c <= 64) {
      tabp[o] = tab[o];
    } else {
      tabp[o] = heap_tab.data() + heap_used;
      heap_used += c;
    }
    const double a = M_PI * w[o] / ws_.length(o);
    for (int k = 0; k < c; ++k) tabp[o][k] = std::cos(k * a);
  }
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Index& k = indices_[i];
    double p = tabp[0][k[0]];
    for (int o = 1; o < nu; ++o) p *= tabp[o][k[o]];
    out[i] = p / normalizers_[i];
  }
}

void SpectralBasis::eval_all_grad(const Eigen::VectorXd& w, double* val_out,
                                  double* grad_out) const {
  const int nu = dim();
  double ctab[3][64], stab[3][64];
  std::vector<double> heap_tab;
  int heap_total = 0;
  for (int o = 0; o < nu; ++o) {
    if (counts_[o] > 64) heap_total += 2 * counts_[o];
  }
  if (heap_total > 0) heap_tab.resize(heap_total);
  int heap_used = 0;
  double* cp[3];
  double* sp[3];
  for (int o = 0; o < nu; ++o) {
    const int c = counts_[o];
    if (c <= 64) {
      cp[o] = ctab[o];
      sp[o] = stab[o];
    } else {
      cp[o] = heap_tab.data() + heap_used;
      sp[o] = cp[o] + c;
      heap_used += 2 * c;
    }
    const double a = M_PI * w[o] / ws_.length(o);
    for (int k = 0; k < c; ++k) {
      cp[o][k] = std::cos(k * a);
      sp[o][k] = std::sin(k * a);
    }
  }
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Index& k = indices_[i];
    const double inv_h = 1.0 / normalizers_[i];
    double cos_term[3];
    double p = 1.0;
    for (int o = 0; o < nu; ++o) {
      cos_term[o] = cp[o][k[o]];
      p *= cos_term[o];
    }
    val_out[i] = p * inv_h;
    for (int o = 0; o < nu; ++o) {
      double g = -(k[o] * M_PI / ws_.length(o)) * sp[o][k[o]];
      for (int p2 = 0; p2 < nu; ++p2) {
        if (p2 != o) g *= cos_term[p2];
      }
      grad_out[static_cast<long>(i) * nu + o] = g * inv_h;
    }
  }
}

}  // namespace erg
