#include "homog/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/errors.hpp"

namespace homog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t pow_n(int n, int d) {
  std::size_t p = 1;
  for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

}  // namespace

PeriodicField PeriodicField::fourier(int dim, std::vector<std::vector<FourierTerm>> components) {
  if (dim <= 0) throw ConfigError("PeriodicField: dimension must be positive");
  if (components.empty()) throw ConfigError("PeriodicField: no components");
  for (const auto& comp : components)
    for (const auto& t : comp)
      if (static_cast<int>(t.freq.size()) != dim)
        throw ConfigError("PeriodicField: frequency vector dimension mismatch");
  PeriodicField f;
  f.backing_ = Backing::Fourier;
  f.dim_ = dim;
  f.arity_ = static_cast<int>(components.size());
  f.terms_ = std::move(components);
  return f;
}

PeriodicField PeriodicField::constant(int dim, std::vector<double> values) {
  std::vector<std::vector<FourierTerm>> comps(values.size());
  for (std::size_t c = 0; c < values.size(); ++c)
    comps[c].push_back(FourierTerm{std::vector<int>(dim, 0), values[c], 0.0});
  return fourier(dim, std::move(comps));
}

PeriodicField PeriodicField::grid(int dim, int n, int arity, std::vector<double> values) {
  if (dim <= 0 || n <= 0 || arity <= 0) throw ConfigError("PeriodicField: bad grid shape");
  if (dim > 8) throw ConfigError("PeriodicField: grid backing supports dimension <= 8");
  if (values.size() != pow_n(n, dim) * static_cast<std::size_t>(arity))
    throw ConfigError("PeriodicField: grid value count mismatch");
  PeriodicField f;
  f.backing_ = Backing::Grid;
  f.dim_ = dim;
  f.arity_ = arity;
  f.grid_n_ = n;
  f.values_ = std::move(values);
  return f;
}

PeriodicField PeriodicField::sample(
    int dim, int n, int arity,
    const std::function<void(std::span<const double>, std::span<double>)>& fn) {
  std::size_t cells = pow_n(n, dim);
  std::vector<double> values(cells * static_cast<std::size_t>(arity));
  std::vector<double> x(dim), out(arity);
  std::vector<int> idx(dim, 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rem = flat;
    for (int j = dim - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int j = 0; j < dim; ++j) x[j] = static_cast<double>(idx[j]) / n;
    fn(x, out);
    for (int c = 0; c < arity; ++c) values[static_cast<std::size_t>(c) * cells + flat] = out[c];
  }
  return grid(dim, n, arity, std::move(values));
}

void PeriodicField::evaluate(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ConfigError("PeriodicField::evaluate: point dimension mismatch");
  if (backing_ == Backing::Fourier) {
    for (int c = 0; c < arity_; ++c) {
      double v = 0.0;
      for (const auto& t : terms_[c]) {
        double phase = 0.0;
        for (int j = 0; j < dim_; ++j) phase += t.freq[j] * x[j];
        phase *= kTwoPi;
        v += t.cos_coeff * std::cos(phase) + t.sin_coeff * std::sin(phase);
      }
      out[c] = v;
    }
    return;
  }
  // multilinear interpolation with periodic wrap
  const int n = grid_n_;
  const std::size_t cells = pow_n(n, dim_);
  int base[8];
  double frac[8];
  for (int j = 0; j < dim_; ++j) {
    double p = wrap_unit(x[j]) * n;
    int b = static_cast<int>(p);
    if (b >= n) b = n - 1;
    base[j] = b;
    frac[j] = p - b;
  }
  const int corners = 1 << dim_;
  for (int c = 0; c < arity_; ++c) out[c] = 0.0;
  for (int corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int j = 0; j < dim_; ++j) {
      int bit = (corner >> j) & 1;
      int ij = base[j] + bit;
      if (ij >= n) ij -= n;
      w *= bit ? frac[j] : (1.0 - frac[j]);
      flat = flat * n + static_cast<std::size_t>(ij);
    }
    if (w == 0.0) continue;
    for (int c = 0; c < arity_; ++c)
      out[c] += w * values_[static_cast<std::size_t>(c) * cells + flat];
  }
}

double PeriodicField::evaluate_scalar(std::span<const double> x) const {
  double v[1];
  if (arity_ != 1) throw ConfigError("PeriodicField: scalar evaluation of vector field");
  evaluate(x, std::span<double>(v, 1));
  return v[0];
}

void PeriodicField::gradient(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ConfigError("PeriodicField::gradient: point dimension mismatch");
  if (backing_ == Backing::Fourier) {
    for (int c = 0; c < arity_; ++c) {
      for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(c) * dim_ + j] = 0.0;
      for (const auto& t : terms_[c]) {
        double phase = 0.0;
        for (int j = 0; j < dim_; ++j) phase += t.freq[j] * x[j];
        phase *= kTwoPi;
        double dv = -t.cos_coeff * std::sin(phase) + t.sin_coeff * std::cos(phase);
        for (int j = 0; j < dim_; ++j)
          out[static_cast<std::size_t>(c) * dim_ + j] += kTwoPi * t.freq[j] * dv;
      }
    }
    return;
  }
  const double h = 1.0 / grid_n_;
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> vp(arity_), vm(arity_);
  for (int j = 0; j < dim_; ++j) {
    xp[j] = x[j] + h;
    evaluate(xp, vp);
    xp[j] = x[j] - h;
    evaluate(xp, vm);
    xp[j] = x[j];
    for (int c = 0; c < arity_; ++c)
      out[static_cast<std::size_t>(c) * dim_ + j] = (vp[c] - vm[c]) / (2.0 * h);
  }
}

void PeriodicField::hessian(std::span<const double> x, int component, std::span<double> out) const {
  if (backing_ == Backing::Fourier) {
    for (int i = 0; i < dim_ * dim_; ++i) out[i] = 0.0;
    for (const auto& t : terms_[component]) {
      double phase = 0.0;
      for (int j = 0; j < dim_; ++j) phase += t.freq[j] * x[j];
      phase *= kTwoPi;
      double d2 = -t.cos_coeff * std::cos(phase) - t.sin_coeff * std::sin(phase);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          out[static_cast<std::size_t>(i) * dim_ + j] +=
              kTwoPi * kTwoPi * t.freq[i] * t.freq[j] * d2;
    }
    return;
  }
  const double h = 1.0 / grid_n_;
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> buf(arity_);
  auto eval_c = [&](const std::vector<double>& p) {
    evaluate(p, buf);
    return buf[component];
  };
  double f0 = eval_c(xp);
  for (int i = 0; i < dim_; ++i) {
    xp[i] = x[i] + h;
    double fp = eval_c(xp);
    xp[i] = x[i] - h;
    double fm = eval_c(xp);
    xp[i] = x[i];
    out[static_cast<std::size_t>(i) * dim_ + i] = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = i + 1; j < dim_; ++j) {
      xp[i] = x[i] + h;
      xp[j] = x[j] + h;
      double fpp = eval_c(xp);
      xp[j] = x[j] - h;
      double fpm = eval_c(xp);
      xp[i] = x[i] - h;
      double fmm = eval_c(xp);
      xp[j] = x[j] + h;
      double fmp = eval_c(xp);
      xp[i] = x[i];
      xp[j] = x[j];
      double v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      out[static_cast<std::size_t>(i) * dim_ + j] = v;
      out[static_cast<std::size_t>(j) * dim_ + i] = v;
    }
  }
}

double PeriodicField::sup_bound() const {
  if (backing_ == Backing::Fourier) {
    double bound = 0.0;
    for (const auto& comp : terms_) {
      double b = 0.0;
      for (const auto& t : comp) b += std::abs(t.cos_coeff) + std::abs(t.sin_coeff);
      bound = std::max(bound, b);
    }
    return bound;
  }
  double bound = 0.0;
  for (double v : values_) bound = std::max(bound, std::abs(v));
  return bound;
}

double PeriodicField::grad_sup_bound() const {
  if (backing_ == Backing::Fourier) {
    double bound = 0.0;
    for (const auto& comp : terms_) {
      double b = 0.0;
      for (const auto& t : comp) {
        double knorm = 0.0;
        for (int k : t.freq) knorm = std::max(knorm, std::abs(static_cast<double>(k)));
        b += kTwoPi * knorm * (std::abs(t.cos_coeff) + std::abs(t.sin_coeff));
      }
      bound = std::max(bound, b);
    }
    return bound;
  }
  // finite-difference scan over nodes
  const int n = grid_n_;
  const std::size_t cells = pow_n(n, dim_);
  double bound = 0.0;
  for (int c = 0; c < arity_; ++c) {
    const double* vals = values_.data() + static_cast<std::size_t>(c) * cells;
    for (std::size_t flat = 0; flat < cells; ++flat) {
      std::size_t stride = 1;
      std::size_t rem = flat;
      for (int j = dim_ - 1; j >= 0; --j) {
        std::size_t ij = rem % n;
        rem /= n;
        std::size_t up = flat + (ij + 1 == static_cast<std::size_t>(n)
                                     ? stride - stride * static_cast<std::size_t>(n)
                                     : stride);
        bound = std::max(bound, std::abs(vals[up] - vals[flat]) * n);
        stride *= static_cast<std::size_t>(n);
      }
    }
  }
  return bound;
}

double PeriodicField::second_deriv_bound() const {
  if (backing_ == Backing::Fourier) {
    double bound = 0.0;
    for (const auto& comp : terms_) {
      double b = 0.0;
      for (const auto& t : comp) {
        double knorm = 0.0;
        for (int k : t.freq) knorm += std::abs(static_cast<double>(k));
        b += std::pow(kTwoPi * knorm, 2) * (std::abs(t.cos_coeff) + std::abs(t.sin_coeff));
      }
      bound = std::max(bound, b);
    }
    return bound;
  }
  double bound = 0.0;
  const int n = grid_n_;
  const double h2 = 1.0 / (static_cast<double>(n) * n);
  const std::size_t cells = pow_n(n, dim_);
  for (int c = 0; c < arity_; ++c) {
    const double* vals = values_.data() + static_cast<std::size_t>(c) * cells;
    std::size_t stride = 1;
    for (int j = dim_ - 1; j >= 0; --j) {
      for (std::size_t flat = 0; flat < cells; ++flat) {
        auto shifted = [&](int k) {
          std::size_t rem = (flat / stride) % n;
          std::size_t nj = (rem + n + k) % n;
          return flat + (nj - rem) * stride;
        };
        double d2 = vals[shifted(1)] - 2.0 * vals[flat] + vals[shifted(-1)];
        bound = std::max(bound, std::abs(d2) / h2);
      }
      stride *= static_cast<std::size_t>(n);
    }
  }
  return bound;
}

double PeriodicField::third_deriv_bound() const {
  if (backing_ == Backing::Fourier) {
    double bound = 0.0;
    for (const auto& comp : terms_) {
      double b = 0.0;
      for (const auto& t : comp) {
        double knorm = 0.0;
        for (int k : t.freq) knorm += std::abs(static_cast<double>(k));
        b += std::pow(kTwoPi * knorm, 3) * (std::abs(t.cos_coeff) + std::abs(t.sin_coeff));
      }
      bound = std::max(bound, b);
    }
    return bound;
  }
  // crude grid estimate via third differences along each axis
  double bound = 0.0;
  const int n = grid_n_;
  const double h3 = 1.0 / (static_cast<double>(n) * n * n);
  const std::size_t cells = pow_n(n, dim_);
  for (int c = 0; c < arity_; ++c) {
    const double* vals = values_.data() + static_cast<std::size_t>(c) * cells;
    std::size_t stride = 1;
    for (int j = dim_ - 1; j >= 0; --j) {
      for (std::size_t flat = 0; flat < cells; ++flat) {
        auto shifted = [&](int k) {
          std::size_t rem = (flat / stride) % n;
          std::size_t nj = (rem + n + k) % n;
          return flat + (nj - rem) * stride;
        };
        double d3 = vals[shifted(2)] - 3.0 * vals[shifted(1)] + 3.0 * vals[flat] - vals[shifted(-1)];
        bound = std::max(bound, std::abs(d3) / h3);
      }
      stride *= static_cast<std::size_t>(n);
    }
  }
  return bound;
}

EmpiricalMeasure::EmpiricalMeasure(int dim, int grid_n) : dim_(dim), grid_n_(grid_n) {
  if (dim <= 0 || grid_n <= 0) throw ConfigError("EmpiricalMeasure: bad shape");
  weights_.assign(pow_n(grid_n, dim), 0.0);
}

EmpiricalMeasure EmpiricalMeasure::uniform(int dim, int grid_n) {
  EmpiricalMeasure m(dim, grid_n);
  double w = 1.0 / static_cast<double>(m.weights_.size());
  std::fill(m.weights_.begin(), m.weights_.end(), w);
  m.total_ = 1.0;
  m.normalized_ = true;
  return m;
}

std::size_t EmpiricalMeasure::cell_index(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ConfigError("EmpiricalMeasure::cell_index: dimension mismatch");
  std::size_t flat = 0;
  for (int j = 0; j < dim_; ++j) {
    int i = static_cast<int>(wrap_unit(x[j]) * grid_n_);
    if (i >= grid_n_) i = grid_n_ - 1;
    flat = flat * grid_n_ + static_cast<std::size_t>(i);
  }
  return flat;
}

void EmpiricalMeasure::cell_center(std::size_t index, std::span<double> out) const {
  std::size_t rem = index;
  for (int j = dim_ - 1; j >= 0; --j) {
    out[j] = (static_cast<double>(rem % grid_n_) + 0.5) / grid_n_;
    rem /= grid_n_;
  }
}

void EmpiricalMeasure::add(std::span<const double> x, double weight) {
  add_cell(cell_index(x), weight);
}

void EmpiricalMeasure::add_cell(std::size_t index, double weight) {
  if (weight < 0.0) throw ConfigError("EmpiricalMeasure: negative weight");
  weights_[index] += weight;
  total_ += weight;
  normalized_ = false;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
  if (other.dim_ != dim_ || other.grid_n_ != grid_n_)
    throw ConfigError("EmpiricalMeasure::merge: shape mismatch");
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += other.weights_[i];
  total_ += other.total_;
  normalized_ = false;
}

void EmpiricalMeasure::normalize() {
  if (total_ <= 0.0) throw NumericsError("EmpiricalMeasure::normalize: empty measure");
  for (double& w : weights_) w /= total_;
  total_ = 1.0;
  normalized_ = true;
}

double EmpiricalMeasure::tv_distance(const EmpiricalMeasure& other) const {
  if (!normalized_ || !other.normalized_)
    throw NumericsError("tv_distance: measures must be normalized");
  if (other.dim_ != dim_ || other.grid_n_ != grid_n_)
    throw ConfigError("tv_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += std::abs(weights_[i] - other.weights_[i]);
  return 0.5 * s;
}

std::vector<double> integrate_uniform(const PeriodicField& f, int nodes_per_axis) {
  const int d = f.dim();
  const std::size_t cells = pow_n(nodes_per_axis, d);
  std::vector<double> acc(f.arity(), 0.0), x(d), val(f.arity());
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rem = flat;
    for (int j = d - 1; j >= 0; --j) {
      x[j] = (static_cast<double>(rem % nodes_per_axis) + 0.5) / nodes_per_axis;
      rem /= nodes_per_axis;
    }
    f.evaluate(x, val);
    for (int c = 0; c < f.arity(); ++c) acc[c] += val[c];
  }
  for (double& a : acc) a /= static_cast<double>(cells);
  return acc;
}

std::vector<double> integrate(const PeriodicField& f, const EmpiricalMeasure& mu,
                              bool allow_unnormalized) {
  if (f.dim() != mu.dim()) throw ConfigError("integrate: dimension mismatch");
  if (!mu.normalized() && !allow_unnormalized)
    throw NumericsError("integrate: measure not normalized (pass allow_unnormalized to override)");
  std::vector<double> acc(f.arity(), 0.0), x(mu.dim()), val(f.arity());
  for (std::size_t i = 0; i < mu.cell_count(); ++i) {
    double w = mu.weights()[i];
    if (w == 0.0) continue;
    mu.cell_center(i, x);
    f.evaluate(x, val);
    for (int c = 0; c < f.arity(); ++c) acc[c] += w * val[c];
  }
  return acc;
}

CenteringReport check_centering(const PeriodicField& b, const EmpiricalMeasure& mu, double tol) {
  CenteringReport rep;
  rep.tol = tol;
  rep.residual = integrate(b, mu);
  for (double& r : rep.residual) r = std::abs(r);
  rep.max_abs = *std::max_element(rep.residual.begin(), rep.residual.end());
  rep.pass = rep.max_abs <= tol;
  return rep;
}

double estimate_holder_constant(const std::function<double(std::span<const double>)>& g, int dim,
                                double beta, int n_pairs, double min_dist, double max_dist,
                                Rng& rng) {
  std::vector<double> x1(dim), x2(dim);
  double worst = 0.0;
  for (int p = 0; p < n_pairs; ++p) {
    for (int j = 0; j < dim; ++j) x1[j] = rng.uniform();
    // log-uniform separation, random axis-mix direction
    double r = min_dist * std::pow(max_dist / min_dist, rng.uniform());
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      x2[j] = rng.uniform() - 0.5;
      norm2 += x2[j] * x2[j];
    }
    double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    for (int j = 0; j < dim; ++j) x2[j] = x1[j] + x2[j] / norm * r;
    double num = std::abs(g(x1) - g(x2));
    double ratio = num / std::pow(r, beta);
    worst = std::max(worst, ratio);
  }
  return worst;
}

}  // namespace homog
