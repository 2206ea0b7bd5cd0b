#include "rmp/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

namespace rmp {

namespace {

struct Term {
  std::vector<int> powers;
  int aux = -1;
};

void monomials(std::size_t width, int max_degree, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(width, 0);
  // Enumerate exponent vectors by total degree, then lexicographically.
  for (int total = 0; total <= max_degree; ++total) {
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
      if (pos + 1 == width || width == 0) {
        if (width > 0) cur[pos] = left;
        out.push_back(cur);
        return;
      }
      for (int e = left; e >= 0; --e) {
        cur[pos] = e;
        rec(pos + 1, left - e);
      }
    };
    if (width == 0) {
      if (total == 0) out.push_back({});
      continue;
    }
    rec(0, total);
  }
}

double eval_monomial(const std::vector<int>& powers, const double* x) {
  double v = 1.0;
  for (std::size_t i = 0; i < powers.size(); ++i)
    for (int e = 0; e < powers[i]; ++e) v *= x[i];
  return v;
}

}  // namespace

struct Projector::Impl {
  std::size_t n_paths = 0;
  std::size_t n_terms = 0;
  std::vector<std::size_t> kept;
  std::vector<double> mean, scale;
  Eigen::MatrixXd design;
  Eigen::LDLT<Eigen::MatrixXd> gram;
};

Projector::Projector(std::span<const double> features, std::size_t width, std::size_t n_paths,
                     const RegressionBasis& basis, std::span<const double> aux,
                     std::size_t aux_width)
    : impl_(std::make_unique<Impl>()) {
  if (basis.degree < 0 || basis.aux_degree < 0)
    throw ConfigError("regression degrees must be nonnegative");
  std::vector<Term> terms;
  {
    std::vector<std::vector<int>> mons;
    monomials(width, basis.degree, mons);
    for (auto& m : mons) {
      int deg = 0;
      for (int e : m) deg += e;
      if (deg > 0) terms.push_back({m, -1});
    }
    if (aux_width > 0) {
      std::vector<std::vector<int>> amons;
      monomials(width, basis.aux_degree, amons);
      for (std::size_t a = 0; a < aux_width; ++a)
        for (auto& m : amons) terms.push_back({m, static_cast<int>(a)});
    }
  }
  auto& im = *impl_;
  im.n_paths = n_paths;
  im.n_terms = terms.size();
  const std::size_t K = terms.size();
  Eigen::MatrixXd raw(n_paths, K);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double* x = features.data() + p * width;
    for (std::size_t j = 0; j < K; ++j) {
      double v = eval_monomial(terms[j].powers, x);
      if (terms[j].aux >= 0) v *= aux[p * aux_width + static_cast<std::size_t>(terms[j].aux)];
      raw(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = v;
    }
  }
  if (!raw.allFinite()) throw RegressionError("non-finite regression feature");
  for (std::size_t j = 0; j < K; ++j) {
    auto col = raw.col(static_cast<Eigen::Index>(j));
    const double mu = col.mean();
    const double sd = std::sqrt((col.array() - mu).square().mean());
    if (sd > 1e-13 * (1.0 + std::abs(mu))) {
      im.kept.push_back(j);
      im.mean.push_back(mu);
      im.scale.push_back(sd);
    }
  }
  const std::size_t Ka = im.kept.size();
  if (Ka > 0 && n_paths <= Ka + 1)
    throw RegressionError("regression needs more paths (" + std::to_string(n_paths) +
                          ") than basis terms (" + std::to_string(Ka + 1) + ")");
  im.design.resize(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(Ka));
  for (std::size_t a = 0; a < Ka; ++a)
    im.design.col(static_cast<Eigen::Index>(a)) =
        (raw.col(static_cast<Eigen::Index>(im.kept[a])).array() - im.mean[a]) / im.scale[a];
  if (Ka > 0) {
    Eigen::MatrixXd g = im.design.transpose() * im.design;
    g.diagonal().array() += basis.ridge * static_cast<double>(n_paths);
    im.gram.compute(g);
    if (im.gram.info() != Eigen::Success || !im.gram.isPositive())
      throw RegressionError("regression normal equations are singular after ridge");
  }
}

Projector::~Projector() = default;
Projector::Projector(Projector&&) noexcept = default;
Projector& Projector::operator=(Projector&&) noexcept = default;

std::size_t Projector::n_paths() const { return impl_->n_paths; }
std::size_t Projector::n_terms() const { return impl_->n_terms; }
std::size_t Projector::n_active() const { return impl_->kept.size(); }

void Projector::project(std::span<const double> target, std::span<double> fitted,
                        std::size_t stride, std::size_t offset) const {
  const auto& im = *impl_;
  const auto N = static_cast<Eigen::Index>(im.n_paths);
  Eigen::VectorXd y(N);
  double s = 0.0;
  for (Eigen::Index p = 0; p < N; ++p) {
    y(p) = target[static_cast<std::size_t>(p) * stride + offset];
    s += y(p);
  }
  const double ybar = s / static_cast<double>(N);
  if (!std::isfinite(ybar)) throw RegressionError("non-finite regression target");
  if (im.kept.empty()) {
    for (Eigen::Index p = 0; p < N; ++p) fitted[static_cast<std::size_t>(p)] = ybar;
    return;
  }
  y.array() -= ybar;
  const Eigen::VectorXd c = im.gram.solve(im.design.transpose() * y);
  const Eigen::VectorXd f = im.design * c;
  for (Eigen::Index p = 0; p < N; ++p) fitted[static_cast<std::size_t>(p)] = ybar + f(p);
}

RegressionFit Projector::fit(std::span<const double> target) const {
  const auto& im = *impl_;
  RegressionFit out;
  out.fitted.resize(im.n_paths);
  project(target, out.fitted);
  double ybar = 0.0;
  for (std::size_t p = 0; p < im.n_paths; ++p) ybar += target[p];
  ybar /= static_cast<double>(im.n_paths);
  out.coefficients.assign(im.n_terms + 1, 0.0);
  if (!im.kept.empty()) {
    const auto N = static_cast<Eigen::Index>(im.n_paths);
    Eigen::VectorXd y(N);
    for (Eigen::Index p = 0; p < N; ++p) y(p) = target[static_cast<std::size_t>(p)] - ybar;
    const Eigen::VectorXd c = im.gram.solve(im.design.transpose() * y);
    double intercept = ybar;
    for (std::size_t a = 0; a < im.kept.size(); ++a) {
      const double raw = c(static_cast<Eigen::Index>(a)) / im.scale[a];
      out.coefficients[im.kept[a] + 1] = raw;
      intercept -= raw * im.mean[a];
    }
    out.coefficients[0] = intercept;
  } else {
    out.coefficients[0] = ybar;
  }
  double ss = 0.0;
  for (std::size_t p = 0; p < im.n_paths; ++p) {
    const double r = target[p] - out.fitted[p];
    ss += r * r;
  }
  out.residual_rms = std::sqrt(ss / static_cast<double>(im.n_paths));
  return out;
}

RegressionFit condexp_regress(std::span<const double> targets, std::span<const double> features,
                              std::size_t width, const RegressionBasis& basis) {
  if (width == 0 || features.size() % width != 0 || features.size() / width != targets.size())
    throw ConfigError("feature and target sizes disagree");
  Projector proj(features, width, targets.size(), basis);
  return proj.fit(targets);
}

}  // namespace rmp
