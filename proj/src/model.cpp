#include "partlik/model.hpp"

#include <cmath>

namespace partlik::model {

namespace {

void require_finite(const Vector& theta) {
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (!std::isfinite(theta(i))) throw DomainError("theta contains non-finite entries");
}

// theta segment -> lower-triangular factor, diagonals exponentiated.
Matrix unpack_log_chol(const Vector& t, Eigen::Index p) {
  Matrix l = Matrix::Zero(p, p);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    l(j, j) = std::exp(t(k++));
    for (Eigen::Index i = j + 1; i < p; ++i) l(i, j) = t(k++);
  }
  return l;
}

Vector pack_log_chol(const Matrix& l) {
  const Eigen::Index p = l.rows();
  Vector t(p * (p + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    t(k++) = std::log(l(j, j));
    for (Eigen::Index i = j + 1; i < p; ++i) t(k++) = l(i, j);
  }
  return t;
}

}  // namespace

SaturatedModel::SaturatedModel(Eigen::Index p, std::vector<std::string> var_names)
    : p_(p), var_names_(std::move(var_names)) {
  if (p_ < 1) throw DomainError("SaturatedModel: p must be >= 1");
  if (var_names_.empty())
    for (Eigen::Index i = 0; i < p_; ++i) var_names_.push_back("v" + std::to_string(i + 1));
  if (static_cast<Eigen::Index>(var_names_.size()) != p_)
    throw ShapeError("SaturatedModel: var_names length mismatch");
}

mvn::ParameterSet SaturatedModel::realize(const Vector& theta) const {
  if (theta.size() != dim()) throw ShapeError("SaturatedModel::realize: wrong theta length");
  require_finite(theta);
  Vector mu = theta.head(p_);
  Matrix l = unpack_log_chol(theta.tail(p_ * (p_ + 1) / 2), p_);
  Matrix sigma = l * l.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  return mvn::ParameterSet(mu, sigma, var_names_);
}

Vector SaturatedModel::encode(const mvn::ParameterSet& params) const {
  if (params.dim() != p_) throw ShapeError("SaturatedModel::encode: dimension mismatch");
  Vector theta(dim());
  theta.head(p_) = params.mean;
  theta.tail(p_ * (p_ + 1) / 2) = pack_log_chol(mvn::cholesky(params.cov));
  return theta;
}

Vector SaturatedModel::natural(const Vector& theta) const {
  mvn::ParameterSet ps = realize(theta);
  Vector nat(dim());
  nat.head(p_) = ps.mean;
  Eigen::Index k = p_;
  for (Eigen::Index j = 0; j < p_; ++j)
    for (Eigen::Index i = j; i < p_; ++i) nat(k++) = ps.cov(i, j);
  return nat;
}

std::vector<std::string> SaturatedModel::natural_names() const {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < p_; ++i) names.push_back("mu_" + var_names_[static_cast<std::size_t>(i)]);
  for (Eigen::Index j = 0; j < p_; ++j)
    for (Eigen::Index i = j; i < p_; ++i)
      names.push_back("cov_" + var_names_[static_cast<std::size_t>(i)] + "_" +
                      var_names_[static_cast<std::size_t>(j)]);
  return names;
}

LgmModel::LgmModel(Eigen::Index waves) : waves_(waves) {
  if (waves_ < 2) throw DomainError("LgmModel: needs at least 2 waves");
}

Matrix LgmModel::loadings() const {
  Matrix lam(waves_, 2);
  for (Eigen::Index j = 0; j < waves_; ++j) {
    lam(j, 0) = 1.0;
    lam(j, 1) = static_cast<double>(j);
  }
  return lam;
}

mvn::ParameterSet LgmModel::realize(const Vector& theta) const {
  if (theta.size() != 6) throw ShapeError("LgmModel::realize: theta must have length 6");
  require_finite(theta);
  Matrix l = Matrix::Zero(2, 2);
  l(0, 0) = std::exp(theta(0));
  l(1, 0) = theta(1);
  l(1, 1) = std::exp(theta(2));
  Matrix phi = l * l.transpose();
  double s2e = std::exp(theta(3));
  Vector fmeans(2);
  fmeans << theta(4), theta(5);

  Matrix lam = loadings();
  Matrix sigma = lam * phi * lam.transpose();
  sigma.diagonal().array() += s2e;
  sigma = 0.5 * (sigma + sigma.transpose());
  Vector mu = lam * fmeans;

  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < waves_; ++j) names.push_back("wave" + std::to_string(j + 1));
  return mvn::ParameterSet(mu, sigma, names);
}

Vector LgmModel::encode(const mvn::ParameterSet& params) const {
  if (params.dim() != waves_) throw ShapeError("LgmModel::encode: dimension mismatch");
  const Matrix lam = loadings();
  const Matrix gram_inv = (lam.transpose() * lam).inverse();
  const Matrix proj = lam * gram_inv * lam.transpose();

  // Residual variance from the orthogonal complement of the loading space,
  // then the latent covariance from the projected remainder.
  const Matrix perp = Matrix::Identity(waves_, waves_) - proj;
  double s2e = (perp * params.cov * perp).trace() / perp.trace();
  Matrix centered = params.cov - s2e * Matrix::Identity(waves_, waves_);
  Matrix phi = gram_inv * lam.transpose() * centered * lam * gram_inv;
  phi = 0.5 * (phi + phi.transpose());
  Vector fmeans = gram_inv * lam.transpose() * params.mean;

  const double cov_scale = std::max(1.0, params.cov.cwiseAbs().maxCoeff());
  Matrix implied = lam * phi * lam.transpose();
  implied.diagonal().array() += s2e;
  if ((implied - params.cov).cwiseAbs().maxCoeff() > 1e-9 * cov_scale ||
      (lam * fmeans - params.mean).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, params.mean.cwiseAbs().maxCoeff()))
    throw NotRepresentable("LgmModel::encode: parameters do not have LGM structure");
  if (s2e <= 0.0) throw NotRepresentable("LgmModel::encode: nonpositive residual variance");

  Matrix lphi;
  try {
    lphi = mvn::cholesky(phi);
  } catch (const CovarianceNotPd&) {
    throw NotRepresentable("LgmModel::encode: latent covariance not PD");
  }
  Vector theta(6);
  theta << std::log(lphi(0, 0)), lphi(1, 0), std::log(lphi(1, 1)), std::log(s2e),
      fmeans(0), fmeans(1);
  return theta;
}

Vector LgmModel::natural(const Vector& theta) const {
  Matrix l = Matrix::Zero(2, 2);
  l(0, 0) = std::exp(theta(0));
  l(1, 0) = theta(1);
  l(1, 1) = std::exp(theta(2));
  Matrix phi = l * l.transpose();
  Vector nat(6);
  nat << std::sqrt(phi(0, 0)), phi(1, 0), std::sqrt(phi(1, 1)),
      std::exp(0.5 * theta(3)), theta(4), theta(5);
  return nat;
}

std::vector<std::string> LgmModel::natural_names() const {
  return {"sigma_intercept", "sigma_intr_slp", "sigma_slope", "sigma_e",
          "mu_intercept", "mu_slope"};
}

std::unique_ptr<Model> make_model(const std::string& name, Eigen::Index p_or_waves) {
  if (name == "saturated") return std::make_unique<SaturatedModel>(p_or_waves);
  if (name == "lgm") return std::make_unique<LgmModel>(p_or_waves);
  throw ConfigError("unknown model: " + name);
}

}  // namespace partlik::model
