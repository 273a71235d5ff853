#ifndef PARTLIK_MODEL_HPP
#define PARTLIK_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "partlik/mvn.hpp"

namespace partlik::model {

using mvn::Matrix;
using mvn::Vector;

// Maps an unconstrained parameter vector theta to model-implied (mu, Sigma).
class Model {
 public:
  virtual ~Model() = default;
  virtual Eigen::Index dim() const = 0;  // theta length
  virtual Eigen::Index p() const = 0;    // observed variable count
  virtual mvn::ParameterSet realize(const Vector& theta) const = 0;
  virtual Vector encode(const mvn::ParameterSet& params) const = 0;
  // Natural-scale view of theta for reporting (delta-method SEs map here).
  virtual Vector natural(const Vector& theta) const = 0;
  virtual std::vector<std::string> natural_names() const = 0;
};

// Free mean plus log-Cholesky covariance: theta = [mu (p), L by columns with
// log diagonals (p(p+1)/2)]. Every theta decodes to a PD covariance.
class SaturatedModel final : public Model {
 public:
  explicit SaturatedModel(Eigen::Index p,
                          std::vector<std::string> var_names = {});

  Eigen::Index dim() const override { return p_ + p_ * (p_ + 1) / 2; }
  Eigen::Index p() const override { return p_; }
  mvn::ParameterSet realize(const Vector& theta) const override;
  Vector encode(const mvn::ParameterSet& params) const override;
  Vector natural(const Vector& theta) const override;
  std::vector<std::string> natural_names() const override;

 private:
  Eigen::Index p_;
  std::vector<std::string> var_names_;
};

// Linear latent growth curve over J waves: intercept/slope factors with
// loadings fixed at 0..J-1, a 2x2 latent covariance (log-Cholesky), a common
// residual variance (log scale), and free factor means.
//   theta = (log l11, l21, log l22, log s2_e, mu_int, mu_slp)
class LgmModel final : public Model {
 public:
  explicit LgmModel(Eigen::Index waves);

  Eigen::Index dim() const override { return 6; }
  Eigen::Index p() const override { return waves_; }
  mvn::ParameterSet realize(const Vector& theta) const override;
  Vector encode(const mvn::ParameterSet& params) const override;
  Vector natural(const Vector& theta) const override;
  std::vector<std::string> natural_names() const override;

  Matrix loadings() const;  // J x 2

 private:
  Eigen::Index waves_;
};

std::unique_ptr<Model> make_model(const std::string& name, Eigen::Index p_or_waves);

}  // namespace partlik::model

#endif
