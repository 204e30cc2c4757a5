#include "emi/coupling.hpp"

#include <cmath>
#include <string>

#include "emi/error.hpp"

namespace emi {

namespace {

void check_operators(const Scene& scene, const std::vector<SteklovOperator>& ops) {
  if (ops.size() != scene.num_domains())
    throw DomainError("one Steklov operator per domain is required");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].size() != scene.domain_size(static_cast<int>(i)))
      throw DomainError("Steklov operator " + std::to_string(i) + " does not match its domain");
    if (!ops[i].regularized())
      throw DomainError("Steklov operator " + std::to_string(i) + " is not regularized");
  }
}

void check_finite(const Eigen::VectorXd& v, std::size_t size) {
  if (static_cast<std::size_t>(v.size()) != size)
    throw DomainError("transmembrane vector has length " + std::to_string(v.size()) +
                      ", expected " + std::to_string(size));
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!std::isfinite(v[k])) throw DomainError("non-finite entry at node " + std::to_string(k));
}

Eigen::PartialPivLU<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& S, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  const double rc = lu.rcond();
  if (!(rc > 1e-15))
    throw SolverError(std::string(what) + ": saddle matrix is singular (rcond " +
                      std::to_string(rc) + ")");
  return lu;
}

}  // namespace

UnicellSystem::UnicellSystem(const Scene& scene, const std::vector<SteklovOperator>& ops,
                             double flux_scale) {
  if (scene.num_cells() != 1) throw DomainError("unicell system needs exactly one cell");
  check_operators(scene, ops);
  const auto M = static_cast<Eigen::Index>(scene.num_nodes());
  // Both domains see the nodes in global order.
  for (int i = 0; i < 2; ++i)
    for (Eigen::Index k = 0; k < M; ++k)
      if (scene.domain(i).global[k] != static_cast<std::size_t>(k))
        throw TopologyError("unicell system expects identity node numbering");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
  F_ = -(ops[1].solve_columns(I) / (flux_scale * scene.sigma(1)) +
         ops[0].solve_columns(I) / (flux_scale * scene.sigma(0)));
  S_ = Eigen::MatrixXd::Zero(M + 1, M + 1);
  S_.topLeftCorner(M, M) = F_;
  S_.col(M).head(M).setOnes();
  S_.row(M).head(M) = ops[1].compatibility().transpose();
  lu_ = factorize(S_, "unicell");
}

UnicellSystem::Solution UnicellSystem::solve(const Eigen::VectorXd& Vm) const {
  const auto M = F_.rows();
  check_finite(Vm, static_cast<std::size_t>(M));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M + 1);
  rhs.head(M) = Vm;
  const Eigen::VectorXd x = lu_.solve(rhs);
  return {x.head(M), x[M]};
}

CoupledSystem::CoupledSystem(const Scene& scene, std::vector<SteklovOperator> ops, double kappa,
                             double flux_scale)
    : scene_(scene), conn_(emi::connectivity(scene)), ops_(std::move(ops)), kappa_(kappa),
      flux_scale_(flux_scale) {
  if (!(kappa > 0.0)) throw DomainError("gap junction permeability must be positive");
  if (!(flux_scale > 0.0)) throw DomainError("flux scale must be positive");
  check_operators(scene_, ops_);
  const std::size_t M = scene_.num_nodes();
  m0_ = conn_.A0.rows();
  mg_ = conn_.Ag.rows();
  n_ = scene_.num_cells();

  F_ = Eigen::MatrixXd::Zero(M, M);
  G_ = Eigen::MatrixXd::Zero(M, n_);
  H_ = Eigen::MatrixXd::Zero(M, n_);
  for (std::size_t i = 0; i < scene_.num_domains(); ++i) {
    const auto& B = conn_.B[i];
    const auto Mi = static_cast<Eigen::Index>(B.rows());
    const Eigen::MatrixXd inv = ops_[i].solve_columns(Eigen::MatrixXd::Identity(Mi, Mi));
    const double c = 1.0 / conductance(static_cast<int>(i));
    for (Eigen::Index k = 0; k < Mi; ++k)
      for (Eigen::Index l = 0; l < Mi; ++l)
        F_(B.columns[k], B.columns[l]) -= c * B.signs[k] * B.signs[l] * inv(k, l);
    if (i > 0) {
      const Eigen::VectorXd w = ops_[i].compatibility();
      for (Eigen::Index k = 0; k < Mi; ++k) {
        G_(B.columns[k], i - 1) += B.signs[k];
        H_(B.columns[k], i - 1) += B.signs[k] * w[k];
      }
    }
  }

  // Reduced ordering: Gamma_0 rows, Gamma_g rows, one row per cell.
  std::vector<std::size_t> order(conn_.A0.columns);
  order.insert(order.end(), conn_.Ag.columns.begin(), conn_.Ag.columns.end());
  const auto m = static_cast<Eigen::Index>(M);
  const auto n = static_cast<Eigen::Index>(n_);
  S_ = Eigen::MatrixXd::Zero(m + n, m + n);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) S_(a, b) = F_(order[a], order[b]);
    for (Eigen::Index c = 0; c < n; ++c) {
      S_(a, m + c) = G_(order[a], c);
      S_(m + c, a) = H_(order[a], c);
    }
  }
  for (std::size_t g = m0_; g < M; ++g) S_(g, g) -= 1.0 / kappa_;
  lu_ = factorize(S_, "coupled");
}

CoupledSystem::Solution CoupledSystem::solve(const Eigen::VectorXd& Vm) const {
  check_finite(Vm, m0_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S_.rows());
  rhs.head(m0_) = Vm;
  const Eigen::VectorXd x = lu_.solve(rhs);
  Solution s;
  s.lambda0 = x.head(m0_);
  s.lambda_g = x.segment(m0_, mg_);
  s.beta = x.tail(n_);
  s.lambda = conn_.A0.apply_transpose(s.lambda0);
  if (mg_ > 0) s.lambda += conn_.Ag.apply_transpose(s.lambda_g);
  return s;
}

Eigen::VectorXd CoupledSystem::psi(const Eigen::VectorXd& Vm) const {
  check_finite(Vm, m0_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S_.rows());
  rhs.head(m0_) = Vm;
  return lu_.solve(rhs).head(m0_);
}

Eigen::MatrixXd CoupledSystem::psi_matrix() const {
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(S_.rows(), m0_);
  rhs.topRows(m0_).setIdentity();
  return lu_.solve(rhs).topRows(m0_);
}

CoupledSystem::Potentials CoupledSystem::recover_all_potentials(const Solution& s) const {
  Potentials p;
  p.beta = Eigen::VectorXd::Zero(n_ + 1);
  p.beta.tail(n_) = s.beta;
  for (std::size_t i = 0; i < scene_.num_domains(); ++i) {
    const Eigen::VectorXd local = conn_.B[i].apply(s.lambda);
    Eigen::VectorXd u = -ops_[i].solve(local) / conductance(static_cast<int>(i));
    u.array() += p.beta[i];
    p.u.push_back(std::move(u));
  }
  return p;
}

CoupledSystem build_coupled(const Scene& scene, double kappa, double flux_scale,
                            double alpha_scale, Compatibility mode) {
  return CoupledSystem(scene, scene_operators(scene, alpha_scale, mode), kappa, flux_scale);
}

}  // namespace emi
