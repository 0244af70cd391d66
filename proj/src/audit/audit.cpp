#include "arc/audit/audit.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "arc/algebra/rng.hpp"

namespace arc::audit {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

long double binomial_upper_tail(std::size_t n, std::size_t k, long double tau) {
  if (k == 0) return 1.0L;
  if (k > n) return 0.0L;
  if (tau <= 0) return 0.0L;
  if (tau >= 1) return 1.0L;
  // Terms from k upward, each from the previous by the pmf ratio.
  long double log_term = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                         std::lgamma(static_cast<long double>(n - k) + 1) + k * std::log(tau) +
                         (n - k) * std::log1p(-tau);
  long double term = std::exp(log_term);
  long double sum = 0;
  for (std::size_t i = k; i <= n; ++i) {
    sum += term;
    term *= static_cast<long double>(n - i) / static_cast<long double>(i + 1) * tau / (1 - tau);
  }
  return std::min(sum, 1.0L);
}

std::size_t certify_threshold(std::size_t n, long double tau, double alpha) {
  for (std::size_t c = 0; c <= n; ++c)
    if (binomial_upper_tail(n, c, tau) <= alpha) return c;
  return n + 1;
}

void RobustnessParams::validate() const {
  if (!(sigma > 0)) throw InvalidParams("sigma must be positive");
  if (!(R >= 0)) throw InvalidParams("radius must be non-negative");
  if (n == 0) throw InvalidParams("sample count must be positive");
  if (!(alpha > 0 && alpha < 1)) throw InvalidParams("alpha must lie in (0, 1)");
}

void FairnessParams::validate(std::size_t width) const {
  if (!(L > 0)) throw InvalidParams("Lipschitz constant must be positive");
  if (n == 0) throw InvalidParams("sample count must be positive");
  if (!(alpha > 0 && alpha < 1)) throw InvalidParams("alpha must lie in (0, 1)");
  if (theta.size() != width * width) throw InvalidParams("theta must be width x width");
  Eigen::Map<const Eigen::MatrixXd> T(theta.data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
  if (!T.isApprox(T.transpose())) throw NotPositiveDefinite("theta is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(T);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("theta is not positive definite");
}

double FairnessParams::tau() const { return std_normal_cdf(std::sqrt(1.0 / L)); }

std::vector<double> isotropic_noise(std::size_t n, std::size_t width, double sigma, std::uint64_t coin) {
  Rng rng(coin);
  std::vector<double> out(n * width);
  for (auto& v : out) v = sigma * standard_normal(rng);
  return out;
}

std::vector<double> fairness_noise(std::size_t n, std::size_t width, std::span<const double> theta,
                                   std::uint64_t coin) {
  const auto w = static_cast<Eigen::Index>(width);
  Eigen::MatrixXd T = Eigen::Map<const Eigen::MatrixXd>(theta.data(), w, w);
  Eigen::LLT<Eigen::MatrixXd> llt(T);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("theta is not positive definite");
  Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(w, w));
  Eigen::LLT<Eigen::MatrixXd> chol(0.5 * (sigma + sigma.transpose()));
  Eigen::MatrixXd Lf = chol.matrixL();
  Rng rng(coin);
  std::vector<double> out(n * width);
  Eigen::VectorXd g(w);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < w; ++j) g[j] = standard_normal(rng);
    Eigen::VectorXd row = Lf * g;
    for (Eigen::Index j = 0; j < w; ++j) out[i * width + static_cast<std::size_t>(j)] = row[j];
  }
  return out;
}

std::vector<Layer> sorting_network(std::size_t n) {
  if (n == 0 || (n & (n - 1))) throw InvalidParams("sorting network size must be a power of two");
  std::vector<Layer> layers;
  for (std::size_t p = 1; p < n; p <<= 1) {
    for (std::size_t k = p; k >= 1; k >>= 1) {
      Layer layer;
      for (std::size_t j = k % p; j + k < n; j += 2 * k)
        for (std::size_t i = 0; i < std::min(k, n - j - k); ++i)
          if ((i + j) / (2 * p) == (i + j + k) / (2 * p)) layer.emplace_back(i + j, i + j + k);
      if (!layer.empty()) layers.push_back(std::move(layer));
    }
  }
  return layers;
}

std::vector<double> knn_coefficients(std::size_t N, std::size_t K) {
  using Q = boost::multiprecision::cpp_rational;
  std::vector<double> C(N * N);
  std::vector<Q> e(N, Q(0));
  for (std::size_t j = 0; j < N; ++j) {
    e[j] = Q(1);
    auto col = knn_recursion<Q>(e, K);
    for (std::size_t i = 0; i < N; ++i)
      C[i * N + j] = static_cast<double>(col[i]);
    e[j] = Q(0);
  }
  return C;
}

Coalitions all_coalitions(std::size_t width) {
  if (width < 2 || width > 20) throw InvalidParams("exhaustive coalitions need 2 <= width <= 20");
  Coalitions c;
  c.width = width;
  for (std::uint64_t m = 1; m + 1 < (std::uint64_t{1} << width); ++m) {
    for (std::size_t j = 0; j < width; ++j) c.z.push_back((m >> j) & 1);
    ++c.count;
  }
  return c;
}

Coalitions sample_coalitions(std::size_t width, std::size_t count, std::uint64_t coin) {
  if (width < 2 || width > 62) throw InvalidParams("coalition width must lie in [2, 62]");
  if (count < width + 1) throw InvalidParams("need at least width + 1 coalitions");
  Coalitions c;
  c.width = width;
  c.count = count;
  Rng rng(coin);
  const std::uint64_t proper = (std::uint64_t{1} << width) - 2;
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t m = 1 + uniform_below(rng, proper);
    for (std::size_t j = 0; j < width; ++j) c.z.push_back((m >> j) & 1);
  }
  return c;
}

double shapley_kernel_weight(std::size_t width, std::size_t size) {
  if (size == 0 || size >= width) throw InvalidParams("kernel weight is infinite at the empty and full coalitions");
  double binom = std::round(std::exp(std::lgamma(width + 1.0) - std::lgamma(size + 1.0) - std::lgamma(width - size + 1.0)));
  return static_cast<double>(width - 1) / (binom * static_cast<double>(size) * static_cast<double>(width - size));
}

std::vector<double> kernel_shap_map(const Coalitions& c, double ridge) {
  const std::size_t n = c.width;
  if (n < 2) throw InvalidParams("kernel_shap needs at least two features");
  if (c.count == 0) throw InvalidParams("kernel_shap needs coalitions");
  const auto K = static_cast<Eigen::Index>(c.count);
  const auto F = static_cast<Eigen::Index>(n - 1);
  // phi_n is eliminated through sum phi = v_full - v_empty.
  Eigen::MatrixXd M(K, F);
  Eigen::VectorXd W(K), zl(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    std::size_t size = 0;
    for (std::size_t j = 0; j < n; ++j) size += c.in(static_cast<std::size_t>(k), j);
    W[k] = shapley_kernel_weight(n, size);
    zl[k] = c.in(static_cast<std::size_t>(k), n - 1);
    for (Eigen::Index i = 0; i < F; ++i) M(k, i) = c.in(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) - zl[k];
  }
  Eigen::MatrixXd G = M.transpose() * W.asDiagonal() * M;
  G.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-8)
    throw SingularSystem("kernel_shap normal equations are singular; sample more coalitions");
  Eigen::MatrixXd P = llt.solve(M.transpose() * W.asDiagonal());  // F x K
  // Targets t_k = yhat_k - (1 - zl_k) v_empty - zl_k v_full.
  const std::size_t in = c.count + 2;
  std::vector<double> A((n + 1) * in, 0.0);
  A[0] = 1.0;  // phi_0 = v_empty
  std::vector<double> sum_row(in, 0.0);
  for (Eigen::Index i = 0; i < F; ++i) {
    double* row = &A[static_cast<std::size_t>(i + 1) * in];
    for (Eigen::Index k = 0; k < K; ++k) {
      row[0] -= P(i, k) * (1 - zl[k]);
      row[1] -= P(i, k) * zl[k];
      row[2 + k] = P(i, k);
    }
    for (std::size_t t = 0; t < in; ++t) sum_row[t] += row[t];
  }
  double* last = &A[n * in];
  last[0] = -1.0;
  last[1] = 1.0;
  for (std::size_t t = 0; t < in; ++t) last[t] -= sum_row[t];
  return A;
}

std::vector<double> kernel_shap_fn(const std::function<double(std::span<const double>)>& model,
                                   std::span<const double> x, std::span<const double> X, std::size_t rows,
                                   const Coalitions& c) {
  const std::size_t n = c.width;
  if (x.size() != n || X.size() != rows * n) throw ml::WidthMismatch("kernel_shap: width mismatch");
  if (rows == 0) throw InvalidParams("kernel_shap: empty dataset");
  std::vector<double> in;
  double v0 = 0;
  for (std::size_t r = 0; r < rows; ++r) v0 += model(X.subspan(r * n, n));
  in.push_back(v0 / static_cast<double>(rows));
  in.push_back(model(x));
  std::vector<double> pt(n);
  for (std::size_t k = 0; k < c.count; ++k) {
    double s = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) pt[j] = c.in(k, j) ? x[j] : X[r * n + j];
      s += model(pt);
    }
    in.push_back(s / static_cast<double>(rows));
  }
  auto A = kernel_shap_map(c);
  std::vector<double> phi(n + 1, 0.0);
  for (std::size_t o = 0; o <= n; ++o)
    for (std::size_t t = 0; t < in.size(); ++t) phi[o] += A[o * in.size() + t] * in[t];
  return phi;
}

const char* to_string(Function f) {
  switch (f) {
    case Function::CertifyRS: return "certify_rs";
    case Function::CertifyFair: return "certify_fair";
    case Function::KnnShapley: return "knn_shapley";
    case Function::Camel: return "camel";
    case Function::KernelShap: return "kernel_shap";
  }
  return "?";
}

Function function_from_string(std::string_view s) {
  for (auto f : {Function::CertifyRS, Function::CertifyFair, Function::KnnShapley, Function::Camel,
                 Function::KernelShap})
    if (s == to_string(f)) return f;
  throw InvalidParams("unknown audit function '" + std::string(s) + "'");
}

AuditSpec AuditSpec::from_json(const nlohmann::json& j) {
  AuditSpec s;
  s.function = function_from_string(j.at("function").get<std::string>());
  switch (s.function) {
    case Function::CertifyRS:
      s.rs.R = j.value("R", s.rs.R);
      s.rs.sigma = j.value("sigma", s.rs.sigma);
      s.rs.n = j.value("n", s.rs.n);
      s.rs.alpha = j.value("alpha", s.rs.alpha);
      s.rs.validate();
      break;
    case Function::CertifyFair: {
      s.fair.L = j.value("L", s.fair.L);
      s.fair.n = j.value("n", s.fair.n);
      s.fair.alpha = j.value("alpha", s.fair.alpha);
      for (const auto& row : j.at("theta"))
        for (const auto& v : row) s.fair.theta.push_back(v.get<double>());
      break;
    }
    case Function::KnnShapley:
      s.K = j.value("K", s.K);
      if (s.K == 0) throw InvalidParams("K must be positive");
      break;
    case Function::Camel:
      s.camel.epochs = j.value("epochs", s.camel.epochs);
      s.camel.tau = j.value("tau", s.camel.tau);
      s.camel.lr = j.value("lr", s.camel.lr);
      break;
    case Function::KernelShap:
      s.samples = j.value("samples", s.samples);
      break;
  }
  return s;
}

nlohmann::json AuditSpec::to_json() const {
  nlohmann::json j{{"function", to_string(function)}};
  switch (function) {
    case Function::CertifyRS:
      j.update({{"R", rs.R}, {"sigma", rs.sigma}, {"n", rs.n}, {"alpha", rs.alpha}});
      break;
    case Function::CertifyFair: {
      const auto w = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(fair.theta.size()))));
      nlohmann::json theta = nlohmann::json::array();
      for (std::size_t i = 0; i < w; ++i)
        theta.push_back(std::vector<double>(fair.theta.begin() + static_cast<std::ptrdiff_t>(i * w),
                                            fair.theta.begin() + static_cast<std::ptrdiff_t>((i + 1) * w)));
      j.update({{"L", fair.L}, {"theta", theta}, {"n", fair.n}, {"alpha", fair.alpha}});
      break;
    }
    case Function::KnnShapley:
      j["K"] = K;
      break;
    case Function::Camel:
      j.update({{"epochs", camel.epochs}, {"tau", camel.tau}, {"lr", camel.lr}});
      break;
    case Function::KernelShap:
      j["samples"] = samples;
      break;
  }
  return j;
}

}  // namespace arc::audit
