#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

double act(socsrl::Activation a, double x) {
  switch (a) {
    case socsrl::Activation::identity: return x;
    case socsrl::Activation::relu: return x > 0 ? x : 0.0;
    case socsrl::Activation::tanh: return std::tanh(x);
    case socsrl::Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  throw std::logic_error("activation");
}

Vec add(const Vec& a, const Vec& b) {
  if (b.empty()) return a;
  Vec out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
  return out;
}

double sq(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

const Vec& noise_at(const std::vector<std::vector<Vec>>& n, int agent, std::size_t sample) {
  static const Vec none;
  if (n.empty()) return none;
  return n[agent][sample];
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

}  // namespace

Vec mlp(const socsrl::ParamVector& p, const Vec& x, std::string* relu_signs) {
  Vec cur = x;
  std::size_t off = 0;
  for (const auto& layer : p.layout) {
    Vec next(layer.out_dim);
    const std::size_t bias_off = off + layer.in_dim * layer.out_dim;
    for (std::size_t r = 0; r < layer.out_dim; ++r) {
      double s = p.values[bias_off + r];
      for (std::size_t c = 0; c < layer.in_dim; ++c) s += p.values[off + r * layer.in_dim + c] * cur[c];
      if (relu_signs && layer.activation == socsrl::Activation::relu) relu_signs->push_back(s > 0 ? '1' : '0');
      next[r] = act(layer.activation, s);
    }
    off = bias_off + layer.out_dim;
    cur = std::move(next);
  }
  return cur;
}

std::vector<Vec> columns(const Eigen::MatrixXd& m) {
  std::vector<Vec> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) out[c].push_back(m(r, c));
  return out;
}

double mse(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += sq(a[k], b[k]);
    n += a[k].size();
  }
  return s / static_cast<double>(n);
}

RoundTerms round(const RoundParams& p, const std::vector<Vec>& o_i, const std::vector<Vec>& o_j,
                 const RoundNoise& noise, bool shared_input, bool noisy_self) {
  const socsrl::ParamVector* enc[2] = {&p.enc_i, &p.enc_j};
  const socsrl::ParamVector* dec[2] = {&p.dec_i, &p.dec_j};
  const std::vector<Vec>* obs[2] = {&o_i, &o_j};
  const std::size_t batch = o_i.size();
  const std::size_t obs_dim = o_i[0].size();
  const std::size_t lat_dim = p.enc_i.layout.back().out_dim;

  RoundTerms t;
  std::string* signs = &t.relu_signs;
  double ae[2] = {0, 0}, mtm[2] = {0, 0}, dti[2] = {0, 0}, dtd[2] = {0, 0};
  for (std::size_t b = 0; b < batch; ++b) {
    Vec clean[2], own[2], sent[2];
    for (int a = 0; a < 2; ++a) {
      clean[a] = mlp(*enc[a], (*obs[a])[b], signs);
      own[a] = add(clean[a], noise_at(noise.own, a, b));
      sent[a] = shared_input ? add(mlp(*enc[a], (*obs[1 - a])[b], signs), noise_at(noise.partner, a, b)) : own[a];
    }
    for (int r = 0; r < 2; ++r) {
      const int s = 1 - r;
      const Vec self = mlp(*dec[r], noisy_self ? own[r] : clean[r], signs);
      const Vec cross = mlp(*dec[r], sent[s], signs);
      const Vec& o = (*obs[r])[b];
      ae[r] += sq(o, self);
      mtm[r] += sq(own[r], sent[s]);
      dti[r] += sq(cross, o);
      dtd[r] += sq(self, cross);
    }
  }
  const double n_obs = static_cast<double>(batch * obs_dim);
  const double n_lat = static_cast<double>(batch * lat_dim);
  t.l_ae = 0.5 * (ae[0] / n_obs + ae[1] / n_obs);
  t.l_mtm = 0.5 * (mtm[0] / n_lat + mtm[1] / n_lat);
  t.l_dti = 0.5 * (dti[0] / n_obs + dti[1] / n_obs);
  t.l_dtd = 0.5 * (dtd[0] / n_obs + dtd[1] / n_obs);
  return t;
}

double t_pdf(double x, double df) {
  const double log_norm =
      std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  return std::exp(log_norm - (df + 1) / 2 * std::log1p(x * x / df));
}

double t_cdf(double t, double df, int intervals) {
  const double a = std::fabs(t);
  if (a == 0) return 0.5;
  const double h = a / intervals;
  double s = t_pdf(0, df) + t_pdf(a, df);
  for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * t_pdf(k * h, df);
  const double half_mass = s * h / 3;
  return t > 0 ? 0.5 + half_mass : 0.5 - half_mass;
}

double t_two_sided_p(double t, double df) {
  return 2.0 * t_cdf(-std::fabs(t), df);
}

Welch welch(const Vec& a, const Vec& b) {
  auto moments = [](const Vec& x, long double& mean, long double& var) {
    mean = 0;
    for (double v : x) mean += v;
    mean /= x.size();
    var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (x.size() - 1);
  };
  long double ma, va, mb, vb;
  moments(a, ma, va);
  moments(b, mb, vb);
  const long double qa = va / a.size(), qb = vb / b.size();
  Welch w;
  w.t = static_cast<double>((ma - mb) / std::sqrt(qa + qb));
  w.df = static_cast<double>((qa + qb) * (qa + qb) /
                             (qa * qa / (a.size() - 1) + qb * qb / (b.size() - 1)));
  w.p = t_two_sided_p(w.t, w.df);
  return w;
}

void adam(AdamTrace& s, const Vec& grad, double lr, double b1, double b2, double eps) {
  if (s.m.empty()) {
    s.m.assign(s.params.size(), 0.0);
    s.v.assign(s.params.size(), 0.0);
  }
  s.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
  for (std::size_t k = 0; k < s.params.size(); ++k) {
    s.m[k] = b1 * s.m[k] + (1 - b1) * grad[k];
    s.v[k] = b2 * s.v[k] + (1 - b2) * grad[k] * grad[k];
    const double m_hat = s.m[k] / c1;
    const double v_hat = s.v[k] / c2;
    s.params[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

std::string idx_images(std::uint32_t magic, std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                       const std::vector<std::uint8_t>& pixels) {
  std::string out;
  put_u32(out, magic);
  put_u32(out, count);
  put_u32(out, rows);
  put_u32(out, cols);
  for (auto p : pixels) out.push_back(static_cast<char>(p));
  return out;
}

std::string idx_labels(std::uint32_t magic, std::uint32_t count, const std::vector<std::uint8_t>& labels) {
  std::string out;
  put_u32(out, magic);
  put_u32(out, count);
  for (auto l : labels) out.push_back(static_cast<char>(l));
  return out;
}

std::size_t argmax_logits(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, const Vec& z) {
  std::size_t best = 0;
  double best_v = 0;
  for (Eigen::Index c = 0; c < w.rows(); ++c) {
    double v = b(c);
    for (Eigen::Index k = 0; k < w.cols(); ++k) v += w(c, k) * z[k];
    if (c == 0 || v > best_v) {
      best = static_cast<std::size_t>(c);
      best_v = v;
    }
  }
  return best;
}

}  // namespace oracle
