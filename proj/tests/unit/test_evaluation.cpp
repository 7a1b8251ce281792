#include <doctest.h>

#include "oracles.hpp"

#include "socsrl/errors.hpp"
#include "socsrl/evaluation.hpp"
#include "socsrl/hashing.hpp"
#include "socsrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace socsrl;

namespace {

// Agent whose encoder is the single linear map `w` (identity activation).
Agent linear_agent(std::size_t id, const Eigen::MatrixXd& w) {
  const auto in = static_cast<std::size_t>(w.cols()), out = static_cast<std::size_t>(w.rows());
  AgentLayout l{make_layout({in, out}, {Activation::identity}), make_layout({out, in}, {Activation::sigmoid})};
  Agent a = make_agent(AgentId{id}, l, id);
  a.encoder.layers[0].weight = w;
  a.encoder.layers[0].bias.setZero();
  return a;
}

ProbeModel linear_probe(const Eigen::MatrixXd& w, std::size_t owner = 0) {
  ProbeModel p;
  p.weights = w;
  p.bias = Eigen::VectorXd::Zero(w.rows());
  p.owner = AgentId{owner};
  return p;
}

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0, sd);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = n(rng);
  return m;
}

Eigen::MatrixXd permutation(std::size_t n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(k), p[k]) = 1.0;
  return m;
}

// Best training accuracy of any 2-class linear rule on 2-D points, and the
// cross-entropy minimizer over a parameter grid (u1, u2, c) for the logit
// difference u.z + c.
struct GridResult {
  double best_accuracy = 0;
  double best_ce = 1e300;
  double u1 = 0, u2 = 0, c = 0;
};

GridResult grid_search(const Eigen::MatrixXd& z, const std::vector<ClassId>& y, double range, double step) {
  GridResult g;
  const int n = static_cast<int>(std::lround(2 * range / step));
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b)
      for (int k = 0; k <= n; ++k) {
        const double u1 = -range + a * step, u2 = -range + b * step, c = -range + k * step;
        double ce = 0;
        int correct = 0;
        for (Eigen::Index i = 0; i < z.cols(); ++i) {
          const double d = u1 * z(0, i) + u2 * z(1, i) + c;
          const double s = y[static_cast<std::size_t>(i)] == 1 ? d : -d;
          ce += std::log1p(std::exp(-s));
          correct += (d > 0 ? 1u : 0u) == y[static_cast<std::size_t>(i)];
        }
        ce /= static_cast<double>(z.cols());
        g.best_accuracy = std::max(g.best_accuracy, correct / static_cast<double>(z.cols()));
        if (ce < g.best_ce) {
          g.best_ce = ce;
          g.u1 = u1;
          g.u2 = u2;
          g.c = c;
        }
      }
  return g;
}

std::vector<ClassId> balanced_labels(std::size_t n, std::size_t classes) {
  std::vector<ClassId> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = static_cast<ClassId>(k % classes);
  return y;
}

}  // namespace

TEST_CASE("probe: separable latents are fit perfectly") {
  Rng rng(3);
  Eigen::MatrixXd z(2, 40);
  std::vector<ClassId> y;
  for (Eigen::Index k = 0; k < 40; ++k) {
    const ClassId c = static_cast<ClassId>(k % 4);
    z(0, k) = (c % 2 ? 3.0 : -3.0) + std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    z(1, k) = (c / 2 ? 3.0 : -3.0) + std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    y.push_back(c);
  }
  const auto p = fit_probe(z, y, 4);
  CHECK(accuracy(predict(p, z), y) == 1.0);
  CHECK(p.num_classes() == 4);
  // Deterministic.
  CHECK(fit_probe(z, y, 4).weights == p.weights);
}

TEST_CASE("probe: a single-class training set predicts that class on its data") {
  Rng rng(1);
  const auto z = gaussian(3, 10, rng);
  const auto p = fit_probe(z, std::vector<ClassId>(10, 2), 4);
  for (auto c : predict(p, z)) CHECK(c == 2);
  CHECK(predict(p, Eigen::MatrixXd::Zero(3, 1)).front() == 2);
}

TEST_CASE("probe: decisions agree with a brute-force grid search on 4-point problems") {
  Rng rng(11);
  int separable = 0, inseparable = 0;
  for (int trial = 0; trial < 40 && (separable < 6 || inseparable < 6); ++trial) {
    const auto z = gaussian(2, 4, rng);
    std::vector<ClassId> y{0, 1, static_cast<ClassId>(trial % 2), static_cast<ClassId>((trial / 2) % 2)};
    const auto coarse = grid_search(z, y, 4.0, 0.25);
    if (coarse.best_accuracy == 1.0) {
      if (separable >= 6) continue;
      ++separable;
      // Separable: the probe must reach the best achievable accuracy.
      const auto p = fit_probe(z, y, 2, {2000, 0.5});
      CHECK(accuracy(predict(p, z), y) == 1.0);
    } else {
      if (inseparable >= 6) continue;
      ++inseparable;
      // Inseparable: the cross-entropy optimum is finite; a converged probe
      // must land on the grid minimizer's side of the boundary at every point
      // the grid classifies with a clear margin.
      const auto fine = grid_search(z, y, 6.0, 0.1);
      const auto p = fit_probe(z, y, 2, {40000, 0.5});
      const auto pred = predict(p, z);
      const double probe_ce = cross_entropy(p, z, y);
      CHECK(probe_ce <= fine.best_ce + 1e-6);
      CHECK(accuracy(pred, y) <= coarse.best_accuracy);
      for (Eigen::Index i = 0; i < 4; ++i) {
        const double d = fine.u1 * z(0, i) + fine.u2 * z(1, i) + fine.c;
        if (std::fabs(d) < 0.3) continue;  // tie within grid resolution
        CHECK(pred[static_cast<std::size_t>(i)] == (d > 0 ? 1u : 0u));
      }
    }
  }
  CHECK(separable >= 3);
  CHECK(inseparable >= 3);
}

TEST_CASE("probe: rejects empty or inconsistent training sets") {
  CHECK_THROWS_AS(fit_probe(Eigen::MatrixXd(2, 0), {}, 2), ShapeError);
  CHECK_THROWS_AS(fit_probe(Eigen::MatrixXd::Zero(2, 3), {0, 1}, 2), ShapeError);
  CHECK_THROWS_AS(fit_probe(Eigen::MatrixXd::Zero(2, 2), {0, 3}, 2), ShapeError);
}

TEST_CASE("cross entropy matches a hand computation") {
  ProbeModel p = linear_probe((Eigen::MatrixXd(3, 2) << 1, 0, 0, 1, -1, 1).finished());
  p.bias << 0.1, -0.2, 0.3;
  const Eigen::MatrixXd z = (Eigen::MatrixXd(2, 2) << 0.5, -1.0, 2.0, 0.25).finished();
  const std::vector<ClassId> y{1, 2};
  double expect = 0;
  for (int i = 0; i < 2; ++i) {
    double logits[3], mx = -1e300, sum = 0;
    for (int c = 0; c < 3; ++c) {
      logits[c] = p.bias(c) + p.weights(c, 0) * z(0, i) + p.weights(c, 1) * z(1, i);
      mx = std::max(mx, logits[c]);
    }
    for (double l : logits) sum += std::exp(l - mx);
    expect += -(logits[y[i]] - mx - std::log(sum));
  }
  CHECK(cross_entropy(p, z, y) == doctest::Approx(expect / 2).epsilon(1e-13));
}

TEST_CASE("a random probe scores chance on balanced data") {
  Rng rng(5);
  const auto z = gaussian(8, 20000, rng);
  const auto p = linear_probe(gaussian(10, 8, rng));
  const double acc = accuracy(predict(p, z), balanced_labels(20000, 10));
  CHECK(std::fabs(acc - 0.1) < 0.02);
}

TEST_CASE("probe training leaves the encoder untouched") {
  const auto ds = synth_perspectives(4, 30, 8, 0.3, 2, {4, 0.1, 0.05});
  const auto a = make_agent(AgentId{0}, default_agent_layout(8, 6, 3), 4);
  const auto enc = hash_network(a.encoder), dec = hash_network(a.decoder);
  const auto p = train_probe(a, ds);
  CHECK(hash_network(a.encoder) == enc);
  CHECK(hash_network(a.decoder) == dec);
  CHECK(p.owner == a.id);
  CHECK(probe_accuracy(p, a, ds) == accuracy(predict(p, embed(a, ds.observations())), ds.labels()));
  CHECK(probe_loss(p, a, ds) == cross_entropy(p, embed(a, ds.observations()), ds.labels()));
}

TEST_CASE("swap accuracy: hand-enumerated 2-agent, 4-sample fixture") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  const std::vector<Agent> agents{linear_agent(0, id), linear_agent(1, flip)};
  const std::vector<ProbeModel> probes{linear_probe(id, 0), linear_probe(-id, 1)};
  Eigen::MatrixXd obs(2, 4);
  obs << 0.25, 0, 0.5, 0.125,
         0, 0.25, 0.25, 0.75;
  const LabeledDataset ds(obs, {0, 1, 0, 1}, 2);
  // f0 = argmax, f1 = argmin; enc1 swaps coordinates.
  //   f0(enc0) = 0 1 0 1   f0(enc1) = 1 0 1 0
  //   f1(enc0) = 1 0 1 0   f1(enc1) = 0 1 0 1
  const auto s = swap_accuracy(probes, agents, ds);
  CHECK(s.accuracy(0, 0) == 1.0);
  CHECK(s.accuracy(0, 1) == 0.0);
  CHECK(s.accuracy(1, 0) == 0.0);
  CHECK(s.accuracy(1, 1) == 1.0);
  CHECK(s.mean_off_diagonal == 0.0);
  // Crossed composition: f0(enc1(d)) and f1(enc0(d)) coincide on every d.
  CHECK(agreement(probes, agents, ds) == 1.0);
}

TEST_CASE("swap accuracy of identical agents equals own accuracy") {
  const auto ds = synth_perspectives(4, 30, 8, 0.3, 2, {4, 0.1, 0.05});
  auto a = make_agent(AgentId{0}, default_agent_layout(8, 6, 3), 4);
  auto b = a;
  b.id = AgentId{1};
  const auto p = train_probe(a, ds);
  auto q = p;
  q.owner = b.id;
  const auto s = swap_accuracy({p, q}, {a, b}, ds);
  const double own = probe_accuracy(p, a, ds);
  CHECK(s.accuracy(0, 1) == own);
  CHECK(s.accuracy(1, 0) == own);
  CHECK(s.mean_off_diagonal == own);
  CHECK(agreement({p, q}, {a, b}, ds) == 1.0);
  CHECK_THROWS_AS(swap_accuracy({p}, {a}, ds), UsageError);
  CHECK_THROWS_AS(agreement({p}, {a}, ds), UsageError);
}

TEST_CASE("agreement equals the brute-force double sum on randomized fixtures") {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> n_agents(2, 4), n_points(1, 5), n_classes(2, 3);
  for (int fixture = 0; fixture < 60; ++fixture) {
    const std::size_t n = n_agents(rng), d = n_points(rng), classes = n_classes(rng);
    std::vector<Agent> agents;
    std::vector<ProbeModel> probes;
    const AgentLayout layout = default_agent_layout(3, 4, 2);
    for (std::size_t k = 0; k < n; ++k) {
      agents.push_back(make_agent(AgentId{k}, layout, rng()));
      ProbeModel p = linear_probe(gaussian(static_cast<Eigen::Index>(classes), 2, rng), k);
      p.bias = gaussian(static_cast<Eigen::Index>(classes), 1, rng).col(0);
      probes.push_back(p);
    }
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd obs(3, static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < obs.size(); ++k) obs(k) = u(rng);

    std::size_t hits = 0;
    const auto cols = oracle::columns(obs);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto pi = to_params(agents[i].encoder), pj = to_params(agents[j].encoder);
        for (const auto& x : cols) {
          const auto fi_encj = oracle::argmax_logits(probes[i].weights, probes[i].bias, oracle::mlp(pj, x));
          const auto fj_enci = oracle::argmax_logits(probes[j].weights, probes[j].bias, oracle::mlp(pi, x));
          hits += fi_encj == fj_enci;
        }
      }
    const double expect = static_cast<double>(hits) / static_cast<double>((n * n - n) * d);
    CHECK(agreement(probes, agents, obs) == expect);
  }
}

TEST_CASE("agreement: constant probes, permutation invariance and chance level") {
  Rng rng(8);
  const AgentLayout layout = default_agent_layout(3, 4, 2);
  std::vector<Agent> agents;
  std::vector<ProbeModel> constant;
  for (std::size_t k = 0; k < 3; ++k) {
    agents.push_back(make_agent(AgentId{k}, layout, k));
    ProbeModel p = linear_probe(Eigen::MatrixXd::Zero(5, 2), k);
    p.bias(3) = 1.0;
    constant.push_back(p);
  }
  const Eigen::MatrixXd obs = gaussian(3, 7, rng).cwiseAbs();
  CHECK(agreement(constant, agents, obs) == 1.0);

  std::vector<ProbeModel> probes;
  for (std::size_t k = 0; k < 3; ++k) probes.push_back(linear_probe(gaussian(5, 2, rng), k));
  const double base = agreement(probes, agents, obs);
  const std::vector<std::size_t> perm{2, 0, 1};
  std::vector<Agent> pa;
  std::vector<ProbeModel> pp;
  for (auto k : perm) {
    pa.push_back(agents[k]);
    pp.push_back(probes[k]);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    pa[k].id = AgentId{k};
    pp[k].owner = AgentId{k};
  }
  CHECK(agreement(pp, pa, obs) == base);
  const Eigen::MatrixXd ds_obs = gaussian(3, 12, rng).cwiseAbs().cwiseMin(1.0);
  const LabeledDataset ds(ds_obs, balanced_labels(12, 5), 5);
  CHECK(swap_accuracy(pp, pa, ds).mean_off_diagonal == swap_accuracy(probes, agents, ds).mean_off_diagonal);

  // Independent random classifiers with balanced outputs agree about 1/10 of the time.
  double total = 0;
  const int fixtures = 300;
  for (int f = 0; f < fixtures; ++f) {
    std::vector<Agent> ag;
    std::vector<ProbeModel> pr;
    for (std::size_t k = 0; k < 3; ++k) {
      ag.push_back(linear_agent(k, permutation(10, rng)));
      pr.push_back(linear_probe(permutation(10, rng), k));
    }
    Eigen::MatrixXd x(10, 50);
    std::uniform_real_distribution<double> u(0, 1);
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
    total += agreement(pr, ag, x);
  }
  const double chance = total / fixtures;
  MESSAGE("random-classifier agreement " << chance);
  CHECK(std::fabs(chance - 0.1) < 0.03);
}

TEST_CASE("data-efficiency subset sizes") {
  CHECK(data_efficiency_sizes(10000, 10) ==
        std::vector<std::size_t>{10, 22, 46, 100, 215, 464, 1000, 2154, 4642, 10000});
  CHECK(data_efficiency_sizes(10000, 2) == std::vector<std::size_t>{10, 10000});
  CHECK(data_efficiency_sizes(10, 5) == std::vector<std::size_t>{10});
  const auto tiny = data_efficiency_sizes(14, 10);
  CHECK(tiny.front() == 10);
  CHECK(tiny.back() == 14);
  CHECK(std::adjacent_find(tiny.begin(), tiny.end(), std::greater_equal<>()) == tiny.end());
  CHECK_THROWS_AS(data_efficiency_sizes(9, 10), ConfigError);
  CHECK_THROWS_AS(data_efficiency_sizes(100, 1), ConfigError);
}

TEST_CASE("data-efficiency curve: counts and the full-V endpoint") {
  TrainConfig c;
  c.rounds = 300;
  c.batch_size = 8;
  c.hidden_dim = 16;
  c.latent_dim = 4;
  c.weights = {0, 0, 1, 0};
  c.dataset.num_classes = 4;
  c.dataset.samples_per_class = 120;
  c.dataset.obs_dim = 16;
  c.dataset.view_rank = 4;
  c.dataset.validation_fraction = 0.5;
  const auto data = load_dataset(c.dataset);
  const auto rec = train(c, data);
  const auto& v = data.validation;

  std::vector<double> endpoint;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    DataEffConfig cfg;
    cfg.seed = seed;
    cfg.k = 5;
    const auto curve = data_efficiency_curve(rec.agents, v, cfg);
    REQUIRE(curve.size() == 5);
    CHECK(curve.back().size == v.size());
    for (const auto& pt : curve) {
      CHECK(pt.train_count == static_cast<std::size_t>(std::llround(0.8 * pt.size)));
      CHECK(pt.train_count + pt.eval_count == pt.size);
      CHECK(pt.accuracy >= 0.0);
      CHECK(pt.accuracy <= 1.0);
    }
    endpoint.push_back(curve.back().loss);
  }

  // Direct evaluation: shuffle all of V independently, fit on 80%, score on 20%.
  double direct = 0;
  Rng rng(77);
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t cut = static_cast<std::size_t>(std::llround(0.8 * v.size()));
  const std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)),
      ev(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  for (const auto& a : rec.agents) {
    const auto p = fit_probe(embed(a, v.gather(tr)), v.gather_labels(tr), v.num_classes());
    direct += cross_entropy(p, embed(a, v.gather(ev)), v.gather_labels(ev));
  }
  direct /= static_cast<double>(rec.agents.size());

  const double mean = std::accumulate(endpoint.begin(), endpoint.end(), 0.0) / endpoint.size();
  double ss = 0;
  for (double e : endpoint) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (endpoint.size() - 1));
  MESSAGE("full-V loss over seeds " << mean << " +- " << sd << ", direct " << direct);
  CHECK(std::fabs(mean - direct) <= std::max(3 * sd, 0.1 * direct));
}

TEST_CASE("population metrics") {
  const auto ds = synth_perspectives(4, 30, 8, 0.3, 2, {4, 0.1, 0.05});
  const auto pop = spawn_population(3, default_agent_layout(8, 6, 3), 1);
  const auto m = evaluate_population(pop, ds, ds);
  CHECK(m.probes.size() == 3);
  CHECK(m.probe_accuracy.size() == 3);
  CHECK(m.mean_accuracy == doctest::Approx((m.probe_accuracy[0] + m.probe_accuracy[1] + m.probe_accuracy[2]) / 3));
  CHECK(m.swap.accuracy.rows() == 3);
  CHECK(m.agreement == agreement(m.probes, pop, ds));

  double rec = 0;
  for (const auto& a : pop) {
    const auto pe = to_params(a.encoder), pd = to_params(a.decoder);
    std::vector<oracle::Vec> out;
    const auto cols = oracle::columns(ds.observations());
    for (const auto& x : cols) out.push_back(oracle::mlp(pd, oracle::mlp(pe, x)));
    const double e = oracle::mse(cols, out);
    CHECK(reconstruction_error(a, ds) == doctest::Approx(e).epsilon(1e-12));
    rec += e;
  }
  CHECK(m.reconstruction == doctest::Approx(rec / 3).epsilon(1e-12));

  const auto single = evaluate_population({pop[0]}, ds, ds);
  CHECK(single.agreement == 0.0);
  CHECK(single.swap.accuracy.size() == 0);
}
