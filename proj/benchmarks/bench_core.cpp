#include "socsrl/agents.hpp"
#include "socsrl/evaluation.hpp"
#include "socsrl/losses.hpp"
#include "socsrl/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace socsrl;

namespace {

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = u(rng);
  return m;
}

// obs 64, hidden 64, latent 10: the desk-scale acceptance shape.
AgentLayout bench_layout() { return default_agent_layout(64, 64, 10); }

void BM_EncoderForward(benchmark::State& state) {
  const auto a = make_agent(AgentId{0}, bench_layout(), 1);
  const auto x = uniform(64, state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(a.encoder, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(1028);

void BM_EncoderBackward(benchmark::State& state) {
  const auto a = make_agent(AgentId{0}, bench_layout(), 1);
  const auto x = uniform(64, state.range(0), 2);
  const auto f = forward(a.encoder, x);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(f.output.rows(), f.output.cols());
  for (auto _ : state) benchmark::DoNotOptimize(backward(a.encoder, f.tape, g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderBackward)->Arg(64)->Arg(1028);

void BM_RoundLosses(benchmark::State& state) {
  const auto a = make_agent(AgentId{0}, bench_layout(), 1);
  const auto b = make_agent(AgentId{1}, bench_layout(), 2);
  const auto oa = uniform(64, 64, 3), ob = uniform(64, 64, 4);
  const auto mode = state.range(0) ? SampleMode::shared_input : SampleMode::perspectives;
  for (auto _ : state)
    benchmark::DoNotOptimize(round_losses(a, b, oa, ob, {0.2, 7}, {0.81, 0.14, 0.03, 0.01}, {mode}));
}
BENCHMARK(BM_RoundLosses)->Arg(0)->Arg(1);

void BM_AdamStep(benchmark::State& state) {
  auto a = make_agent(AgentId{0}, bench_layout(), 1);
  auto p = to_params(a.encoder);
  ParamVector g = p;
  AdamState s = make_adam_state(p.size());
  for (auto _ : state) adam_step(p, g, s);
}
BENCHMARK(BM_AdamStep);

void BM_TrainingRounds(benchmark::State& state) {
  TrainConfig c;
  c.rounds = 100;
  c.batch_size = 64;
  c.hidden_dim = 64;
  c.latent_dim = 10;
  c.sigma = 0.2;
  c.weights = {0.81, 0.14, 0.03, 0.01};
  const auto data = load_dataset(c.dataset);
  for (auto _ : state) benchmark::DoNotOptimize(train(c, data));
  state.SetItemsProcessed(state.iterations() * c.rounds);
}
BENCHMARK(BM_TrainingRounds)->Unit(benchmark::kMillisecond);

void BM_ProbeFit(benchmark::State& state) {
  const auto z = uniform(10, 5000, 5);
  std::vector<ClassId> y(5000);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = static_cast<ClassId>(k % 10);
  for (auto _ : state) benchmark::DoNotOptimize(fit_probe(z, y, 10));
}
BENCHMARK(BM_ProbeFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
