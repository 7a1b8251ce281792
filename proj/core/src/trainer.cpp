#include "socsrl/trainer.hpp"

#include "socsrl/errors.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <type_traits>

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

namespace socsrl {

using nlohmann::json;

// --- datasets ---

namespace {

void validate_dataset_spec(const DatasetSpec& d) {
  if (d.kind == "synthetic") {
    if (d.num_classes < 2) throw ConfigError("dataset.num_classes must be >= 2");
    if (d.samples_per_class < 1) throw ConfigError("dataset.samples_per_class must be >= 1");
    if (d.obs_dim < d.num_classes) throw ConfigError("dataset.obs_dim must be >= num_classes");
    if (!(d.view_noise >= 0.0) || !std::isfinite(d.view_noise))
      throw ConfigError("dataset.view_noise must be finite and >= 0");
    if (!(d.mask_fraction >= 0.0 && d.mask_fraction <= 1.0))
      throw ConfigError("dataset.mask_fraction must be in [0, 1]");
    if (!(d.mask_noise >= 0.0) || !std::isfinite(d.mask_noise))
      throw ConfigError("dataset.mask_noise must be finite and >= 0");
    if (!(d.validation_fraction > 0.0 && d.validation_fraction < 1.0))
      throw ConfigError("dataset.validation_fraction must be in (0, 1)");
  } else if (d.kind == "idx") {
    for (const auto* p : {&d.train_images, &d.train_labels, &d.test_images, &d.test_labels})
      if (p->empty()) throw ConfigError("idx datasets need train/test image and label paths");
  } else {
    throw ConfigError("dataset.kind must be 'synthetic' or 'idx', got '" + d.kind + "'");
  }
}

}  // namespace

DatasetSplit load_dataset(const DatasetSpec& spec) {
  validate_dataset_spec(spec);
  if (spec.kind == "idx")
    return {load_idx(spec.train_images, spec.train_labels), load_idx(spec.test_images, spec.test_labels)};
  SynthOptions opts;
  opts.view_rank = spec.view_rank;
  opts.mask_fraction = spec.mask_fraction;
  opts.mask_noise = spec.mask_noise;
  const auto ds = synth_perspectives(spec.num_classes, spec.samples_per_class, spec.obs_dim,
                                     spec.view_noise, spec.seed, opts);
  return split_holdout(ds, spec.validation_fraction, derive_seed(spec.seed, "split"));
}

// --- config ---

void TrainConfig::validate() const {
  if (population_size < 1) throw ConfigError("population_size must be >= 1");
  weights.validate();
  if (population_size < 2 && weights.uses_communication())
    throw ConfigError("population_size = 1 only supports eta_ae; multi-agent losses need >= 2 agents");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
  if (!(adam.lr > 0.0) || !std::isfinite(adam.lr)) throw ConfigError("optimizer.lr must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("optimizer betas must be in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("optimizer.eps must be > 0");
  if (hidden_dim < 1 || latent_dim < 1) throw ConfigError("hidden_dim and latent_dim must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  validate_dataset_spec(dataset);
}

AgentLayout TrainConfig::agent_layout(std::size_t observation_dim) const {
  return default_agent_layout(observation_dim, hidden_dim, latent_dim);
}

json to_json(const DatasetSpec& d) {
  json j{{"kind", d.kind}};
  if (d.kind == "idx") {
    j["train_images"] = d.train_images;
    j["train_labels"] = d.train_labels;
    j["test_images"] = d.test_images;
    j["test_labels"] = d.test_labels;
  } else {
    j["num_classes"] = d.num_classes;
    j["samples_per_class"] = d.samples_per_class;
    j["obs_dim"] = d.obs_dim;
    j["view_noise"] = d.view_noise;
    j["view_rank"] = d.view_rank;
    j["mask_fraction"] = d.mask_fraction;
    j["mask_noise"] = d.mask_noise;
    j["seed"] = d.seed;
    j["validation_fraction"] = d.validation_fraction;
  }
  return j;
}

json to_json(const TrainConfig& c) {
  return json{
      {"schema", std::string(kTrainConfigSchema)},
      {"population_size", c.population_size},
      {"rounds", c.rounds},
      {"batch_size", c.batch_size},
      {"weights",
       {{"eta_ae", c.weights.eta_ae},
        {"eta_mtm", c.weights.eta_mtm},
        {"eta_dti", c.weights.eta_dti},
        {"eta_dtd", c.weights.eta_dtd}}},
      {"sigma", c.sigma},
      {"mode", to_string(c.mode)},
      {"self_path", to_string(c.self_path)},
      {"seed", c.seed},
      {"optimizer",
       {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
      {"hidden_dim", c.hidden_dim},
      {"latent_dim", c.latent_dim},
      {"checkpoint_every", c.checkpoint_every},
      {"dataset", to_json(c.dataset)},
  };
}

namespace {

// Reads a JSON object field by field and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  // std::size_t and std::uint64_t are the same type on the supported targets.
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(const char* key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<std::int64_t>();
    }
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }

  void read(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }

  const json* child(const char* key) { return find(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + where_ + "." + key + "'");
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[noreturn]] void fail(const char* key, const char* expected) const {
    throw ConfigError("'" + where_ + "." + key + "' must be " + expected);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

DatasetSpec dataset_from(const json& j, const std::string& where) {
  DatasetSpec d;
  StrictObject o(j, where);
  o.read("kind", d.kind);
  o.read("num_classes", d.num_classes);
  o.read("samples_per_class", d.samples_per_class);
  o.read("obs_dim", d.obs_dim);
  o.read("view_noise", d.view_noise);
  o.read("view_rank", d.view_rank);
  o.read("mask_fraction", d.mask_fraction);
  o.read("mask_noise", d.mask_noise);
  o.read("seed", d.seed);
  o.read("validation_fraction", d.validation_fraction);
  o.read("train_images", d.train_images);
  o.read("train_labels", d.train_labels);
  o.read("test_images", d.test_images);
  o.read("test_labels", d.test_labels);
  o.finish();
  return d;
}

}  // namespace

DatasetSpec dataset_spec_from_json(const json& j) { return dataset_from(j, "dataset"); }

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  StrictObject o(j, "config");
  std::string schema{kTrainConfigSchema};
  o.read("schema", schema);
  if (schema != kTrainConfigSchema)
    throw ConfigError("unsupported config schema '" + schema + "' (expected " +
                      std::string(kTrainConfigSchema) + ")");
  o.read("population_size", c.population_size);
  o.read("rounds", c.rounds);
  o.read("batch_size", c.batch_size);
  if (const json* w = o.child("weights")) {
    StrictObject ow(*w, o.path("weights"));
    ow.read("eta_ae", c.weights.eta_ae);
    ow.read("eta_mtm", c.weights.eta_mtm);
    ow.read("eta_dti", c.weights.eta_dti);
    ow.read("eta_dtd", c.weights.eta_dtd);
    ow.finish();
  }
  o.read("sigma", c.sigma);
  std::string mode{to_string(c.mode)};
  o.read("mode", mode);
  c.mode = sample_mode_from_string(mode);
  std::string self_path{to_string(c.self_path)};
  o.read("self_path", self_path);
  c.self_path = self_path_from_string(self_path);
  o.read("seed", c.seed);
  if (const json* a = o.child("optimizer")) {
    StrictObject oa(*a, o.path("optimizer"));
    oa.read("lr", c.adam.lr);
    oa.read("beta1", c.adam.beta1);
    oa.read("beta2", c.adam.beta2);
    oa.read("eps", c.adam.eps);
    oa.finish();
  }
  o.read("hidden_dim", c.hidden_dim);
  o.read("latent_dim", c.latent_dim);
  o.read("checkpoint_every", c.checkpoint_every);
  if (const json* d = o.child("dataset")) c.dataset = dataset_from(*d, o.path("dataset"));
  o.finish();
  return c;
}

LossWeights interpolation_weights(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("interpolation alpha must be in [0, 1]");
  LossWeights w;
  w.eta_ae = alpha;
  w.eta_mtm = 0.0;
  w.eta_dti = 1.0 - alpha;
  w.eta_dtd = 0.0;
  return w;
}

// --- training loop ---

std::pair<std::size_t, std::size_t> sample_pair(std::size_t population_size, Rng& rng) {
  if (population_size < 2) throw ConfigError("sampling a pair needs at least two agents");
  std::uniform_int_distribution<std::size_t> first(0, population_size - 1);
  std::uniform_int_distribution<std::size_t> second(0, population_size - 2);
  const std::size_t i = first(rng);
  std::size_t j = second(rng);
  if (j >= i) ++j;
  return {i, j};
}

namespace {

LossBreakdown ae_only(double l_ae, double eta) {
  LossBreakdown b;
  b.l_ae = l_ae;
  b.total = eta * l_ae;
  return b;
}

bool checkpoint_due(const TrainConfig& c, std::int64_t round) {
  if (round + 1 == c.rounds) return true;
  return c.checkpoint_every > 0 && (round + 1) % c.checkpoint_every == 0;
}

}  // namespace

RunRecord train(const TrainConfig& config, const DatasetSplit& data, const TrainHooks& hooks) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.population_size;
  const std::size_t participants = n >= 2 ? 2 : 1;
  check_round_feasible(data.train, participants, config.batch_size);

  RunRecord rec;
  rec.config = config;
  rec.config_hash = config_hash(config);
  const auto layout = config.agent_layout(data.train.observation_dim());
  rec.agents = spawn_population(n, layout, derive_seed(config.seed, "population"));
  rec.baseline = rec.agents;
  rec.stream.reserve(static_cast<std::size_t>(config.rounds));
  rec.baseline_stream.reserve(static_cast<std::size_t>(config.rounds));

  Rng sampler = make_rng(config.seed, "rounds");
  RoundOptions options;
  options.mode = config.mode;
  options.self_path = config.self_path;

  for (std::int64_t round = 0; round < config.rounds; ++round) {
    std::size_t i = 0, j = 0;
    if (participants == 2) std::tie(i, j) = sample_pair(n, sampler);
    const RoundSample rs = sample_round(data.train, participants, config.batch_size, config.mode, sampler);
    const Eigen::MatrixXd o_i = data.train.gather(rs.views[0]);

    LossBreakdown treated, base;
    try {
      if (participants == 2) {
        const Eigen::MatrixXd o_j = data.train.gather(rs.views[1]);
        const ChannelConfig channel{config.sigma, derive_seed(config.seed, "channel",
                                                              {static_cast<std::uint64_t>(round)})};
        auto res = round_losses(rec.agents[i], rec.agents[j], o_i, o_j, channel, config.weights, options);
        apply_gradients(rec.agents[i], res.grad_i.encoder, res.grad_i.decoder, config.adam);
        apply_gradients(rec.agents[j], res.grad_j.encoder, res.grad_j.decoder, config.adam);
        treated = res.losses;

        auto bi = autoencoder_loss(rec.baseline[i], o_i, 0.5);
        auto bj = autoencoder_loss(rec.baseline[j], o_j, 0.5);
        apply_gradients(rec.baseline[i], bi.grad.encoder, bi.grad.decoder, config.adam);
        apply_gradients(rec.baseline[j], bj.grad.encoder, bj.grad.decoder, config.adam);
        base = ae_only(0.5 * (bi.l_ae + bj.l_ae), 1.0);
      } else {
        auto t = autoencoder_loss(rec.agents[0], o_i, config.weights.eta_ae);
        apply_gradients(rec.agents[0], t.grad.encoder, t.grad.decoder, config.adam);
        treated = ae_only(t.l_ae, config.weights.eta_ae);

        auto b = autoencoder_loss(rec.baseline[0], o_i, 1.0);
        apply_gradients(rec.baseline[0], b.grad.encoder, b.grad.decoder, config.adam);
        base = ae_only(b.l_ae, 1.0);
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (round " + std::to_string(round) + ")", round);
    }

    rec.stream.push_back(treated);
    rec.baseline_stream.push_back(base);
    if (hooks.on_round) hooks.on_round(round, treated, base);
    if (hooks.on_checkpoint && checkpoint_due(config, round))
      hooks.on_checkpoint(round, rec.agents, rec.baseline);
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunRecord train(const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  return train(config, load_dataset(config.dataset), hooks);
}

}  // namespace socsrl
