#include "socsrl/checkpoint.hpp"

#include "socsrl/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace socsrl {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

json layout_to_json(const Layout& layout) {
  json arr = json::array();
  for (const auto& l : layout)
    arr.push_back({{"in", l.in_dim}, {"out", l.out_dim}, {"activation", to_string(l.activation)}});
  return arr;
}

Layout layout_from_json(const json& arr) {
  Layout layout;
  for (const auto& j : arr)
    layout.push_back({j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                      activation_from_string(j.at("activation").get<std::string>())});
  validate_layout(layout);
  return layout;
}

void write_values(std::ofstream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const PopulationCheckpoint& ckpt) {
  json header;
  header["seed"] = ckpt.seed;
  header["config_hash"] = ckpt.config_hash;
  header["population"] = ckpt.population;
  header["agents"] = json::array();
  std::size_t count = 0;
  for (const auto& a : ckpt.agents) {
    header["agents"].push_back({{"id", a.id.index},
                                {"encoder", layout_to_json(a.encoder.layout())},
                                {"decoder", layout_to_json(a.decoder.layout())}});
    count += parameter_count(a.encoder.layout()) + parameter_count(a.decoder.layout());
  }
  header["value_count"] = count;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open checkpoint for writing: " + path.string());
  out << kCheckpointMagic << '\n' << header.dump() << '\n';
  for (const auto& a : ckpt.agents) {
    write_values(out, to_params(a.encoder).values);
    write_values(out, to_params(a.decoder).values);
  }
  if (!out) throw FormatError("failed writing checkpoint: " + path.string());
}

PopulationCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic)
    throw VersionError("checkpoint " + path.string() + " has magic '" + magic.substr(0, 32) +
                       "', expected '" + std::string(kCheckpointMagic) + "'");
  std::string header_line;
  if (!std::getline(in, header_line)) throw FormatError("checkpoint header missing");

  PopulationCheckpoint ckpt;
  std::size_t expected = 0;
  std::vector<std::pair<ParamVector, ParamVector>> shapes;
  std::vector<std::size_t> ids;
  try {
    const json header = json::parse(header_line);
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.config_hash = header.at("config_hash").get<std::string>();
    ckpt.population = header.at("population").get<std::string>();
    expected = header.at("value_count").get<std::size_t>();
    for (const auto& a : header.at("agents")) {
      ParamVector enc{layout_from_json(a.at("encoder")), {}};
      ParamVector dec{layout_from_json(a.at("decoder")), {}};
      shapes.emplace_back(std::move(enc), std::move(dec));
      ids.push_back(a.at("id").get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed checkpoint layout: ") + e.what());
  }

  std::size_t total = 0;
  for (const auto& [enc, dec] : shapes)
    total += parameter_count(enc.layout) + parameter_count(dec.layout);
  if (total != expected) throw FormatError("checkpoint value_count disagrees with layouts");

  auto read_values = [&](ParamVector& p) {
    p.values.resize(parameter_count(p.layout));
    in.read(reinterpret_cast<char*>(p.values.data()),
            static_cast<std::streamsize>(p.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(p.values.size() * sizeof(double)))
      throw FormatError("checkpoint truncated: " + path.string());
  };
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    auto& [enc, dec] = shapes[i];
    read_values(enc);
    read_values(dec);
    Agent a;
    a.id = AgentId{ids[i]};
    a.encoder = to_network(enc);
    a.decoder = to_network(dec);
    validate_agent_layout(a.layout());
    a.encoder_opt = make_adam_state(enc.size());
    a.decoder_opt = make_adam_state(dec.size());
    ckpt.agents.push_back(std::move(a));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError("trailing bytes after checkpoint payload: " + path.string());
  return ckpt;
}

}  // namespace socsrl
