#include "macl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "macl/error.hpp"

namespace macl {

namespace {

constexpr const char* kFormatTag = "macl-checkpoint";

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  const EncoderSpec& spec = ck.encoder.spec();
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& l : ck.encoder.layers()) {
    layers.push_back({{"weight", matrix_rows(l.weight)},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  nlohmann::json j{
      {"format", kFormatTag},
      {"version", kCheckpointVersion},
      {"encoder",
       {{"input_dim", spec.input_dim},
        {"hidden_dim", spec.hidden_dim ? nlohmann::json(*spec.hidden_dim) : nlohmann::json(nullptr)},
        {"output_dim", spec.output_dim},
        {"nonlinearity", spec.hidden_dim ? "relu" : "none"}}},
      {"layers", std::move(layers)},
      {"config", to_json(ck.config)},
      {"final_epoch", ck.final_epoch},
  };
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormatTag) throw Error("not a macl checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));

    const auto& e = j.at("encoder");
    EncoderSpec spec;
    spec.input_dim = e.at("input_dim").get<std::size_t>();
    spec.output_dim = e.at("output_dim").get<std::size_t>();
    if (!e.at("hidden_dim").is_null()) spec.hidden_dim = e.at("hidden_dim").get<std::size_t>();

    Checkpoint ck{Encoder(spec), config_from_json(j.at("config")), j.at("final_epoch").get<std::size_t>()};
    const auto& layers = j.at("layers");
    if (layers.size() != ck.encoder.layers().size()) throw Error("checkpoint layer count does not match encoder spec");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      DenseLayer& l = ck.encoder.layers()[k];
      const auto rows = layers[k].at("weight").get<std::vector<std::vector<double>>>();
      const auto bias = layers[k].at("bias").get<std::vector<double>>();
      if (rows.size() != static_cast<std::size_t>(l.weight.rows()) || bias.size() != static_cast<std::size_t>(l.bias.size())) {
        throw Error("checkpoint layer " + std::to_string(k) + " has the wrong shape");
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != static_cast<std::size_t>(l.weight.cols())) {
          throw Error("checkpoint layer " + std::to_string(k) + " has the wrong shape");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
          l.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
      }
      for (std::size_t r = 0; r < bias.size(); ++r) l.bias(static_cast<Eigen::Index>(r)) = bias[r];
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_checkpoint(checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace macl
