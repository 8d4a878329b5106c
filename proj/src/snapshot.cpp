#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "lowlight/errors.hpp"
#include "lowlight/neural.hpp"

namespace lowlight::nn {

namespace {

constexpr const char* kFormat = "lowlight-mlp-snapshot";

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DecodeError("snapshot payload truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

const char* activation_name(Activation a) { return a == Activation::sine ? "sine" : "identity"; }

}  // namespace

template <typename T>
void save_snapshot(std::ostream& out, const MlpParameters<T>& params, const AdamState<T>* adam) {
  const Architecture& arch = params.architecture();
  const NetworkShape& s = arch.shape();
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["dtype"] = "float64";
  header["byte_order"] = "little";
  header["shape"] = {{"coord_dim", s.coord_dim},       {"context_dim", s.context_dim},
                     {"hidden", s.hidden},             {"branch_out", s.branch_out},
                     {"head_hidden", s.head_hidden},   {"first_omega", s.first_omega},
                     {"hidden_omega", s.hidden_omega}, {"init_omega", s.init_omega}};
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : arch.layers()) {
    layers.push_back({{"name", l.name},
                      {"in", l.in_dim},
                      {"out", l.out_dim},
                      {"activation", activation_name(l.activation)},
                      {"omega", l.omega},
                      {"weight_offset", l.weight_offset},
                      {"bias_offset", l.bias_offset}});
  }
  header["layers"] = std::move(layers);
  header["parameter_count"] = arch.parameter_count();
  header["has_adam"] = adam != nullptr;
  if (adam) {
    header["adam"] = {{"step", adam->step},
                      {"lr", adam->lr},
                      {"beta1", adam->beta1},
                      {"beta2", adam->beta2},
                      {"epsilon", adam->epsilon}};
  }
  out << header.dump() << '\n';
  for (T v : params.values()) write_f64(out, static_cast<double>(v));
  if (adam) {
    for (T v : adam->m) write_f64(out, static_cast<double>(v));
    for (T v : adam->v) write_f64(out, static_cast<double>(v));
  }
  if (!out) throw std::runtime_error("failed writing parameter snapshot");
}

Snapshot load_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DecodeError("snapshot header missing");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("snapshot header is not valid JSON: ") + e.what());
  }
  try {
    if (header.at("format") != kFormat) throw DecodeError("not a parameter snapshot");
    if (header.at("dtype") != "float64" || header.at("byte_order") != "little") {
      throw DecodeError("unsupported snapshot encoding");
    }
    const auto& js = header.at("shape");
    NetworkShape shape;
    shape.coord_dim = js.at("coord_dim");
    shape.context_dim = js.at("context_dim");
    shape.hidden = js.at("hidden");
    shape.branch_out = js.at("branch_out");
    shape.head_hidden = js.at("head_hidden");
    shape.first_omega = js.at("first_omega");
    shape.hidden_omega = js.at("hidden_omega");
    shape.init_omega = js.at("init_omega");
    Snapshot snap{MlpParameters<double>(shape), std::nullopt};
    const std::size_t count = header.at("parameter_count");
    if (count != snap.params.size()) throw DecodeError("snapshot parameter count does not match shape");
    auto values = snap.params.mutable_values();
    for (std::size_t i = 0; i < count; ++i) values[i] = read_f64(in);
    if (header.at("has_adam").get<bool>()) {
      const auto& ja = header.at("adam");
      AdamState<double> adam(count, ja.at("lr").get<double>());
      adam.step = ja.at("step");
      adam.beta1 = ja.at("beta1");
      adam.beta2 = ja.at("beta2");
      adam.epsilon = ja.at("epsilon");
      for (std::size_t i = 0; i < count; ++i) adam.m[i] = read_f64(in);
      for (std::size_t i = 0; i < count; ++i) adam.v[i] = read_f64(in);
      snap.adam = std::move(adam);
    }
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed snapshot header: ") + e.what());
  }
}

template void save_snapshot<float>(std::ostream&, const MlpParameters<float>&,
                                   const AdamState<float>*);
template void save_snapshot<double>(std::ostream&, const MlpParameters<double>&,
                                    const AdamState<double>*);

}  // namespace lowlight::nn
