#include "afgcl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

namespace afgcl::nn {

namespace {

constexpr const char* kVersion = "afgcl-ckpt-1";

struct NamedArray {
  std::string name;
  const Eigen::MatrixXd* matrix = nullptr;
  const Eigen::VectorXd* vector = nullptr;

  long long rows() const { return matrix ? matrix->rows() : vector->size(); }
  long long cols() const { return matrix ? matrix->cols() : 1; }
};

std::vector<NamedArray> named_arrays(const ModelParams& p) {
  std::vector<NamedArray> arrays;
  for (std::size_t i = 0; i < p.gcn_weights.size(); ++i)
    arrays.push_back({"gcn." + std::to_string(i) + ".weight",
                      &p.gcn_weights[i], nullptr});
  for (std::size_t i = 0; i < p.bn_scale.size(); ++i)
    arrays.push_back(
        {"bn." + std::to_string(i) + ".scale", nullptr, &p.bn_scale[i]});
  for (std::size_t i = 0; i < p.bn_shift.size(); ++i)
    arrays.push_back(
        {"bn." + std::to_string(i) + ".shift", nullptr, &p.bn_shift[i]});
  for (std::size_t i = 0; i < p.proj_weights.size(); ++i)
    arrays.push_back({"proj." + std::to_string(i) + ".weight",
                      &p.proj_weights[i], nullptr});
  for (std::size_t i = 0; i < p.proj_biases.size(); ++i)
    arrays.push_back(
        {"proj." + std::to_string(i) + ".bias", nullptr, &p.proj_biases[i]});
  return arrays;
}

void append_row_major(std::string& payload, const NamedArray& a) {
  const long long r = a.rows(), c = a.cols();
  payload.reserve(payload.size() + static_cast<std::size_t>(r * c) * 8);
  for (long long i = 0; i < r; ++i)
    for (long long j = 0; j < c; ++j) {
      const double v = a.matrix ? (*a.matrix)(i, j) : (*a.vector)(i);
      char buf[8];
      std::memcpy(buf, &v, 8);
      payload.append(buf, 8);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  params.check_finite();
  nlohmann::json header;
  header["version"] = kVersion;
  header["arrays"] = nlohmann::json::array();
  std::string payload;
  for (const auto& a : named_arrays(params)) {
    nlohmann::json entry;
    entry["name"] = a.name;
    entry["shape"] = {a.rows(), a.cols()};
    entry["offset"] = payload.size();
    header["arrays"].push_back(entry);
    append_row_major(payload, a);
  }
  const std::string header_text = header.dump();
  const std::uint64_t header_len = header_text.size();
  char len_bytes[8];
  for (int b = 0; b < 8; ++b)
    len_bytes[b] = static_cast<char>((header_len >> (8 * b)) & 0xff);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(len_bytes, 8);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char len_bytes[8];
  in.read(len_bytes, 8);
  if (!in) throw std::runtime_error(path + ": truncated checkpoint header");
  std::uint64_t header_len = 0;
  for (int b = 0; b < 8; ++b)
    header_len |= static_cast<std::uint64_t>(
                      static_cast<unsigned char>(len_bytes[b]))
                  << (8 * b);
  if (header_len > (1ull << 24))
    throw std::runtime_error(path + ": implausible header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": bad checkpoint header: " + e.what());
  }
  if (header.value("version", "") != kVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version '" +
                             header.value("version", "<missing>") + "'");

  std::string payload((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());

  std::map<std::string, Eigen::MatrixXd> loaded;
  for (const auto& entry : header.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const long long rows = entry.at("shape").at(0).get<long long>();
    const long long cols = entry.at("shape").at(1).get<long long>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t bytes = static_cast<std::uint64_t>(rows * cols) * 8;
    if (offset + bytes > payload.size())
      throw std::runtime_error(path + ": array '" + name +
                               "' extends past end of payload");
    Eigen::MatrixXd m(rows, cols);
    const char* src = payload.data() + offset;
    for (long long i = 0; i < rows; ++i)
      for (long long j = 0; j < cols; ++j) {
        double v;
        std::memcpy(&v, src, 8);
        src += 8;
        m(i, j) = v;
      }
    loaded.emplace(name, std::move(m));
  }

  auto take_matrix = [&loaded, &path](const std::string& name) {
    auto it = loaded.find(name);
    if (it == loaded.end())
      throw std::runtime_error(path + ": missing array '" + name + "'");
    Eigen::MatrixXd m = std::move(it->second);
    loaded.erase(it);
    return m;
  };
  auto take_vector = [&take_matrix](const std::string& name) {
    return Eigen::VectorXd(take_matrix(name).col(0));
  };

  ModelParams p;
  for (int i = 0; i < 2; ++i)
    p.gcn_weights.push_back(take_matrix("gcn." + std::to_string(i) + ".weight"));
  for (int i = 0; i < 2; ++i)
    p.bn_scale.push_back(take_vector("bn." + std::to_string(i) + ".scale"));
  for (int i = 0; i < 2; ++i)
    p.bn_shift.push_back(take_vector("bn." + std::to_string(i) + ".shift"));
  for (int i = 0; loaded.count("proj." + std::to_string(i) + ".weight"); ++i) {
    p.proj_weights.push_back(
        take_matrix("proj." + std::to_string(i) + ".weight"));
    p.proj_biases.push_back(take_vector("proj." + std::to_string(i) + ".bias"));
  }
  if (p.proj_weights.empty())
    throw std::runtime_error(path + ": checkpoint has no projector layers");
  if (!loaded.empty())
    throw std::runtime_error(path + ": unrecognized array '" +
                             loaded.begin()->first + "'");
  return p;
}

}  // namespace afgcl::nn
