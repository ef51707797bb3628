#include "tgpr/model_io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tgpr {

namespace {

using nlohmann::json;

DenseTensor from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  RowMap(t.data(), m.rows(), m.cols()) = m;
  return t;
}

Matrix to_matrix(const DenseTensor& t) {
  if (t.order() != 2) throw std::runtime_error("model file: expected an order-2 block");
  return ConstRowMap(t.data(), static_cast<Eigen::Index>(t.extent(0)),
                     static_cast<Eigen::Index>(t.extent(1)));
}

void write_block(std::ostream& f, const std::string& name, const DenseTensor& t) {
  const std::uint32_t len = static_cast<std::uint32_t>(name.size());
  f.write(reinterpret_cast<const char*>(&len), sizeof(len));
  f.write(name.data(), len);
  f.write("DTF1", 4);
  const std::uint32_t order = static_cast<std::uint32_t>(t.order());
  f.write(reinterpret_cast<const char*>(&order), sizeof(order));
  for (std::size_t k = 0; k < t.order(); ++k) {
    const std::uint64_t e = t.extent(k);
    f.write(reinterpret_cast<const char*>(&e), sizeof(e));
  }
  f.write(reinterpret_cast<const char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
}

DenseTensor read_block(std::istream& f, std::string& name) {
  std::uint32_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!f || len > 256) throw std::runtime_error("model file: bad block name");
  name.resize(len);
  f.read(name.data(), len);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "DTF1", 4) != 0)
    throw std::runtime_error("model file: bad block payload");
  std::uint32_t order = 0;
  f.read(reinterpret_cast<char*>(&order), sizeof(order));
  if (!f || order == 0 || order > 16) throw std::runtime_error("model file: bad block order");
  std::vector<std::size_t> shape(order);
  for (std::uint32_t k = 0; k < order; ++k) {
    std::uint64_t e = 0;
    f.read(reinterpret_cast<char*>(&e), sizeof(e));
    if (!f || e == 0) throw std::runtime_error("model file: bad block extent");
    shape[k] = static_cast<std::size_t>(e);
  }
  DenseTensor t(shape);
  f.read(reinterpret_cast<char*>(t.data()),
         static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!f) throw std::runtime_error("model file: truncated block");
  return t;
}

json config_to_json(const ModelConfig& cfg) {
  json j;
  j["ranks_p"] = cfg.ranks_p;
  j["ranks_q"] = cfg.ranks_q;
  j["kernel_r"] = kernel_spec_to_string(cfg.kernel_r);
  j["kernel_omega"] = kernel_spec_to_string(cfg.kernel_omega);
  j["kernel_c"] = kernel_spec_to_string(cfg.kernel_c);
  j["kernel_sigma"] = kernel_spec_to_string(cfg.kernel_sigma);
  j["max_iterations"] = cfg.optimizer.max_iterations;
  j["gradient_tolerance"] = cfg.optimizer.gradient_tolerance;
  j["seed"] = cfg.optimizer.seed;
  j["restarts"] = cfg.optimizer.restarts;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.ranks_p = j.at("ranks_p").get<std::vector<int>>();
  cfg.ranks_q = j.at("ranks_q").get<std::vector<int>>();
  cfg.kernel_r = kernel_spec_from_string(j.at("kernel_r"), KernelInput::feature_rows);
  cfg.kernel_omega =
      kernel_spec_from_string(j.at("kernel_omega"), KernelInput::integer_index);
  cfg.kernel_c = kernel_spec_from_string(j.at("kernel_c"), KernelInput::integer_index);
  cfg.kernel_sigma =
      kernel_spec_from_string(j.at("kernel_sigma"), KernelInput::integer_index);
  cfg.optimizer.max_iterations = j.at("max_iterations");
  cfg.optimizer.gradient_tolerance = j.at("gradient_tolerance");
  cfg.optimizer.seed = j.at("seed");
  cfg.optimizer.restarts = j.at("restarts");
  return cfg;
}

}  // namespace

void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write("TGM1", 4);
  const std::uint32_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::string cfg = config_to_json(model.config).dump();
  const std::uint64_t cfg_len = cfg.size();
  f.write(reinterpret_cast<const char*>(&cfg_len), sizeof(cfg_len));
  f.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  std::vector<std::pair<std::string, DenseTensor>> blocks;
  blocks.emplace_back("fixed_effect", model.fixed_effect);
  for (std::size_t i = 0; i < model.signal_basis.factors.size(); ++i)
    blocks.emplace_back("signal_basis_" + std::to_string(i),
                        from_matrix(model.signal_basis.factors[i]));
  for (std::size_t i = 0; i < model.noise_basis.factors.size(); ++i)
    blocks.emplace_back("noise_basis_" + std::to_string(i),
                        from_matrix(model.noise_basis.factors[i]));
  {
    DenseTensor raw({static_cast<std::size_t>(model.raw_params.size())});
    std::copy(model.raw_params.data(), model.raw_params.data() + model.raw_params.size(),
              raw.data());
    blocks.emplace_back("raw_params", std::move(raw));
  }
  blocks.emplace_back("train_x", from_matrix(model.train_x));
  blocks.emplace_back("train_residual", model.train_residual);

  const std::uint32_t count = static_cast<std::uint32_t>(blocks.size());
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [name, tensor] : blocks) write_block(f, name, tensor);
  if (!f) throw std::runtime_error("short write: " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "TGM1", 4) != 0)
    throw std::runtime_error("not a model file: " + path);
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!f || version != 1) throw std::runtime_error("unsupported model version");
  std::uint64_t cfg_len = 0;
  f.read(reinterpret_cast<char*>(&cfg_len), sizeof(cfg_len));
  if (!f || cfg_len > (1u << 20)) throw std::runtime_error("model file: bad config length");
  std::string cfg_text(cfg_len, '\0');
  f.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));

  FittedModel model;
  model.config = config_from_json(json::parse(cfg_text));

  std::uint32_t count = 0;
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!f || count > 256) throw std::runtime_error("model file: bad block count");
  std::map<std::string, DenseTensor> blocks;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name;
    DenseTensor t = read_block(f, name);
    blocks.emplace(std::move(name), std::move(t));
  }
  auto take = [&blocks, &path](const std::string& name) {
    auto it = blocks.find(name);
    if (it == blocks.end())
      throw std::runtime_error("model file missing block '" + name + "': " + path);
    DenseTensor t = std::move(it->second);
    blocks.erase(it);
    return t;
  };

  model.fixed_effect = take("fixed_effect");
  const std::size_t d = model.config.mode_count();
  for (std::size_t i = 0; i < d; ++i) {
    model.signal_basis.factors.push_back(to_matrix(take("signal_basis_" + std::to_string(i))));
    model.noise_basis.factors.push_back(to_matrix(take("noise_basis_" + std::to_string(i))));
  }
  model.signal_basis.ranks = model.config.ranks_p;
  model.noise_basis.ranks = model.config.ranks_q;
  {
    const DenseTensor raw = take("raw_params");
    model.raw_params.resize(static_cast<Eigen::Index>(raw.size()));
    std::copy(raw.data(), raw.data() + raw.size(), model.raw_params.data());
  }
  model.train_x = to_matrix(take("train_x"));
  model.train_residual = take("train_residual");
  rebuild_cache(model);
  return model;
}

}  // namespace tgpr
