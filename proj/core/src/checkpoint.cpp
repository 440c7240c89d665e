#include "despeckle/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'S', 'P', 'K', 'L', 'C', 'K', '1'};
constexpr int kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

// Tensors in checkpoint order: the parameters plus the batch-norm running
// statistics, interleaved per layer.
struct Entry {
  std::string name;
  const Tensor* tensor = nullptr;               // parameter entries
  const std::vector<double>* raw = nullptr;     // running-stat entries
  std::vector<int64_t> shape;
};

std::vector<Entry> directory(const UnrolledNet& net) {
  std::vector<Entry> out;
  const int channels = net.config().channels;
  for (int s = 0; s < net.storage_blocks(); ++s) {
    const DenoiserBlock& blk = net.storage_block(s);
    const std::string prefix = "block" + std::to_string(s) + ".";
    for (int l = 0; l < 5; ++l) {
      out.push_back({prefix + "conv" + std::to_string(l + 1) + ".weight", &blk.conv_w[l], nullptr,
                     blk.conv_w[l].shape});
      out.push_back({prefix + "conv" + std::to_string(l + 1) + ".bias", &blk.conv_b[l], nullptr,
                     blk.conv_b[l].shape});
      if (l >= 1 && l <= 3) {
        const int m = l - 1;
        const std::string bn = prefix + "bn" + std::to_string(l + 1) + ".";
        out.push_back({bn + "gamma", &blk.bn_gamma[m], nullptr, blk.bn_gamma[m].shape});
        out.push_back({bn + "beta", &blk.bn_beta[m], nullptr, blk.bn_beta[m].shape});
        out.push_back({bn + "running_mean", nullptr, &blk.bn_state[m].running_mean, {channels}});
        out.push_back({bn + "running_var", nullptr, &blk.bn_state[m].running_var, {channels}});
      }
    }
  }
  return out;
}

}  // namespace

void save_checkpoint(const UnrolledNet& net, const TrainingMeta& meta, const std::string& path) {
  const std::vector<Entry> dir = directory(net);

  json header;
  header["format_version"] = kFormatVersion;
  header["architecture"] = {
      {"depth", net.config().depth},
      {"channels", net.config().channels},
      {"kernel", 3},
      {"bn_mid", true},
      {"tied", net.config().tied},
  };
  header["training_config"] = {
      {"tau_train", meta.tau_train}, {"looks", meta.looks},       {"epochs", meta.epochs},
      {"batch", meta.batch},         {"lr", meta.lr},             {"lr_drop_epoch", meta.lr_drop_epoch},
      {"lr_after", meta.lr_after},   {"seed", meta.seed},
  };
  json tensors = json::array();
  uint64_t offset = 0;
  for (const Entry& e : dir) {
    const size_t count = e.tensor ? e.tensor->data.size() : e.raw->size();
    tensors.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", offset}});
    offset += count * sizeof(double);
  }
  header["tensors"] = tensors;

  const std::string header_str = header.dump();
  const uint64_t header_len = header_str.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const Entry& e : dir) {
    const std::vector<double>& v = e.tensor ? e.tensor->data : *e.raw;
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("short write to " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw CheckpointError(path + ": bad magic");
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 8);
  if (!in || header_len == 0 || header_len > (1ULL << 30)) throw CheckpointError(path + ": bad header length");

  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CheckpointError(path + ": truncated header");

  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": header is not valid JSON: " + e.what());
  }

  if (header.value("format_version", -1) != kFormatVersion)
    throw CheckpointError(path + ": unsupported format_version");

  const json& arch = header.at("architecture");
  ModelConfig cfg;
  cfg.depth = arch.at("depth").get<int>();
  cfg.channels = arch.at("channels").get<int>();
  cfg.tied = arch.at("tied").get<bool>();
  if (arch.at("kernel").get<int>() != 3) throw CheckpointError(path + ": unsupported kernel size");

  const json& tc = header.at("training_config");
  TrainingMeta meta;
  meta.tau_train = tc.at("tau_train").get<double>();
  meta.looks = tc.at("looks").get<int>();
  meta.epochs = tc.at("epochs").get<int>();
  meta.batch = tc.at("batch").get<int>();
  meta.lr = tc.at("lr").get<double>();
  meta.lr_drop_epoch = tc.at("lr_drop_epoch").get<int>();
  meta.lr_after = tc.at("lr_after").get<double>();
  meta.seed = tc.at("seed").get<uint64_t>();
  cfg.tau_train = meta.tau_train;

  LoadedCheckpoint loaded{UnrolledNet(cfg, 0), meta};

  // The architecture dictates the exact tensor directory; reject anything
  // extra, missing, misordered or reshaped.
  std::vector<Entry> expect = directory(loaded.net);
  const json& tensors = header.at("tensors");
  if (!tensors.is_array() || tensors.size() != expect.size())
    throw CheckpointError(path + ": tensor directory does not match the declared architecture");

  uint64_t offset = 0;
  for (size_t i = 0; i < expect.size(); ++i) {
    const json& t = tensors.at(i);
    if (t.at("name").get<std::string>() != expect[i].name)
      throw CheckpointError(path + ": unexpected tensor '" + t.at("name").get<std::string>() +
                            "' (wanted '" + expect[i].name + "')");
    if (t.at("shape").get<std::vector<int64_t>>() != expect[i].shape)
      throw CheckpointError(path + ": shape mismatch for " + expect[i].name);
    if (t.at("offset").get<uint64_t>() != offset)
      throw CheckpointError(path + ": non-contiguous offset for " + expect[i].name);
    offset += static_cast<uint64_t>(shape_numel(expect[i].shape)) * sizeof(double);
  }

  // Payload, in directory order, straight into the net.
  for (int s = 0; s < loaded.net.storage_blocks(); ++s) {
    DenoiserBlock& blk = loaded.net.storage_block(s);
    auto read_into = [&](std::vector<double>& v) {
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
      if (static_cast<size_t>(in.gcount()) != v.size() * sizeof(double))
        throw CheckpointError(path + ": truncated payload");
    };
    for (int l = 0; l < 5; ++l) {
      read_into(blk.conv_w[l].data);
      read_into(blk.conv_b[l].data);
      if (l >= 1 && l <= 3) {
        const int m = l - 1;
        read_into(blk.bn_gamma[m].data);
        read_into(blk.bn_beta[m].data);
        read_into(blk.bn_state[m].running_mean);
        read_into(blk.bn_state[m].running_var);
      }
    }
  }
  // nothing may trail the payload
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0) throw CheckpointError(path + ": trailing bytes after payload");
  return loaded;
}

}  // namespace despeckle
