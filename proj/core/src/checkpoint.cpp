#include "mtml/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mtml/errors.hpp"
#include "mtml/hash.hpp"

namespace mtml {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'M', 'T', 'M', 'L', 'C', 'K', 'P', 'T'};

enum : uint8_t { kFloat32 = 1, kFloat64 = 2 };

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    bytes_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void raw(const void* p, std::size_t n) { bytes_.append(static_cast<const char*>(p), n); }
  void str(const std::string& s) {
    pod<uint64_t>(s.size());
    raw(s.data(), s.size());
  }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T pod() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw CheckpointError("checkpoint truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::string str() {
    const auto n = pod<uint64_t>();
    return std::string(take(n), n);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

uint64_t checksum(std::string_view bytes) {
  return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
}

}  // namespace

bool TrainingProgress::completed(ParamGroup g) const {
  switch (g) {
    case ParamGroup::kStage1: return stage1;
    case ParamGroup::kStage2: return stage2;
    case ParamGroup::kStage3Mtml: return mtml_stage3;
    case ParamGroup::kStage3Baseline: return baseline_stage3;
  }
  return false;
}

void TrainingProgress::mark(ParamGroup g) {
  switch (g) {
    case ParamGroup::kStage1: stage1 = true; break;
    case ParamGroup::kStage2: stage2 = true; break;
    case ParamGroup::kStage3Mtml: mtml_stage3 = true; break;
    case ParamGroup::kStage3Baseline: baseline_stage3 = true; break;
  }
}

void save_checkpoint(const CheckpointState& state, const fs::path& path) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.pod<uint32_t>(kCheckpointVersion);
  const auto& p = state.progress;
  w.pod<uint8_t>(static_cast<uint8_t>(p.stage1 | (p.stage2 << 1) | (p.mtml_stage3 << 2) | (p.baseline_stage3 << 3)));
  w.str(state.config_text);
  w.pod<uint64_t>(state.parameters.size());
  for (const auto& [name, tensor] : state.parameters) {
    const auto t = tensor.detach().cpu().contiguous();
    uint8_t dtype = 0;
    if (t.scalar_type() == torch::kFloat) dtype = kFloat32;
    else if (t.scalar_type() == torch::kDouble) dtype = kFloat64;
    else throw CheckpointError(fmt::format("unsupported dtype for '{}'", name));
    w.pod<uint32_t>(static_cast<uint32_t>(name.size()));
    w.raw(name.data(), name.size());
    w.pod<uint8_t>(dtype);
    w.pod<uint32_t>(static_cast<uint32_t>(t.dim()));
    for (const auto d : t.sizes()) w.pod<int64_t>(d);
    const auto nbytes = static_cast<uint64_t>(t.numel()) * t.element_size();
    w.pod<uint64_t>(nbytes);
    w.raw(t.data_ptr(), nbytes);
  }
  w.str(state.optimizer_state);
  w.pod<uint64_t>(checksum(w.bytes()));

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw CheckpointError(fmt::format("short write to '{}'", tmp.string()));
  }
  fs::rename(tmp, path);
}

CheckpointState load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open checkpoint '{}'", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) + sizeof(uint32_t) + sizeof(uint64_t) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(fmt::format("'{}' is not a checkpoint or is truncated", path.string()));
  }
  const std::string_view body(bytes.data(), bytes.size() - sizeof(uint64_t));
  uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  Reader r(body);
  r.take(sizeof(kMagic));
  const auto version = r.pod<uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("checkpoint version {} unsupported (expected {})", version, kCheckpointVersion));
  }
  if (checksum(body) != stored) throw CheckpointError("checkpoint corrupted or truncated (checksum mismatch)");

  CheckpointState state;
  const auto bits = r.pod<uint8_t>();
  state.progress = {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
  state.config_text = r.str();
  const auto count = r.pod<uint64_t>();
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.pod<uint32_t>();
    std::string name(r.take(name_len), name_len);
    const auto dtype = r.pod<uint8_t>();
    if (dtype != kFloat32 && dtype != kFloat64) throw CheckpointError("unknown tensor dtype");
    const auto ndim = r.pod<uint32_t>();
    std::vector<int64_t> dims(ndim);
    for (auto& d : dims) d = r.pod<int64_t>();
    const auto nbytes = r.pod<uint64_t>();
    auto t = torch::empty(dims, dtype == kFloat32 ? torch::kFloat : torch::kDouble);
    if (nbytes != static_cast<uint64_t>(t.numel()) * t.element_size()) {
      throw CheckpointError(fmt::format("tensor '{}' size does not match its shape", name));
    }
    std::memcpy(t.data_ptr(), r.take(nbytes), nbytes);
    state.parameters.emplace_back(std::move(name), std::move(t));
  }
  state.optimizer_state = r.str();
  if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
  return state;
}

CheckpointState capture_state(RelayNetwork& net, const TrainingProgress& progress, std::string optimizer_state) {
  CheckpointState state;
  state.progress = progress;
  state.config_text = to_config_text(net->config());
  for (const auto& p : net->named_parameters()) state.parameters.emplace_back(p.key(), p.value().detach().clone());
  state.optimizer_state = std::move(optimizer_state);
  return state;
}

void restore_state(RelayNetwork& net, const CheckpointState& state) {
  auto params = net->named_parameters();
  // Validate everything first so a mismatch leaves `net` untouched.
  for (const auto& [name, tensor] : state.parameters) {
    const auto* target = params.find(name);
    if (target == nullptr) throw CheckpointError(fmt::format("checkpoint has unknown parameter '{}'", name));
    if (target->sizes() != tensor.sizes()) {
      throw CheckpointError(fmt::format("shape mismatch for '{}': checkpoint {} vs model {}", name,
                                        fmt::join(tensor.sizes(), "x"), fmt::join(target->sizes(), "x")));
    }
  }
  torch::NoGradGuard no_grad;
  for (const auto& [name, tensor] : state.parameters) {
    if (!state.progress.completed(RelayNetworkImpl::group_of(name))) continue;
    params[name].copy_(tensor.to(params[name].dtype()));
  }
}

std::string serialize_optimizer(torch::optim::Optimizer& optimizer) {
  torch::serialize::OutputArchive archive;
  optimizer.save(archive);
  std::ostringstream out;
  archive.save_to(out);
  return out.str();
}

void deserialize_optimizer(torch::optim::Optimizer& optimizer, const std::string& blob) {
  if (blob.empty()) return;
  std::istringstream in(blob);
  torch::serialize::InputArchive archive;
  archive.load_from(in);
  optimizer.load(archive);
}

}  // namespace mtml
