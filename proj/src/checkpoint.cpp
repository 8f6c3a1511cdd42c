#include "mzlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mzlab {

namespace {

constexpr char kMagic[8] = {'M', 'Z', 'L', 'A', 'B', 'C', 'K', 'P'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void reals(const Vector& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void tensor(const Tensor2& t) {
    u64(t.rows);
    u64(t.cols);
    for (double x : t.values) f64(x);
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count() {
    const std::uint64_t n = u64();
    if (n > remaining()) throw CheckpointError("checkpoint: length field exceeds remaining data");
    return static_cast<std::size_t>(n);
  }
  std::string bytes() {
    const std::size_t n = count();
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Vector reals() {
    const std::size_t n = count();
    Vector v(n);
    for (double& x : v) x = f64();
    return v;
  }
  Tensor2 tensor() {
    const std::size_t rows = count();
    const std::size_t cols = count();
    if (cols != 0 && rows > remaining() / 8 / cols) throw CheckpointError("checkpoint: tensor exceeds data");
    Tensor2 t(rows, cols);
    for (double& x : t.values) x = f64();
    return t;
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw CheckpointError("checkpoint: unexpected end of data (truncated file?)");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_mlp(ByteWriter& w, const MlpParams& m) {
  w.u8(m.empty() ? 0 : 1);
  if (m.empty()) return;
  auto layer = [&](const DenseLayerParams& l) {
    w.tensor(l.weights);
    w.reals(l.biases);
  };
  layer(m.layer1);
  layer(m.layer2);
  w.u64(m.heads.size());
  for (const auto& h : m.heads) layer(h);
}

MlpParams read_mlp(ByteReader& r) {
  MlpParams m;
  if (r.u8() == 0) return m;
  auto layer = [&] {
    DenseLayerParams l;
    l.weights = r.tensor();
    l.biases = r.reals();
    if (l.biases.size() != l.weights.rows) throw CheckpointError("checkpoint: bias/weight shape mismatch");
    return l;
  };
  m.layer1 = layer();
  m.layer2 = layer();
  const std::size_t heads = r.count();
  for (std::size_t i = 0; i < heads; ++i) m.heads.push_back(layer());
  return m;
}

std::string encode_model(const MuZeroParams& p) {
  ByteWriter w;
  const ModelDims& d = p.dims;
  w.u64(d.obs_dim);
  w.u64(d.action_count);
  w.u64(d.latent_size);
  w.u64(d.hidden_size);
  w.reals(d.value_anchors);
  w.reals(d.reward_anchors);
  w.u8(d.with_decoder ? 1 : 0);
  w.u8(d.alphazero ? 1 : 0);
  write_mlp(w, p.h);
  write_mlp(w, p.g);
  write_mlp(w, p.f);
  w.u8(p.decoder ? 1 : 0);
  if (p.decoder) write_mlp(w, *p.decoder);
  return std::move(w.str());
}

MuZeroParams decode_model(ByteReader& r) {
  MuZeroParams p;
  ModelDims& d = p.dims;
  d.obs_dim = r.u64();
  d.action_count = r.u64();
  d.latent_size = r.u64();
  d.hidden_size = r.u64();
  d.value_anchors = r.reals();
  d.reward_anchors = r.reals();
  d.with_decoder = r.u8() != 0;
  d.alphazero = r.u8() != 0;
  p.h = read_mlp(r);
  p.g = read_mlp(r);
  p.f = read_mlp(r);
  if (r.u8() != 0) p.decoder = read_mlp(r);
  if (d.with_decoder != p.decoder.has_value()) throw CheckpointError("checkpoint: decoder flag mismatch");
  return p;
}

void write_trajectory(ByteWriter& w, const TrajectoryRecord& t) {
  w.u64(t.observations.size());
  for (const auto& o : t.observations) w.reals(o);
  w.u64(t.actions.size());
  for (std::size_t a : t.actions) w.u64(a);
  w.reals(t.rewards);
  w.u64(t.search_policies.size());
  for (const auto& p : t.search_policies) w.reals(p);
  w.reals(t.root_values);
  w.u8(t.terminal ? 1 : 0);
  w.u8(t.truncated ? 1 : 0);
  w.f64(t.bootstrap_value);
  w.u64(t.self_play_iteration);
}

TrajectoryRecord read_trajectory(ByteReader& r) {
  TrajectoryRecord t;
  const std::size_t n_obs = r.count();
  for (std::size_t i = 0; i < n_obs; ++i) t.observations.push_back(r.reals());
  const std::size_t n_act = r.count();
  for (std::size_t i = 0; i < n_act; ++i) t.actions.push_back(r.u64());
  t.rewards = r.reals();
  const std::size_t n_pol = r.count();
  for (std::size_t i = 0; i < n_pol; ++i) t.search_policies.push_back(r.reals());
  t.root_values = r.reals();
  t.terminal = r.u8() != 0;
  t.truncated = r.u8() != 0;
  t.bootstrap_value = r.f64();
  t.self_play_iteration = r.u64();
  const std::size_t T = t.actions.size();
  if (t.observations.size() != T + 1 || t.rewards.size() != T || t.search_policies.size() != T ||
      t.root_values.size() != T) {
    throw CheckpointError("checkpoint: inconsistent trajectory lengths");
  }
  return t;
}

void section(ByteWriter& w, const std::string& name, const std::string& payload) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.str() += name;
  w.bytes(payload);
}

}  // namespace

std::string encode_checkpoint(const TrainingState& state) {
  ByteWriter w;
  w.str().append(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);

  section(w, "config", to_config_text(state.config));
  {
    ByteWriter p;
    p.u64(state.iteration);
    p.u64(state.config.seed);
    section(w, "progress", p.str());
  }
  section(w, "model", encode_model(state.params));
  {
    ByteWriter a;
    a.u64(state.adam.step);
    a.reals(state.adam.m);
    a.reals(state.adam.v);
    section(w, "adam", a.str());
  }
  {
    ByteWriter b;
    b.u64(state.buffer.window());
    b.u64(state.buffer.bins().size());
    for (const auto& bin : state.buffer.bins()) {
      b.u64(bin.iteration);
      b.u64(bin.trajectories.size());
      for (const auto& t : bin.trajectories) write_trajectory(b, t);
    }
    section(w, "replay", b.str());
  }
  section(w, "end", "");
  return std::move(w.str());
}

TrainingState decode_checkpoint(const std::string& data) {
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("checkpoint: bad magic (not a checkpoint file)");
  }
  ByteReader r(std::string_view(data).substr(sizeof kMagic));
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }

  TrainingState state;
  bool have_config = false, have_progress = false, have_model = false, have_adam = false,
       have_replay = false, ended = false;
  std::uint64_t seed = 0;
  while (!ended) {
    const std::uint32_t name_len = r.u32();
    if (name_len > r.remaining()) throw CheckpointError("checkpoint: truncated section name");
    std::string name;
    for (std::uint32_t i = 0; i < name_len; ++i) name.push_back(static_cast<char>(r.u8()));
    const std::string payload = r.bytes();
    ByteReader s(name == "config" ? std::string_view() : std::string_view(payload));
    if (name == "config") {
      try {
        state.config = parse_config(payload);
      } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: bad config section: ") + e.what());
      }
      have_config = true;
    } else if (name == "progress") {
      state.iteration = s.u64();
      seed = s.u64();
      have_progress = true;
    } else if (name == "model") {
      state.params = decode_model(s);
      have_model = true;
    } else if (name == "adam") {
      state.adam.step = s.u64();
      state.adam.m = s.reals();
      state.adam.v = s.reals();
      have_adam = true;
    } else if (name == "replay") {
      ReplayBuffer buffer(s.u64());
      const std::size_t bins = s.count();
      for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t iteration = s.u64();
        const std::size_t n = s.count();
        std::vector<TrajectoryRecord> trajs;
        for (std::size_t i = 0; i < n; ++i) trajs.push_back(read_trajectory(s));
        buffer.add_iteration(iteration, std::move(trajs));
      }
      state.buffer = std::move(buffer);
      have_replay = true;
    } else if (name == "end") {
      ended = true;
    } else {
      throw CheckpointError("checkpoint: unknown section '" + name + "'");
    }
    if (!s.done()) throw CheckpointError("checkpoint: trailing bytes in section '" + name + "'");
  }
  if (!r.done()) throw CheckpointError("checkpoint: data after end section");
  if (!(have_config && have_progress && have_model && have_adam && have_replay)) {
    throw CheckpointError("checkpoint: missing section");
  }
  if (seed != state.config.seed) throw CheckpointError("checkpoint: seed mismatch between sections");
  const std::size_t n = parameter_count(state.params);
  if (state.adam.m.size() != n || state.adam.v.size() != n) {
    throw CheckpointError("checkpoint: optimizer state does not match parameters");
  }
  return state;
}

void save_checkpoint(const std::filesystem::path& path, const TrainingState& state) {
  const std::string bytes = encode_checkpoint(state);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace mzlab
