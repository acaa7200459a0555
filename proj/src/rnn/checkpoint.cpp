#include "loco/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "loco/error.hpp"

namespace loco {
namespace {

constexpr std::string_view kMagic = "LOCOCKPT";

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (in_.size() - pos_ < n) {
      throw FormatError("checkpoint truncated at byte " + std::to_string(pos_) + " (needed " +
                        std::to_string(n) + " more bytes)");
    }
  }
  std::uint64_t le(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint metadata lacks '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw FormatError("checkpoint metadata '" + key + "' is not a number");
  }
}

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

void put_tensor(Writer& w, std::string_view name, const rnn::TensorInfo& ti,
                std::span<const double> values) {
  w.str(name);
  if (ti.rows == 1) {
    w.u32(1);
    w.u64(ti.cols);
  } else {
    w.u32(2);
    w.u64(ti.rows);
    w.u64(ti.cols);
  }
  for (double v : values) w.f64(v);
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const rnn::ModelDims& d = ckpt.params.dims();
  std::map<std::string, std::string> meta = ckpt.meta;
  meta["model.input"] = std::to_string(d.input);
  meta["model.hidden"] = std::to_string(d.hidden);
  meta["model.channels"] = std::to_string(d.channels);
  if (ckpt.adam) {
    const rnn::AdamState& a = *ckpt.adam;
    meta["adam.step"] = std::to_string(a.step);
    meta["adam.lr"] = fmt_double(a.config.lr);
    meta["adam.beta1"] = fmt_double(a.config.beta1);
    meta["adam.beta2"] = fmt_double(a.config.beta2);
    meta["adam.eps"] = fmt_double(a.config.eps);
  }

  Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    w.str(k);
    w.str(v);
  }
  const auto& layout = ckpt.params.layout();
  const std::uint32_t per_model = static_cast<std::uint32_t>(layout.size());
  w.u32(ckpt.adam ? 3 * per_model : per_model);
  for (const rnn::TensorInfo& ti : layout) {
    put_tensor(w, ti.name, ti, ckpt.params.values().subspan(ti.offset, ti.size()));
  }
  if (ckpt.adam) {
    for (const rnn::TensorInfo& ti : layout) {
      put_tensor(w, "adam.m." + std::string(ti.name), ti,
                 std::span<const double>(ckpt.adam->m).subspan(ti.offset, ti.size()));
    }
    for (const rnn::TensorInfo& ti : layout) {
      put_tensor(w, "adam.v." + std::string(ti.name), ti,
                 std::span<const double>(ckpt.adam->v).subspan(ti.offset, ti.size()));
    }
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(kMagic.size()) != kMagic) throw FormatError("checkpoint: bad magic at byte 0");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " at byte 8");
  }
  Checkpoint ckpt;
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = r.str();
    ckpt.meta[key] = r.str();
  }
  std::map<std::string, RawTensor> tensors;
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    RawTensor t;
    const std::uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > 2) throw FormatError("checkpoint: tensor " + name + " has bad rank");
    std::uint64_t count = 1;
    for (std::uint32_t k = 0; k < ndim; ++k) {
      t.dims.push_back(r.u64());
      count *= t.dims.back();
    }
    if (count > (bytes.size() - r.pos()) / 8) {
      throw FormatError("checkpoint: tensor " + name + " runs past end of file at byte " +
                        std::to_string(r.pos()));
    }
    t.values.resize(count);
    for (double& v : t.values) v = r.f64();
    tensors.emplace(std::move(name), std::move(t));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes at " + std::to_string(r.pos()));

  const rnn::ModelDims dims{static_cast<std::size_t>(parse_double(ckpt.meta, "model.input")),
                            static_cast<std::size_t>(parse_double(ckpt.meta, "model.hidden")),
                            static_cast<std::size_t>(parse_double(ckpt.meta, "model.channels"))};
  ckpt.params = rnn::ModelParams(dims);

  auto load_into = [&](const std::string& name, const rnn::TensorInfo& ti, double* dst) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint: missing tensor " + name);
    if (it->second.values.size() != ti.size()) {
      throw FormatError("checkpoint: tensor " + name + " has wrong size");
    }
    std::copy(it->second.values.begin(), it->second.values.end(), dst);
  };
  for (const rnn::TensorInfo& ti : ckpt.params.layout()) {
    load_into(std::string(ti.name), ti, ckpt.params.values().data() + ti.offset);
  }
  if (ckpt.meta.contains("adam.step")) {
    rnn::AdamConfig cfg{parse_double(ckpt.meta, "adam.lr"), parse_double(ckpt.meta, "adam.beta1"),
                        parse_double(ckpt.meta, "adam.beta2"), parse_double(ckpt.meta, "adam.eps")};
    rnn::AdamState adam = rnn::make_adam(ckpt.params, cfg);
    adam.step = std::stoull(ckpt.meta.at("adam.step"));
    for (const rnn::TensorInfo& ti : ckpt.params.layout()) {
      load_into("adam.m." + std::string(ti.name), ti, adam.m.data() + ti.offset);
      load_into("adam.v." + std::string(ti.name), ti, adam.v.data() + ti.offset);
    }
    ckpt.adam = std::move(adam);
  }
  for (const char* k : {"model.input", "model.hidden", "model.channels", "adam.step", "adam.lr",
                        "adam.beta1", "adam.beta2", "adam.eps"}) {
    ckpt.meta.erase(k);
  }
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace loco
