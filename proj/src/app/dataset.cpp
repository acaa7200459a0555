#include "loco/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "loco/error.hpp"
#include "loco/idx.hpp"

namespace loco::dataset {
namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + p.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  return in;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_split(const std::filesystem::path& dir, std::span<const synth::SampleRecord> records) {
  std::filesystem::create_directories(dir);
  if (records.empty()) throw InvalidInput("cannot write an empty split");
  const std::size_t features = records.front().sample.features.cols;

  idx::IdxTensor tensor;
  tensor.type = idx::ElementType::kFloat64;
  std::size_t total = 0;
  for (const auto& r : records) total += r.sample.features.rows;
  tensor.dims = {static_cast<std::uint32_t>(total), static_cast<std::uint32_t>(features)};
  tensor.values.reserve(total * features);

  auto labels = open_out(dir / "labels.txt");
  auto truth = open_out(dir / "truth.txt");
  const bool has_centers = !records.front().truth.centers.empty();
  std::ofstream centers;
  if (has_centers) centers = open_out(dir / "centers.txt");

  for (std::size_t id = 0; id < records.size(); ++id) {
    const synth::SampleRecord& r = records[id];
    if (r.sample.features.cols != features) throw InvalidInput("feature width differs across samples");
    tensor.values.insert(tensor.values.end(), r.sample.features.data.begin(),
                         r.sample.features.data.end());
    labels << id << ' ' << r.sample.features.rows;
    for (long long c : r.sample.counts.counts) labels << ' ' << c;
    labels << '\n';
    for (std::size_t c = 0; c < r.truth.events.size(); ++c) {
      truth << id << ' ' << c << ' ' << r.truth.events[c].size();
      for (std::size_t t : r.truth.events[c]) truth << ' ' << t;
      truth << '\n';
      if (has_centers) {
        for (const auto& [x, y] : r.truth.centers[c]) {
          centers << id << ' ' << c << ' ' << fmt(x) << ' ' << fmt(y) << '\n';
        }
      }
    }
  }
  idx::write_idx(dir / "features.idx", tensor);
}

std::vector<synth::TrainingSample> read_samples(const std::filesystem::path& dir) {
  const idx::IdxTensor tensor = idx::load_idx(dir / "features.idx");
  if (tensor.dims.size() != 2) throw FormatError("features.idx must be two-dimensional");
  const std::size_t total = tensor.dims[0], features = tensor.dims[1];

  std::vector<synth::TrainingSample> out;
  auto in = open_in(dir / "labels.txt");
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t id = 0, length = 0;
    if (!(ss >> id >> length) || id != out.size() || length == 0) {
      throw FormatError("labels.txt line " + std::to_string(out.size() + 1) + " is malformed");
    }
    synth::TrainingSample s;
    long long c = 0;
    while (ss >> c) s.counts.counts.push_back(c);
    if (offset + length > total) throw FormatError("labels.txt lengths exceed features.idx rows");
    s.features = Matrix(length, features);
    std::copy_n(tensor.values.begin() + static_cast<std::ptrdiff_t>(offset * features),
                length * features, s.features.data.begin());
    offset += length;
    out.push_back(std::move(s));
  }
  if (offset != total) throw FormatError("features.idx has rows not covered by labels.txt");
  return out;
}

std::vector<synth::EventTruth> read_truth(const std::filesystem::path& dir) {
  std::vector<synth::EventTruth> out;
  auto in = open_in(dir / "truth.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t id = 0, channel = 0, n = 0;
    if (!(ss >> id >> channel >> n)) throw FormatError("truth.txt line is malformed: " + line);
    if (id >= out.size()) out.resize(id + 1);
    auto& events = out[id].events;
    if (channel >= events.size()) events.resize(channel + 1);
    events[channel].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (!(ss >> events[channel][k])) throw FormatError("truth.txt line is short: " + line);
    }
  }
  const auto centers_path = dir / "centers.txt";
  if (std::filesystem::exists(centers_path)) {
    auto cin = open_in(centers_path);
    while (std::getline(cin, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::size_t id = 0, channel = 0;
      double x = 0, y = 0;
      if (!(ss >> id >> channel >> x >> y) || id >= out.size()) {
        throw FormatError("centers.txt line is malformed: " + line);
      }
      auto& centers = out[id].centers;
      if (centers.size() < out[id].events.size()) centers.resize(out[id].events.size());
      if (channel >= centers.size()) throw FormatError("centers.txt channel out of range");
      centers[channel].emplace_back(x, y);
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  auto out = open_out(path);
  for (const auto& [k, v] : m) out << k << " = " << v << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    m[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return m;
}

}  // namespace loco::dataset
