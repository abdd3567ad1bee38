#include "seldsynth/dataio.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace seld {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

using json = nlohmann::json;

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
// KSDATAFORMAT_SUBTYPE_IEEE_FLOAT / _PCM share this tail after the leading u16 tag.
constexpr unsigned char kSubformatTail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                              0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

template <typename T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  return v;
}

std::string read_binary(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::Missing, "missing file " + path.string());
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_binary(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

std::string read_text(const fs::path& path) { return read_binary(path); }
void write_text(const fs::path& path, const std::string& text) { write_binary(path, text); }

void write_wav(const fs::path& path, const MultiSignal& channels, int sample_rate) {
  if (channels.empty() || channels.size() > 65535) throw Error(ErrorKind::InvalidArgument, "bad channel count");
  const std::size_t frames = channels[0].size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) throw Error(ErrorKind::Mismatch, "channels differ in length");
  }
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * n_ch * 4;
  if (data_bytes > 0xFFFFFFFFULL - 80) throw Error(ErrorKind::InvalidArgument, "WAV payload exceeds 4 GiB");

  std::string out;
  out.reserve(static_cast<std::size_t>(data_bytes) + 80);
  out += "RIFF";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(4 + 8 + 40 + 8 + data_bytes));
  out += "WAVE";
  out += "fmt ";
  put<std::uint32_t>(out, 40);
  put<std::uint16_t>(out, kFormatExtensible);
  put<std::uint16_t>(out, n_ch);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * n_ch * 4);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(n_ch * 4));
  put<std::uint16_t>(out, 32);
  put<std::uint16_t>(out, 22);
  put<std::uint16_t>(out, 32);
  put<std::uint32_t>(out, 0);
  put<std::uint16_t>(out, kFormatFloat);
  out.append(reinterpret_cast<const char*>(kSubformatTail), sizeof(kSubformatTail));
  out += "data";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) put<float>(out, static_cast<float>(ch[i]));
  }
  write_binary(path, out);
}

AudioFile read_wav(const fs::path& path) {
  const std::string in = read_binary(path);
  const std::string where = path.string();
  if (in.size() < 12 || in.compare(0, 4, "RIFF") != 0 || in.compare(8, 4, "WAVE") != 0) {
    throw Error(ErrorKind::Format, where + ": not a RIFF/WAVE file");
  }
  std::uint16_t tag = 0, n_ch = 0, bits = 0, block = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_len = 0;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= in.size()) {
    const std::string id = in.substr(pos, 4);
    const auto len = static_cast<std::size_t>(get<std::uint32_t>(in, pos + 4));
    const std::size_t body = pos + 8;
    if (body + len > in.size()) {
      if (id == "data") {
        throw Error(ErrorKind::Format, where + ": truncated data chunk");
      }
      throw Error(ErrorKind::Format, where + ": chunk '" + id + "' runs past end of file");
    }
    if (id == "fmt ") {
      if (len < 16) throw Error(ErrorKind::Format, where + ": short fmt chunk");
      tag = get<std::uint16_t>(in, body);
      n_ch = get<std::uint16_t>(in, body + 2);
      rate = get<std::uint32_t>(in, body + 4);
      block = get<std::uint16_t>(in, body + 12);
      bits = get<std::uint16_t>(in, body + 14);
      if (tag == kFormatExtensible) {
        if (len < 40) throw Error(ErrorKind::Format, where + ": short extensible fmt chunk");
        tag = get<std::uint16_t>(in, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = len;
      have_data = true;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt || !have_data) throw Error(ErrorKind::Format, where + ": missing fmt or data chunk");
  if (n_ch == 0 || block != n_ch * (bits / 8)) throw Error(ErrorKind::Format, where + ": inconsistent fmt chunk");
  const bool is_float = tag == kFormatFloat && bits == 32;
  const bool is_pcm = tag == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  if (!is_float && !is_pcm) {
    throw Error(ErrorKind::Format, where + ": unsupported sample format (tag " + std::to_string(tag) + ", " +
                                       std::to_string(bits) + " bits)");
  }
  const std::size_t frames = data_len / block;
  AudioFile af;
  af.sample_rate = static_cast<int>(rate);
  af.channels.assign(n_ch, Signal(frames));
  const std::size_t bps = bits / 8;
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      const std::size_t p = data_pos + i * block + c * bps;
      double v = 0.0;
      if (is_float) {
        v = get<float>(in, p);
      } else if (bits == 16) {
        v = get<std::int16_t>(in, p) / 32768.0;
      } else if (bits == 24) {
        const auto b0 = static_cast<std::uint8_t>(in[p]);
        const auto b1 = static_cast<std::uint8_t>(in[p + 1]);
        const auto b2 = static_cast<std::uint8_t>(in[p + 2]);
        std::int32_t s = b0 | (b1 << 8) | (b2 << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = get<std::int32_t>(in, p) / 2147483648.0;
      }
      af.channels[c][i] = v;
    }
  }
  return af;
}

void write_audio(const fs::path& path, const MultiSignal& audio) {
  if (audio.size() != 4) throw Error(ErrorKind::InvalidArgument, "recordings must have 4 channels");
  write_wav(path, audio, kSampleRate);
}

MultiSignal read_audio(const fs::path& path) {
  AudioFile af = read_wav(path);
  if (af.channels.size() != 4) {
    throw Error(ErrorKind::Mismatch, path.string() + ": expected 4 channels, found " +
                                         std::to_string(af.channels.size()));
  }
  if (af.sample_rate != kSampleRate) {
    throw Error(ErrorKind::Mismatch, path.string() + ": expected 24000 Hz, found " + std::to_string(af.sample_rate));
  }
  return std::move(af.channels);
}

namespace {

int round_azimuth(double az) {
  long a = std::lround(az);
  a = ((a + 180) % 360 + 360) % 360 - 180;
  return static_cast<int>(a);
}

int round_elevation(double el) { return static_cast<int>(std::clamp(std::lround(el), -90L, 90L)); }

}  // namespace

std::string format_metadata(const LabelFrameSet& labels) {
  LabelFrameSet sorted = labels;
  sorted.normalize();
  std::string out;
  for (const auto& [k, entries] : sorted.frames) {
    for (const auto& e : entries) {
      out += std::to_string(k) + "," + std::to_string(e.class_index) + "," + std::to_string(e.track_id) + "," +
             std::to_string(round_azimuth(e.doa.azimuth)) + "," + std::to_string(round_elevation(e.doa.elevation)) +
             "\n";
    }
  }
  return out;
}

void write_metadata(const fs::path& path, const LabelFrameSet& labels) { write_binary(path, format_metadata(labels)); }

LabelFrameSet parse_metadata(const std::string& text, int n_frames, const std::string& origin) {
  LabelFrameSet labels;
  labels.n_frames = n_frames;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("frame", 0) == 0) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    const std::string at = origin + ":" + std::to_string(line_no);
    if (cols.size() != 5) {
      throw Error(ErrorKind::Format, at + ": expected 5 columns, found " + std::to_string(cols.size()));
    }
    long v[5];
    for (int i = 0; i < 5; ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stol(cols[static_cast<std::size_t>(i)], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cols[static_cast<std::size_t>(i)].size()) {
        throw Error(ErrorKind::Format, at + ": column " + std::to_string(i + 1) + " is not an integer");
      }
    }
    if (v[0] < 0 || v[0] >= n_frames) throw Error(ErrorKind::OutOfRange, at + ": frame out of range");
    if (v[1] < 0) throw Error(ErrorKind::OutOfRange, at + ": class out of range");
    if (v[2] < 0) throw Error(ErrorKind::OutOfRange, at + ": track out of range");
    if (v[3] < -180 || v[3] >= 180) throw Error(ErrorKind::OutOfRange, at + ": azimuth outside [-180, 180)");
    if (v[4] < -90 || v[4] > 90) throw Error(ErrorKind::OutOfRange, at + ": elevation outside [-90, 90]");
    labels.add(static_cast<int>(v[0]), {static_cast<int>(v[1]), static_cast<int>(v[2]),
                                        {static_cast<double>(v[3]), static_cast<double>(v[4])}});
  }
  labels.normalize();
  for (const auto& [k, entries] : labels.frames) {
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].class_index == entries[i - 1].class_index && entries[i].track_id == entries[i - 1].track_id) {
        throw Error(ErrorKind::Format, origin + ": duplicate (class, track) in frame " + std::to_string(k));
      }
    }
  }
  return labels;
}

LabelFrameSet read_metadata(const fs::path& path, int n_frames) {
  return parse_metadata(read_binary(path), n_frames, path.string());
}

void write_ir_bank(const fs::path& dir, const IrBank& bank) {
  bank.validate();
  fs::create_directories(dir);
  json m;
  m["version"] = kBankManifestVersion;
  m["room_id"] = bank.room_id;
  m["format"] = to_string(bank.format);
  m["sample_rate"] = bank.sample_rate;
  m["rt60_s"] = bank.rt60_s ? json(*bank.rt60_s) : json(nullptr);
  m["trajectories"] = json::array();
  for (std::size_t t = 0; t < bank.trajectories.size(); ++t) {
    const auto& traj = bank.trajectories[t];
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03zu.wav", t);
    json jt;
    jt["id"] = traj.id;
    jt["shape"] = to_string(traj.shape);
    jt["file"] = name;
    jt["nodes"] = json::array();
    jt["ir_lengths"] = json::array();
    std::size_t len = 0;
    for (const auto& ir : bank.irs[t]) len = std::max(len, ir[0].size());
    MultiSignal stack;
    for (std::size_t k = 0; k < traj.nodes.size(); ++k) {
      const auto& n = traj.nodes[k];
      jt["nodes"].push_back({n.doa.azimuth, n.doa.elevation, n.distance_m});
      jt["ir_lengths"].push_back(bank.irs[t][k][0].size());
      for (const auto& ch : bank.irs[t][k]) {
        Signal padded = ch;
        padded.resize(len, 0.0);
        stack.push_back(std::move(padded));
      }
    }
    write_wav(dir / name, stack, bank.sample_rate);
    m["trajectories"].push_back(jt);
  }
  if (bank.ambience) {
    m["ambience"] = "ambience.wav";
    write_wav(dir / "ambience.wav", *bank.ambience, bank.sample_rate);
  }
  write_binary(dir / kBankManifestName, m.dump(1) + "\n");
}

IrBank read_ir_bank(const fs::path& dir) {
  const fs::path manifest = dir / kBankManifestName;
  if (!fs::exists(manifest)) throw Error(ErrorKind::Missing, "missing bank manifest " + manifest.string());
  json m;
  try {
    m = json::parse(read_binary(manifest));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, manifest.string() + ": " + e.what());
  }
  const std::string where = manifest.string();
  try {
    if (m.at("version").get<int>() != kBankManifestVersion) {
      throw Error(ErrorKind::Format, where + ": unsupported manifest version");
    }
    IrBank bank;
    bank.room_id = m.at("room_id").get<std::string>();
    bank.format = parse_format(m.at("format").get<std::string>());
    bank.sample_rate = m.at("sample_rate").get<int>();
    if (!m.at("rt60_s").is_null()) bank.rt60_s = m.at("rt60_s").get<double>();
    for (const auto& jt : m.at("trajectories")) {
      Trajectory traj;
      traj.id = jt.at("id").get<int>();
      traj.room_id = bank.room_id;
      traj.shape = parse_shape(jt.at("shape").get<std::string>());
      for (const auto& n : jt.at("nodes")) {
        traj.nodes.push_back({{n.at(0).get<double>(), n.at(1).get<double>()}, n.at(2).get<double>()});
      }
      const auto lengths = jt.at("ir_lengths").get<std::vector<std::size_t>>();
      const fs::path file = dir / jt.at("file").get<std::string>();
      if (!fs::exists(file)) throw Error(ErrorKind::Missing, where + ": missing IR file " + file.string());
      AudioFile af = read_wav(file);
      if (af.sample_rate != bank.sample_rate) throw Error(ErrorKind::Mismatch, file.string() + ": sample rate mismatch");
      if (af.channels.size() % 4 != 0 || af.channels.size() / 4 != traj.nodes.size() ||
          lengths.size() != traj.nodes.size()) {
        throw Error(ErrorKind::Mismatch, where + ": trajectory " + std::to_string(traj.id) + " lists " +
                                             std::to_string(traj.nodes.size()) + " nodes but " + file.string() +
                                             " holds " + std::to_string(af.channels.size()) + " channels");
      }
      auto& row = bank.irs.emplace_back();
      for (std::size_t k = 0; k < traj.nodes.size(); ++k) {
        MultiSignal ir;
        for (std::size_t c = 0; c < 4; ++c) {
          Signal& ch = af.channels[4 * k + c];
          if (lengths[k] > ch.size()) throw Error(ErrorKind::Mismatch, where + ": IR length exceeds stored audio");
          ch.resize(lengths[k]);
          ir.push_back(std::move(ch));
        }
        row.push_back(std::move(ir));
      }
      bank.trajectories.push_back(std::move(traj));
    }
    if (m.contains("ambience")) {
      const fs::path file = dir / m.at("ambience").get<std::string>();
      if (!fs::exists(file)) throw Error(ErrorKind::Missing, where + ": missing ambience file " + file.string());
      bank.ambience = read_wav(file).channels;
    }
    bank.validate();
    return bank;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, where + ": " + e.what());
  }
}

void write_tensor_dump(const fs::path& path, const Tensor& t) {
  std::string out = "SKT1";
  if (t.dims.size() > 0xFFFF) throw Error(ErrorKind::OutOfRange, "tensor rank overflow");
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  std::size_t n = 1;
  for (auto d : t.dims) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorKind::OutOfRange, "tensor dimension overflow");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    n *= d;
  }
  if (n != t.data.size()) throw Error(ErrorKind::Mismatch, "tensor dims do not match payload");
  for (std::size_t i = 0; i < t.dims.size(); ++i) {
    const std::string label = i < t.axes.size() ? t.axes[i] : "";
    put<std::uint32_t>(out, static_cast<std::uint32_t>(label.size()));
    out += label;
  }
  out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  write_binary(path, out);
}

Tensor read_tensor_dump(const fs::path& path, const std::optional<std::vector<std::size_t>>& expect_dims) {
  const std::string in = read_binary(path);
  const std::string where = path.string();
  if (in.size() < 8 || in.compare(0, 4, "SKT1") != 0) throw Error(ErrorKind::Format, where + ": bad magic");
  const std::uint32_t rank = get<std::uint32_t>(in, 4);
  if (rank > 16) throw Error(ErrorKind::Format, where + ": implausible rank " + std::to_string(rank));
  std::size_t pos = 8;
  if (in.size() < pos + 4ull * rank) throw Error(ErrorKind::Format, where + ": truncated header");
  Tensor t;
  unsigned __int128 n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(get<std::uint32_t>(in, pos));
    n *= t.dims.back();
    pos += 4;
  }
  if (n > (static_cast<unsigned __int128>(1) << 40)) throw Error(ErrorKind::OutOfRange, where + ": dimension overflow");
  for (std::uint32_t i = 0; i < rank; ++i) {
    if (in.size() < pos + 4) throw Error(ErrorKind::Format, where + ": truncated header");
    const std::uint32_t len = get<std::uint32_t>(in, pos);
    pos += 4;
    if (len > 1024 || in.size() < pos + len) throw Error(ErrorKind::Format, where + ": truncated axis label");
    t.axes.push_back(in.substr(pos, len));
    pos += len;
  }
  const auto count = static_cast<std::size_t>(n);
  if (in.size() - pos != count * sizeof(float)) {
    throw Error(ErrorKind::Format, where + ": payload is " + std::to_string(in.size() - pos) + " bytes, header says " +
                                       std::to_string(count * sizeof(float)));
  }
  if (expect_dims && *expect_dims != t.dims) throw Error(ErrorKind::Mismatch, where + ": unexpected tensor dims");
  t.data.resize(count);
  std::memcpy(t.data.data(), in.data() + pos, count * sizeof(float));
  return t;
}

void write_feature_dump(const fs::path& path, const Tensor& features) {
  if (features.dims.size() != 3 || features.dims[1] != kMelBands || (features.dims[2] != 7 && features.dims[2] != 10)) {
    throw Error(ErrorKind::Mismatch, "feature stack must be T x 64 x 7 or T x 64 x 10");
  }
  write_tensor_dump(path, features);
}

void write_accdoa_dump(const fs::path& path, const Tensor& accdoa) {
  if (accdoa.dims.size() != 3 || accdoa.dims[2] != 3) throw Error(ErrorKind::Mismatch, "ACCDOA dump must be T x C x 3");
  write_tensor_dump(path, accdoa);
}

std::string to_string(SplitRole r) {
  switch (r) {
    case SplitRole::Training: return "training";
    case SplitRole::Validation: return "validation";
    case SplitRole::Testing: return "testing";
    case SplitRole::Evaluation: return "evaluation";
  }
  return "unknown";
}

SplitSpec SplitSpec::defaults() {
  return {{{SplitRole::Training, {1, 2, 3, 4}},
           {SplitRole::Validation, {5}},
           {SplitRole::Testing, {6}},
           {SplitRole::Evaluation, {7, 8}}}};
}

std::optional<SplitRole> SplitSpec::role_of(int fold) const {
  for (const auto& [role, folds] : roles) {
    if (folds.count(fold)) return role;
  }
  return std::nullopt;
}

void SplitSpec::validate(const std::set<int>& used_folds) const {
  std::set<int> seen;
  for (const auto& [role, folds] : roles) {
    for (int f : folds) {
      if (f < 1 || f > 8) throw Error(ErrorKind::OutOfRange, "split fold " + std::to_string(f) + " outside 1..8");
      if (!seen.insert(f).second) {
        throw Error(ErrorKind::InvalidArgument, "fold " + std::to_string(f) + " assigned to more than one role");
      }
    }
  }
  for (int f : used_folds) {
    if (!seen.count(f)) throw Error(ErrorKind::InvalidArgument, "fold " + std::to_string(f) + " has no split role");
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidArgument, "config field '" + field + "': " + why);
  };
  if (n_recordings < 1) fail("n_recordings", "must be >= 1");
  if (!(duration_s > 0.0 && duration_s <= 3600.0)) fail("duration_s", "must be in (0, 3600]");
  if (n_target_layers != 3) fail("n_target_layers", "must be 3");
  if (n_interferer_layers != 1) fail("n_interferer_layers", "must be 1");
  for (const auto& [name, r] : {std::pair{"target_gap_s", target_gap_s}, std::pair{"interferer_gap_s", interferer_gap_s}}) {
    if (!(r.first >= 0.0 && r.first <= r.second)) fail(name, "expected 0 <= lo <= hi");
  }
  if (!(snr_db.first >= 6.0 && snr_db.first <= snr_db.second && snr_db.second <= 30.0)) {
    fail("snr_db", "range must lie within [6, 30]");
  }
  if (!(p_moving >= 0.0 && p_moving <= 1.0)) fail("p_moving", "must be in [0, 1]");
  if (speeds != std::vector<double>(kMovingSpeeds.begin(), kMovingSpeeds.end())) fail("speeds", "must be [10, 20, 40]");
  if (formats.empty()) fail("formats", "must list foa and/or mic");
  if (folds.empty()) fail("folds", "must not be empty");
  for (int f : folds) {
    if (f < 1 || f > 8) fail("folds", "fold " + std::to_string(f) + " outside 1..8");
  }
  if (banks.empty()) fail("banks", "at least one room is required");
  classes.validate();
  split.validate(std::set<int>(folds.begin(), folds.end()));
}

namespace {

std::pair<double, double> read_range(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorKind::Format, "config field '" + field + "': expected [lo, hi]");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, origin + ": " + e.what());
  }
  RunConfig c;
  std::string field;
  try {
    auto opt = [&](const char* name) -> const json* {
      field = name;
      return j.contains(name) ? &j.at(name) : nullptr;
    };
    if (const json* v = opt("seed")) {
      c.seed = v->get<std::uint64_t>();
    } else {
      throw Error(ErrorKind::Format, origin + ": config field 'seed' is mandatory");
    }
    if (const json* v = opt("n_recordings")) c.n_recordings = v->get<int>();
    if (const json* v = opt("duration_s")) c.duration_s = v->get<double>();
    if (const json* v = opt("n_target_layers")) c.n_target_layers = v->get<int>();
    if (const json* v = opt("n_interferer_layers")) c.n_interferer_layers = v->get<int>();
    if (const json* v = opt("target_gap_s")) c.target_gap_s = read_range(*v, field);
    if (const json* v = opt("interferer_gap_s")) c.interferer_gap_s = read_range(*v, field);
    if (const json* v = opt("snr_db")) c.snr_db = read_range(*v, field);
    if (const json* v = opt("p_moving")) c.p_moving = v->get<double>();
    if (const json* v = opt("speeds")) c.speeds = v->get<std::vector<double>>();
    if (const json* v = opt("formats")) {
      c.formats.clear();
      for (const auto& f : *v) c.formats.push_back(parse_format(f.get<std::string>()));
    }
    if (const json* v = opt("folds")) c.folds = v->get<std::vector<int>>();
    if (const json* v = opt("banks")) {
      for (const auto& b : *v) {
        c.banks.push_back({base_dir / b.at("foa").get<std::string>(), base_dir / b.at("mic").get<std::string>()});
      }
    }
    if (const json* v = opt("samples")) {
      if (v->contains("dir")) c.samples.dir = base_dir / v->at("dir").get<std::string>();
      if (v->contains("per_class")) c.samples.synthetic_per_class = v->at("per_class").get<int>();
      if (v->contains("min_s")) c.samples.synthetic_min_s = v->at("min_s").get<double>();
      if (v->contains("max_s")) c.samples.synthetic_max_s = v->at("max_s").get<double>();
    }
    if (const json* v = opt("classes")) {
      if (v->contains("targets")) c.classes.target_classes = v->at("targets").get<std::vector<std::string>>();
      if (v->contains("interferers")) c.classes.interferer_labels = v->at("interferers").get<std::vector<std::string>>();
    }
    if (const json* v = opt("split")) {
      c.split.roles.clear();
      for (const auto& [name, role] : {std::pair{"training", SplitRole::Training},
                                       std::pair{"validation", SplitRole::Validation},
                                       std::pair{"testing", SplitRole::Testing},
                                       std::pair{"evaluation", SplitRole::Evaluation}}) {
        if (v->contains(name)) {
          const auto folds = v->at(name).get<std::vector<int>>();
          c.split.roles[role] = std::set<int>(folds.begin(), folds.end());
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, origin + ": config field '" + field + "': " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), origin + ": " + e.what());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), origin + ": " + e.what());
  }
  return c;
}

RunConfig read_run_config(const fs::path& path) {
  return parse_run_config(read_binary(path), path.parent_path(), path.string());
}

SampleStore read_sample_dir(const fs::path& dir) {
  const fs::path manifest = dir / "samples.json";
  if (!fs::exists(manifest)) throw Error(ErrorKind::Missing, "missing sample manifest " + manifest.string());
  SampleStore store;
  try {
    for (const auto& s : json::parse(read_binary(manifest))) {
      const std::string id = s.at("id").get<std::string>();
      AudioFile af = read_wav(dir / s.at("file").get<std::string>());
      if (af.sample_rate != kSampleRate || af.channels.size() != 1) {
        throw Error(ErrorKind::Mismatch, "sample " + id + " must be mono 24 kHz");
      }
      const double dur = static_cast<double>(af.channels[0].size()) / kSampleRate;
      store[id] = EventSample{{id, s.at("class").get<std::string>(), dur}, std::move(af.channels[0])};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, manifest.string() + ": " + e.what());
  }
  return store;
}

std::string report_to_text(const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "ER_%g: %.2f\nF_%g: %.1f%%\nLE_CD: %.1f deg\nLR_CD: %.1f%%\n"
                "TP: %ld\nFP: %ld\nFN: %ld\nN_ref: %ld\nS: %ld\nD: %ld\nI: %ld\n",
                r.threshold_deg, r.er, r.threshold_deg, 100.0 * r.f, r.le_cd, 100.0 * r.lr_cd, r.tp, r.fp, r.fn,
                r.n_ref, r.substitutions, r.deletions, r.insertions);
  std::string out = buf;
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

std::string report_to_json(const MetricsReport& r, const std::string& system_id) {
  json j;
  j["system_id"] = system_id;
  j["threshold_deg"] = r.threshold_deg;
  j["er"] = r.er;
  j["f"] = r.f;
  j["le_cd"] = r.le_cd;
  j["lr_cd"] = r.lr_cd;
  j["undefined"] = r.undefined;
  j["counts"] = {{"tp", r.tp},           {"fp", r.fp},          {"fn", r.fn},
                 {"n_ref", r.n_ref},     {"substitutions", r.substitutions},
                 {"deletions", r.deletions}, {"insertions", r.insertions}, {"n_pairs", r.n_pairs}};
  j["per_class"] = json::array();
  for (const auto& c : r.per_class) {
    j["per_class"].push_back({{"class", c.class_index}, {"n_ref", c.n_ref}, {"le_deg", c.le_deg}, {"lr", c.lr}});
  }
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::pair<std::string, MetricsReport> report_from_json(const std::string& text, const std::string& origin) {
  try {
    const json j = json::parse(text);
    MetricsReport r;
    r.threshold_deg = j.at("threshold_deg").get<double>();
    r.er = j.at("er").get<double>();
    r.f = j.at("f").get<double>();
    r.le_cd = j.at("le_cd").get<double>();
    r.lr_cd = j.at("lr_cd").get<double>();
    r.undefined = j.value("undefined", false);
    const auto& c = j.at("counts");
    r.tp = c.at("tp").get<long>();
    r.fp = c.at("fp").get<long>();
    r.fn = c.at("fn").get<long>();
    r.n_ref = c.at("n_ref").get<long>();
    r.substitutions = c.at("substitutions").get<long>();
    r.deletions = c.at("deletions").get<long>();
    r.insertions = c.at("insertions").get<long>();
    r.n_pairs = c.value("n_pairs", 0L);
    if (j.contains("per_class")) {
      for (const auto& pc : j.at("per_class")) {
        r.per_class.push_back({pc.at("class").get<int>(), pc.at("n_ref").get<long>(), pc.at("le_deg").get<double>(),
                               pc.at("lr").get<double>()});
      }
    }
    if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
    return {j.at("system_id").get<std::string>(), r};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, origin + ": unparseable report: " + e.what());
  }
}

}  // namespace seld
